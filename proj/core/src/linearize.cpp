#include "ibc/linearize.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace ibc {

namespace {

void check_open_unit(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) {
        std::ostringstream msg;
        msg << what << " value " << v << " outside (0,1)";
        throw ModelError(msg.str());
    }
}

}  // namespace

NominalPoint nominal_from_scenario(const Scenario& sc, double sigma) {
    const int n = sc.section_count();
    NominalPoint np;
    np.rel_density_a = Eigen::VectorXd::Constant(n, sc.design.rel_density);
    np.rel_density_b = Eigen::VectorXd::Constant(n, sc.design.rel_density);
    np.eps = Eigen::VectorXd::Constant(n, sc.design.eps);
    np.gamma = np.eps;
    np.sigma = sigma;

    np.demand_a = Eigen::VectorXd::Zero(n);
    np.demand_b = Eigen::VectorXd::Zero(n);
    np.demand_a(0) = sc.design.mainstream_a;
    np.demand_b(n - 1) = sc.design.mainstream_b;
    for (int i = 1; i < n; ++i) np.demand_a(i) = sc.design.onramp_a[static_cast<std::size_t>(i)];
    for (int i = 0; i < n - 1; ++i) np.demand_b(i) = sc.design.onramp_b[static_cast<std::size_t>(i)];
    return np;
}

double relative_density(double rho, double eps_prev, double rho_cr, Direction dir) {
    check_open_unit(eps_prev, "sharing factor");
    const double share = dir == Direction::a ? eps_prev : 1.0 - eps_prev;
    return rho / (share * rho_cr);
}

Eigen::VectorXd nonlinear_step(const Scenario& sc, const Eigen::VectorXd& state, const Eigen::VectorXd& eps,
                               const Eigen::VectorXd& demand_a, const Eigen::VectorXd& demand_b, double sigma) {
    const int n = sc.section_count();
    const ModelParams& p = sc.params;
    const double q_cap = p.capacity;
    const double rho_cr = p.critical_density;
    const double v_f = p.free_speed;

    const auto rel_a = state.segment(0, n);
    const auto rel_b = state.segment(n, n);
    const auto gamma = state.segment(2 * n, n);
    for (int i = 0; i < n; ++i) check_open_unit(gamma(i), "gamma");

    // Surrogate flows: sigma-weighted capacity term plus FD flow-density term.
    Eigen::VectorXd q_a(n), q_b(n);
    for (int i = 0; i < n; ++i) {
        q_a(i) = sigma * eps(i) * q_cap + (1.0 - sigma) * v_f * rel_a(i) * gamma(i) * rho_cr;
        q_b(i) = sigma * (1.0 - eps(i)) * q_cap + (1.0 - sigma) * v_f * rel_b(i) * (1.0 - gamma(i)) * rho_cr;
    }

    Eigen::VectorXd next(3 * n);
    for (int i = 0; i < n; ++i) {
        const double c = p.model_step / (sc.lengths[static_cast<std::size_t>(i)] * rho_cr);
        const double beta_a = sc.dir_a.exit_rates[static_cast<std::size_t>(i)];
        const double beta_b = sc.dir_b.exit_rates[static_cast<std::size_t>(i)];

        const double inflow_a = i == 0 ? demand_a(0) : (1.0 - beta_a) * q_a(i - 1) + demand_a(i);
        next(i) = rel_a(i) + c * (inflow_a - q_a(i)) / gamma(i);

        const double inflow_b = i == n - 1 ? demand_b(n - 1) : (1.0 - beta_b) * q_b(i + 1) + demand_b(i);
        next(n + i) = rel_b(i) + c * (inflow_b - q_b(i)) / (1.0 - gamma(i));
    }
    next.segment(2 * n, n) = eps;
    return next;
}

LinearModel analytic_jacobians(const Scenario& sc, const NominalPoint& np) {
    const int n = sc.section_count();
    const ModelParams& p = sc.params;
    const double q_cap = p.capacity;
    const double rho_cr = p.critical_density;
    const double v_f = p.free_speed;
    const double sigma = np.sigma;

    LinearModel m;
    m.n = n;
    m.A = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    m.B = Eigen::MatrixXd::Zero(3 * n, n);

    for (int i = 0; i < n; ++i) {
        const double c = p.model_step / (sc.lengths[static_cast<std::size_t>(i)] * rho_cr);
        const double beta_a = sc.dir_a.exit_rates[static_cast<std::size_t>(i)];
        const double beta_b = sc.dir_b.exit_rates[static_cast<std::size_t>(i)];
        const double g = np.gamma(i);
        const double gb = 1.0 - np.gamma(i);

        // Own-density terms: the flow divided by the own gamma loses its
        // gamma dependence, so the derivative carries no gamma factor.
        m.A(i, i) = 1.0 - c * (1.0 - sigma) * v_f * rho_cr;
        m.A(n + i, n + i) = 1.0 - c * (1.0 - sigma) * v_f * rho_cr;

        // Own-input and own-gamma terms.
        m.B(i, i) = -c * sigma * q_cap / g;
        m.B(n + i, i) = c * sigma * q_cap / gb;

        double dgamma_a = c * sigma * np.eps(i) * q_cap / (g * g) - c * np.demand_a(i) / (g * g);
        double dgamma_b = -c * sigma * (1.0 - np.eps(i)) * q_cap / (gb * gb) + c * np.demand_b(i) / (gb * gb);

        if (i > 0) {
            const double g_up = np.gamma(i - 1);
            const double q_up =
                sigma * np.eps(i - 1) * q_cap + (1.0 - sigma) * v_f * np.rel_density_a(i - 1) * g_up * rho_cr;
            m.A(i, i - 1) = c * (1.0 - beta_a) * (1.0 - sigma) * v_f * g_up * rho_cr / g;
            m.A(i, 2 * n + i - 1) = c * (1.0 - beta_a) * (1.0 - sigma) * v_f * np.rel_density_a(i - 1) * rho_cr / g;
            m.B(i, i - 1) = c * (1.0 - beta_a) * sigma * q_cap / g;
            dgamma_a -= c * (1.0 - beta_a) * q_up / (g * g);
        }
        if (i < n - 1) {
            const double g_dn = 1.0 - np.gamma(i + 1);
            const double q_dn =
                sigma * (1.0 - np.eps(i + 1)) * q_cap + (1.0 - sigma) * v_f * np.rel_density_b(i + 1) * g_dn * rho_cr;
            m.A(n + i, n + i + 1) = c * (1.0 - beta_b) * (1.0 - sigma) * v_f * g_dn * rho_cr / gb;
            m.A(n + i, 2 * n + i + 1) =
                -c * (1.0 - beta_b) * (1.0 - sigma) * v_f * np.rel_density_b(i + 1) * rho_cr / gb;
            m.B(n + i, i + 1) = -c * (1.0 - beta_b) * sigma * q_cap / gb;
            dgamma_b += c * (1.0 - beta_b) * q_dn / (gb * gb);
        }

        m.A(i, 2 * n + i) = dgamma_a;
        m.A(n + i, 2 * n + i) = dgamma_b;

        // gamma(k+1) = eps(k): unit gain through the input matrix.
        m.B(2 * n + i, i) = 1.0;
    }

    m.A_lifted = m.A;
    m.B_lifted = m.B;
    m.lift_steps = 1;
    return m;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> fd_jacobians(const Scenario& sc, const NominalPoint& np, double h) {
    const int n = sc.section_count();
    Eigen::VectorXd x0(3 * n);
    x0 << np.rel_density_a, np.rel_density_b, np.gamma;

    Eigen::MatrixXd A(3 * n, 3 * n), B(3 * n, n);
    for (int j = 0; j < 3 * n; ++j) {
        Eigen::VectorXd lo = x0, hi = x0;
        lo(j) -= h;
        hi(j) += h;
        A.col(j) = (nonlinear_step(sc, hi, np.eps, np.demand_a, np.demand_b, np.sigma) -
                    nonlinear_step(sc, lo, np.eps, np.demand_a, np.demand_b, np.sigma)) /
                   (2.0 * h);
    }
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd lo = np.eps, hi = np.eps;
        lo(j) -= h;
        hi(j) += h;
        B.col(j) = (nonlinear_step(sc, x0, hi, np.demand_a, np.demand_b, np.sigma) -
                    nonlinear_step(sc, x0, lo, np.demand_a, np.demand_b, np.sigma)) /
                   (2.0 * h);
    }
    return {A, B};
}

void lift_to_control_step(LinearModel& m, int lift_steps) {
    if (lift_steps < 1) throw ModelError("lift_steps must be >= 1");
    Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(m.A.rows(), m.A.cols());
    Eigen::MatrixXd power = m.A;
    for (int j = 1; j < lift_steps; ++j) {
        sum += power;
        power = power * m.A;
    }
    m.A_lifted = power;
    m.B_lifted = sum * m.B;
    m.lift_steps = lift_steps;
}

bool is_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double rel_tol) {
    const auto rows = A.rows();
    Eigen::MatrixXd ctrb(rows, rows * B.cols());
    Eigen::MatrixXd block = B;
    for (Eigen::Index j = 0; j < rows; ++j) {
        ctrb.middleCols(j * B.cols(), B.cols()) = block;
        block = A * block;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ctrb);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > rel_tol * sv(0)) ++rank;
    }
    return rank == rows;
}

void write_matrix(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
    out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            out << buf << (c + 1 == m.cols() ? '\n' : ' ');
        }
    }
}

}  // namespace ibc
