#include "ibc/design.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ibc {

Eigen::MatrixXd density_gap_selector(int n) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, 3 * n);
    h.block(0, 0, n, n) = Eigen::MatrixXd::Identity(n, n);
    h.block(0, n, n, n) = -Eigen::MatrixXd::Identity(n, n);
    return h;
}

AugmentedSystem augment(const LinearModel& lifted, const WeightConfig& weights) {
    const int n = lifted.n;
    if (lifted.A_lifted.rows() != 3 * n || lifted.B_lifted.cols() != n) {
        throw DesignError("augment: lifted model has inconsistent dimensions");
    }

    AugmentedSystem sys;
    sys.n = n;
    sys.A = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    sys.A.topLeftCorner(3 * n, 3 * n) = lifted.A_lifted;
    sys.A.block(3 * n, 0, n, 3 * n) = density_gap_selector(n);
    sys.A.bottomRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);

    sys.B = Eigen::MatrixXd::Zero(4 * n, n);
    sys.B.topRows(3 * n) = lifted.B_lifted;

    sys.Q = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    sys.Q.topLeftCorner(2 * n, 2 * n) = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    if (!weights.pure_lq()) {
        sys.Q.bottomRightCorner(n, n) =
            std::pow(10.0, *weights.p1) * Eigen::MatrixXd::Identity(n, n);
    }

    sys.R = std::pow(10.0, weights.p2) * Eigen::MatrixXd::Identity(n, n);
    return sys;
}

Eigen::MatrixXd riccati_backward_step(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    const Eigen::MatrixXd PB = P * B;
    const Eigen::MatrixXd gram = R + B.transpose() * PB;
    const Eigen::MatrixXd gain = gram.ldlt().solve(PB.transpose());  // (R + B'PB)^{-1} B'P
    Eigen::MatrixXd next = Q + A.transpose() * (P - PB * gain) * A;
    next = 0.5 * (next + next.transpose());  // suppress floating-point drift
    return next;
}

Eigen::MatrixXd feedback_gain(const Eigen::MatrixXd& P, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& R) {
    const Eigen::MatrixXd gram = R + B.transpose() * P * B;
    return gram.ldlt().solve(B.transpose() * P * A);
}

RiccatiSolution solve_riccati(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                              const Eigen::MatrixXd& R, const RiccatiOptions& options) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    Eigen::MatrixXd K_prev;
    if (options.converge_on_gain) K_prev = feedback_gain(P, A, B, R);

    double change = 0.0;
    for (long it = 1; it <= options.max_iterations; ++it) {
        const Eigen::MatrixXd next = riccati_backward_step(P, A, B, Q, R);
        if (options.converge_on_gain) {
            const Eigen::MatrixXd K = feedback_gain(next, A, B, R);
            change = (K - K_prev).cwiseAbs().maxCoeff();
            K_prev = K;
            P = next;
            if (change < options.gain_tol) return RiccatiSolution{P, it, change};
        } else {
            change = (next - P).cwiseAbs().maxCoeff();
            P = next;
            if (change < options.value_tol) return RiccatiSolution{P, it, change};
        }
    }

    std::ostringstream msg;
    msg << "Riccati recursion did not converge within " << options.max_iterations
        << " iterations (last change " << change << "); spectral radius of A is "
        << A.eigenvalues().cwiseAbs().maxCoeff()
        << " - if the system is only stabilizable, converge on the gain instead";
    throw DesignError(msg.str());
}

Eigen::VectorXd GainSet::x_nominal() const {
    Eigen::VectorXd x(3 * n);
    x.segment(0, 2 * n).setConstant(rel_density_nominal);
    x.segment(2 * n, n).setConstant(eps_nominal);
    return x;
}

GainSet extract_gains(const RiccatiSolution& riccati, const AugmentedSystem& sys, const WeightConfig& weights) {
    const int n = sys.n;
    GainSet g;
    g.n = n;
    g.K = feedback_gain(riccati.P, sys.A, sys.B, sys.R);
    g.K1 = g.K.leftCols(3 * n);
    g.K2 = g.K.rightCols(n);
    g.Kp = g.K1 - g.K2 * density_gap_selector(n);
    g.KI = g.K2;
    g.p1 = weights.p1;
    g.p2 = weights.p2;
    g.riccati_iterations = riccati.iterations;
    g.riccati_residual = riccati.residual;
    return g;
}

GainSet design_gains(const Scenario& sc, double sigma, const WeightConfig& weights) {
    if (!(sigma >= 0.0 && sigma <= 1.0)) throw DesignError("sigma must lie in [0,1]");

    const NominalPoint nominal = nominal_from_scenario(sc, sigma);
    LinearModel model = analytic_jacobians(sc, nominal);
    lift_to_control_step(model, sc.params.steps_per_control());

    const AugmentedSystem sys = augment(model, weights);
    RiccatiOptions options;
    options.converge_on_gain = sigma == 1.0;
    const RiccatiSolution riccati = solve_riccati(sys.A, sys.B, sys.Q, sys.R, options);

    GainSet g = extract_gains(riccati, sys, weights);
    g.lift_steps = model.lift_steps;
    g.sigma = sigma;
    g.eps_nominal = sc.design.eps;
    g.rel_density_nominal = sc.design.rel_density;
    return g;
}

namespace {

void put_matrix(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
    write_matrix(out, name, m);
}

Eigen::MatrixXd take_matrix(std::istream& in, const std::string& expected) {
    std::string tag, name;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> tag >> name >> rows >> cols) || tag != "matrix" || name != expected) {
        throw DesignError("gain file: expected matrix " + expected);
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!(in >> m(r, c))) throw DesignError("gain file: truncated matrix " + expected);
        }
    }
    return m;
}

}  // namespace

void save_gains(std::ostream& out, const GainSet& g) {
    out << "ibc-gains 1\n";
    out << "n " << g.n << '\n';
    out << "lift_steps " << g.lift_steps << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", g.sigma);
    out << "sigma " << buf << '\n';
    if (g.p1.has_value()) {
        std::snprintf(buf, sizeof buf, "%.17g", *g.p1);
        out << "p1 " << buf << '\n';
    } else {
        out << "p1 -inf\n";
    }
    std::snprintf(buf, sizeof buf, "%.17g", g.p2);
    out << "p2 " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", g.eps_nominal);
    out << "eps_nominal " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", g.rel_density_nominal);
    out << "rel_density_nominal " << buf << '\n';
    out << "riccati_iterations " << g.riccati_iterations << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", g.riccati_residual);
    out << "riccati_residual " << buf << '\n';
    put_matrix(out, "K", g.K);
    put_matrix(out, "K1", g.K1);
    put_matrix(out, "K2", g.K2);
    put_matrix(out, "Kp", g.Kp);
    put_matrix(out, "KI", g.KI);
}

GainSet load_gains(std::istream& in) {
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "ibc-gains" || version != 1) {
        throw DesignError("gain file: unrecognized header");
    }

    GainSet g;
    std::string key;
    while (in >> key) {
        if (key == "n") {
            in >> g.n;
        } else if (key == "lift_steps") {
            in >> g.lift_steps;
        } else if (key == "sigma") {
            in >> g.sigma;
        } else if (key == "p1") {
            std::string v;
            in >> v;
            if (v == "-inf") {
                g.p1.reset();
            } else {
                g.p1 = std::stod(v);
            }
        } else if (key == "p2") {
            in >> g.p2;
        } else if (key == "eps_nominal") {
            in >> g.eps_nominal;
        } else if (key == "rel_density_nominal") {
            in >> g.rel_density_nominal;
        } else if (key == "riccati_iterations") {
            in >> g.riccati_iterations;
        } else if (key == "riccati_residual") {
            in >> g.riccati_residual;
        } else if (key == "matrix") {
            // Rewind the consumed tag and read the matrices in order.
            for (auto it = key.rbegin(); it != key.rend(); ++it) in.putback(*it);
            g.K = take_matrix(in, "K");
            g.K1 = take_matrix(in, "K1");
            g.K2 = take_matrix(in, "K2");
            g.Kp = take_matrix(in, "Kp");
            g.KI = take_matrix(in, "KI");
            break;
        } else {
            throw DesignError("gain file: unknown key " + key);
        }
        if (!in) throw DesignError("gain file: malformed value for " + key);
    }
    if (g.n <= 0 || g.K.rows() != g.n || g.K.cols() != 4 * g.n) {
        throw DesignError("gain file: missing or inconsistent matrices");
    }
    return g;
}

GainSet load_gains_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DesignError("cannot open gain file: " + path);
    return load_gains(in);
}

}  // namespace ibc
