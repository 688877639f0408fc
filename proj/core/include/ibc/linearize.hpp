#pragma once

#include <utility>

#include <Eigen/Dense>

#include "ibc/scenario.hpp"

namespace ibc {

/// Operating point the design model is linearized at. Disturbance vectors
/// follow the state-equation packing: demand_a = [q0_a, r2_a, ..., rn_a],
/// demand_b = [r1_b, ..., r(n-1)_b, q(n+1)_b], zero where a section has no
/// ramp.
struct NominalPoint {
    Eigen::VectorXd rel_density_a;  ///< dimensionless, per section
    Eigen::VectorXd rel_density_b;
    Eigen::VectorXd eps;            ///< nominal sharing factors
    Eigen::VectorXd gamma;          ///< nominal retarded sharing factors (= eps at steady state)
    Eigen::VectorXd demand_a;       ///< veh/h
    Eigen::VectorXd demand_b;
    double sigma = 0.95;            ///< convex combination weight of the capacity flow term
};

NominalPoint nominal_from_scenario(const Scenario& scenario, double sigma);

/// rho / (eps_prev * rho_cr) for direction a; the complement share divides
/// for direction b. eps_prev strictly inside (0,1).
double relative_density(double rho, double eps_prev, double rho_cr, Direction dir);

/// Design-model state layout: x = [rel_a; rel_b; gamma], 3n entries.
/// One step of the smooth surrogate dynamics: conservation written in
/// relative densities with the retarded input gamma, flows taken as the
/// sigma-weighted combination of capacity flow and the FD flow-density
/// relation, and gamma(k+1) = eps(k).
Eigen::VectorXd nonlinear_step(const Scenario& scenario, const Eigen::VectorXd& state, const Eigen::VectorXd& eps,
                               const Eigen::VectorXd& demand_a, const Eigen::VectorXd& demand_b, double sigma);

/// Linear design model around a nominal point; state and input matrices at
/// model-step resolution plus their control-step lifted versions.
struct LinearModel {
    Eigen::MatrixXd A;         ///< 3n x 3n
    Eigen::MatrixXd B;         ///< 3n x n; the gamma rows take eps with unit gain
    Eigen::MatrixXd A_lifted;  ///< A^M
    Eigen::MatrixXd B_lifted;  ///< (A^(M-1) + ... + I) B
    int n = 0;
    int lift_steps = 1;        ///< M
};

/// Closed-form Jacobians of nonlinear_step at the nominal point. The lifted
/// members are left equal to (A, B) until lift_to_control_step runs.
LinearModel analytic_jacobians(const Scenario& scenario, const NominalPoint& nominal);

/// Central finite differences of nonlinear_step with step h; the test oracle
/// for analytic_jacobians. Returns (A, B).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> fd_jacobians(const Scenario& scenario, const NominalPoint& nominal,
                                                         double h);

/// Rebases the model on the control step: A^M and the geometric-sum input
/// matrix, by repeated multiplication.
void lift_to_control_step(LinearModel& model, int lift_steps);

/// Numerical controllability of (A, B): the controllability matrix has full
/// row rank, judged by singular values relative to the largest one.
bool is_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double rel_tol = 1e-8);

/// Writes matrices in the delimiter-separated text convention (one row per
/// line, 17 significant digits) for debugging gain design.
void write_matrix(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m);

}  // namespace ibc
