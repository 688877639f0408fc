#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ibc/design.hpp"
#include "ibc/simulation.hpp"

namespace ibc {

/// Regulator memory between control steps. eps_prev always holds the
/// truncated previous command (anti-windup), which also serves as the
/// retarded input gamma inside the measurement vector.
struct RegulatorState {
    Eigen::VectorXd eps_prev;  ///< truncated command of the previous control step
    Eigen::VectorXd x_prev;    ///< previous measurement vector [rel_a; rel_b; gamma]
    bool has_prev = false;     ///< false until the first measurement is seen
};

/// Fresh state at the nominal sharing factors; the first step then uses the
/// current measurement for both x(k_c) and x(k_c - 1), so the proportional
/// term vanishes there.
RegulatorState initial_regulator_state(const GainSet& gains);

struct RegulatorOutput {
    std::vector<double> eps_cmd;
    int truncations = 0;  ///< sections whose raw command was clamped
};

/// One control step of the differential-form regulator:
///   eps = eps_prev - Kp (x - x_prev) - KI (rel_a - rel_b),
/// truncated into [eps_min, eps_max]. Relative densities are measured
/// against eps_prev. The truncated value is stored back as eps_prev. Purely
/// reactive: consumes only density measurements and its own state.
RegulatorOutput regulator_step(RegulatorState& state, const GainSet& gains, const std::vector<double>& rho_a,
                               const std::vector<double>& rho_b, const std::vector<double>& eps_min,
                               const std::vector<double>& eps_max, double critical_density);

/// Closed loop against the CTM plant: every control step measure the
/// instantaneous densities, run the regulator (from activation_step on;
/// before that the command is held at the nominal value), apply the
/// evacuation delay and hold the applied factors for the control interval.
/// activation_step equal to the number of control steps never activates.
SimulationTrace run_closed_loop(const Scenario& scenario, const GainSet& gains, int activation_step = 0);

}  // namespace ibc
