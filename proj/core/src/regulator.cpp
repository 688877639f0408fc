#include "ibc/regulator.hpp"

#include <algorithm>

namespace ibc {

RegulatorState initial_regulator_state(const GainSet& gains) {
    RegulatorState st;
    st.eps_prev = Eigen::VectorXd::Constant(gains.n, gains.eps_nominal);
    st.x_prev = Eigen::VectorXd::Zero(3 * gains.n);
    st.has_prev = false;
    return st;
}

RegulatorOutput regulator_step(RegulatorState& state, const GainSet& gains, const std::vector<double>& rho_a,
                               const std::vector<double>& rho_b, const std::vector<double>& eps_min,
                               const std::vector<double>& eps_max, double critical_density) {
    const int n = gains.n;

    Eigen::VectorXd x(3 * n);
    for (int i = 0; i < n; ++i) {
        const double eps_prev = state.eps_prev(i);
        x(i) = rho_a[static_cast<std::size_t>(i)] / (eps_prev * critical_density);
        x(n + i) = rho_b[static_cast<std::size_t>(i)] / ((1.0 - eps_prev) * critical_density);
        x(2 * n + i) = eps_prev;  // gamma(k_c) = eps(k_c - 1), truncated value
    }
    if (!state.has_prev) {
        state.x_prev = x;
        state.has_prev = true;
    }

    const Eigen::VectorXd gap = x.segment(0, n) - x.segment(n, n);
    const Eigen::VectorXd raw = state.eps_prev - gains.Kp * (x - state.x_prev) - gains.KI * gap;

    RegulatorOutput out;
    out.eps_cmd.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double clamped =
            std::clamp(raw(i), eps_min[static_cast<std::size_t>(i)], eps_max[static_cast<std::size_t>(i)]);
        if (clamped != raw(i)) ++out.truncations;
        out.eps_cmd[static_cast<std::size_t>(i)] = clamped;
        state.eps_prev(i) = clamped;  // truncated value carried forward (anti-windup)
    }
    state.x_prev = x;
    return out;
}

SimulationTrace run_closed_loop(const Scenario& sc, const GainSet& gains, int activation_step) {
    const int n = sc.section_count();
    if (gains.n != n) throw DesignError("gain set designed for a different section count");
    const int steps = sc.horizon_steps;
    const int per_control = sc.params.steps_per_control();
    const int control_steps = sc.control_steps();
    if (activation_step < 0 || activation_step > control_steps) {
        throw DesignError("activation step outside 0..control_steps");
    }

    SimulationTrace trace;
    trace.states_a.reserve(static_cast<std::size_t>(steps) + 1);
    trace.states_b.reserve(static_cast<std::size_t>(steps) + 1);
    trace.steps.reserve(static_cast<std::size_t>(steps));

    std::vector<double> rho_a = sc.dir_a.initial_density;
    std::vector<double> rho_b = sc.dir_b.initial_density;
    trace.states_a.push_back(rho_a);
    trace.states_b.push_back(rho_b);

    RegulatorState reg = initial_regulator_state(gains);
    const std::vector<double> hold(static_cast<std::size_t>(n), gains.eps_nominal);
    std::vector<double> eps_prev_cmd = hold;
    std::vector<double> cmd = hold;
    AppliedSharing applied;

    for (int k = 0; k < steps; ++k) {
        if (k % per_control == 0) {
            const int kc = k / per_control;
            if (kc >= activation_step) {
                const RegulatorOutput out =
                    regulator_step(reg, gains, rho_a, rho_b, sc.eps_min, sc.eps_max, sc.params.critical_density);
                cmd = out.eps_cmd;
                trace.saturation_count += out.truncations;
            } else {
                cmd = hold;
            }
            applied = apply_delay(cmd, eps_prev_cmd);
        }
        if (k % per_control == per_control - 1) {
            eps_prev_cmd = cmd;
        }

        const StepDemands demands = sample_demands(sc, k);
        const FlowPair flows = compute_flows(sc, rho_a, rho_b, applied.eps_a, applied.eps_b, demands);
        advance_densities(sc, flows, demands, rho_a, rho_b);

        trace.steps.push_back(StepRecord{flows.a, flows.b, cmd, applied.eps_a, applied.eps_b});
        trace.states_a.push_back(rho_a);
        trace.states_b.push_back(rho_b);
    }

    trace.total_time_spent = tts(sc, trace);
    return trace;
}

}  // namespace ibc
