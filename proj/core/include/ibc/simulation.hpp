#pragma once

#include <iosfwd>
#include <vector>

#include "ibc/scenario.hpp"

namespace ibc {

/// Plant state at one model instant.
struct TrafficState {
    std::vector<double> rho_a;     ///< veh/km per section
    std::vector<double> rho_b;     ///< veh/km per section
    std::vector<double> eps_prev;  ///< commanded sharing factors of the previous control step
};

/// Sharing factors actually applied over one control interval. The direction
/// being widened sees the change one interval late; the direction being
/// narrowed applies it immediately, so eps_a + eps_b <= 1 with equality iff
/// the command did not change.
struct AppliedSharing {
    std::vector<double> eps_a;
    std::vector<double> eps_b;
};

AppliedSharing apply_delay(const std::vector<double>& eps_now, const std::vector<double>& eps_prev);

/// External inflows sampled at one model instant.
struct StepDemands {
    double mainstream_a = 0.0;      ///< veh/h entering section 1 of direction a
    double mainstream_b = 0.0;      ///< veh/h entering section n of direction b
    std::vector<double> onramp_a;   ///< veh/h per section (0 where no ramp)
    std::vector<double> onramp_b;
};

StepDemands sample_demands(const Scenario& scenario, int step);

/// Mainstream exit flows per section and direction, each the minimum of the
/// local demand function and the downstream supply (ramp space reserved),
/// clamped at zero. The last section of each direction is demand-only.
struct FlowPair {
    std::vector<double> a;
    std::vector<double> b;
};

FlowPair compute_flows(const Scenario& scenario, const std::vector<double>& rho_a, const std::vector<double>& rho_b,
                       const std::vector<double>& eps_a, const std::vector<double>& eps_b,
                       const StepDemands& demands);

/// Advances both density vectors by one conservation step. Negative results
/// signal a CFL or clamping bug and throw; values inside a -1e-9 roundoff
/// band are snapped to zero.
void advance_densities(const Scenario& scenario, const FlowPair& flows, const StepDemands& demands,
                       std::vector<double>& rho_a, std::vector<double>& rho_b);

/// Everything applied or computed during one model step.
struct StepRecord {
    std::vector<double> flow_a;
    std::vector<double> flow_b;
    std::vector<double> eps_cmd;
    std::vector<double> eps_applied_a;
    std::vector<double> eps_applied_b;
};

/// Time-indexed record of one run: K+1 density states and K step records.
struct SimulationTrace {
    std::vector<std::vector<double>> states_a;  ///< densities per instant, size K+1
    std::vector<std::vector<double>> states_b;
    std::vector<StepRecord> steps;              ///< size K
    double total_time_spent = 0.0;              ///< veh*h
    int saturation_count = 0;                   ///< regulator truncation events (closed loop only)
};

/// Total Time Spent, T * sum_{k=1..K} sum_i L_i (rho_a_i(k) + rho_b_i(k)).
double tts(const Scenario& scenario, const SimulationTrace& trace);

/// Largest relative density over the whole run (both directions), with each
/// state k >= 1 measured against the sharing factors commanded for the step
/// that produced it. > 1 indicates congestion somewhere at some time.
double max_relative_density(const Scenario& scenario, const SimulationTrace& trace);

/// Runs the plant under a given schedule of commanded sharing factors, one
/// vector per control step. The first control step sees no evacuation delay
/// (the pre-horizon command is taken equal to the first entry). Deterministic:
/// identical inputs produce bit-identical traces.
SimulationTrace run_open_loop(const Scenario& scenario, const std::vector<std::vector<double>>& eps_schedule);

/// Schedule holding every section at the same constant sharing factor.
std::vector<std::vector<double>> constant_schedule(const Scenario& scenario, double eps);

/// Writes the documented trace text format: header line, then one comma-
/// separated row per (model step, section) with columns
/// k,i,rho_a,rho_b,q_a,q_b,eps_cmd,eps_applied_a,eps_applied_b.
/// Row k carries the state at instant k and the flows/sharing factors of the
/// step [k, k+1); numbers use 9 significant digits.
void write_trace(std::ostream& out, const SimulationTrace& trace);

}  // namespace ibc
