#include "ibc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace ibc {

namespace {

void check_unit_interval(const std::vector<double>& eps, const char* what) {
    for (double e : eps) {
        if (!(e > 0.0 && e < 1.0)) {
            std::ostringstream msg;
            msg << what << " value " << e << " outside (0,1)";
            throw ModelError(msg.str());
        }
    }
}

}  // namespace

AppliedSharing apply_delay(const std::vector<double>& eps_now, const std::vector<double>& eps_prev) {
    check_unit_interval(eps_now, "commanded sharing factor");
    check_unit_interval(eps_prev, "previous sharing factor");
    const std::size_t n = eps_now.size();
    AppliedSharing out;
    out.eps_a.resize(n);
    out.eps_b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.eps_a[i] = std::min(eps_now[i], eps_prev[i]);
        out.eps_b[i] = std::min(1.0 - eps_now[i], 1.0 - eps_prev[i]);
    }
    return out;
}

StepDemands sample_demands(const Scenario& sc, int step) {
    const double t = step * sc.params.model_step;
    const int n = sc.section_count();
    StepDemands d;
    d.mainstream_a = sc.dir_a.mainstream_demand.at(t);
    d.mainstream_b = sc.dir_b.mainstream_demand.at(t);
    d.onramp_a.assign(static_cast<std::size_t>(n), 0.0);
    d.onramp_b.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!sc.dir_a.onramp_demand[idx].empty()) d.onramp_a[idx] = sc.dir_a.onramp_demand[idx].at(t);
        if (!sc.dir_b.onramp_demand[idx].empty()) d.onramp_b[idx] = sc.dir_b.onramp_demand[idx].at(t);
    }
    return d;
}

FlowPair compute_flows(const Scenario& sc, const std::vector<double>& rho_a, const std::vector<double>& rho_b,
                       const std::vector<double>& eps_a, const std::vector<double>& eps_b,
                       const StepDemands& demands) {
    const ModelParams& p = sc.params;
    const int n = sc.section_count();
    FlowPair q;
    q.a.resize(static_cast<std::size_t>(n));
    q.b.resize(static_cast<std::size_t>(n));

    // Direction a travels towards increasing section index.
    for (int i = 0; i < n - 1; ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double demand = demand_flow(p, rho_a[s], eps_a[s]);
        const double supply = supply_flow(p, rho_a[s + 1], eps_a[s + 1]) / (1.0 - sc.dir_a.exit_rates[s + 1]) -
                              p.lambda_ramp * demands.onramp_a[s + 1];
        q.a[s] = std::max(0.0, std::min(demand, supply));
    }
    q.a[static_cast<std::size_t>(n - 1)] =
        std::max(0.0, demand_flow(p, rho_a[static_cast<std::size_t>(n - 1)], eps_a[static_cast<std::size_t>(n - 1)]));

    // Direction b travels towards decreasing section index.
    for (int i = n - 1; i >= 1; --i) {
        const auto s = static_cast<std::size_t>(i);
        const double demand = demand_flow(p, rho_b[s], eps_b[s]);
        const double supply = supply_flow(p, rho_b[s - 1], eps_b[s - 1]) / (1.0 - sc.dir_b.exit_rates[s - 1]) -
                              p.lambda_ramp * demands.onramp_b[s - 1];
        q.b[s] = std::max(0.0, std::min(demand, supply));
    }
    q.b[0] = std::max(0.0, demand_flow(p, rho_b[0], eps_b[0]));

    return q;
}

void advance_densities(const Scenario& sc, const FlowPair& flows, const StepDemands& demands,
                       std::vector<double>& rho_a, std::vector<double>& rho_b) {
    const int n = sc.section_count();
    const double T = sc.params.model_step;

    rho_a[0] += T / sc.lengths[0] * (demands.mainstream_a - flows.a[0]);
    for (int i = 1; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        rho_a[s] += T / sc.lengths[s] *
                    ((1.0 - sc.dir_a.exit_rates[s]) * flows.a[s - 1] - flows.a[s] + demands.onramp_a[s]);
    }

    rho_b[static_cast<std::size_t>(n - 1)] +=
        T / sc.lengths[static_cast<std::size_t>(n - 1)] *
        (demands.mainstream_b - flows.b[static_cast<std::size_t>(n - 1)]);
    for (int i = n - 2; i >= 0; --i) {
        const auto s = static_cast<std::size_t>(i);
        rho_b[s] += T / sc.lengths[s] *
                    ((1.0 - sc.dir_b.exit_rates[s]) * flows.b[s + 1] - flows.b[s] + demands.onramp_b[s]);
    }

    for (int i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        if (rho_a[s] < -1e-9 || rho_b[s] < -1e-9) {
            std::ostringstream msg;
            msg << "negative density in section " << i + 1 << " (a=" << rho_a[s] << ", b=" << rho_b[s]
                << "): CFL or flow clamping violated";
            throw ModelError(msg.str());
        }
        rho_a[s] = std::max(0.0, rho_a[s]);
        rho_b[s] = std::max(0.0, rho_b[s]);
    }
}

double tts(const Scenario& sc, const SimulationTrace& trace) {
    const int n = sc.section_count();
    double sum = 0.0;
    for (std::size_t k = 1; k < trace.states_a.size(); ++k) {
        for (int i = 0; i < n; ++i) {
            const auto s = static_cast<std::size_t>(i);
            sum += sc.lengths[s] * (trace.states_a[k][s] + trace.states_b[k][s]);
        }
    }
    return sc.params.model_step * sum;
}

double max_relative_density(const Scenario& sc, const SimulationTrace& trace) {
    const int n = sc.section_count();
    double worst = 0.0;
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const auto& cmd = trace.steps[k].eps_cmd;
        for (int i = 0; i < n; ++i) {
            const auto s = static_cast<std::size_t>(i);
            const double rel_a = trace.states_a[k + 1][s] / (cmd[s] * sc.params.critical_density);
            const double rel_b = trace.states_b[k + 1][s] / ((1.0 - cmd[s]) * sc.params.critical_density);
            worst = std::max({worst, rel_a, rel_b});
        }
    }
    return worst;
}

std::vector<std::vector<double>> constant_schedule(const Scenario& sc, double eps) {
    return std::vector<std::vector<double>>(
        static_cast<std::size_t>(sc.control_steps()),
        std::vector<double>(static_cast<std::size_t>(sc.section_count()), eps));
}

SimulationTrace run_open_loop(const Scenario& sc, const std::vector<std::vector<double>>& eps_schedule) {
    const int steps = sc.horizon_steps;
    const int per_control = sc.params.steps_per_control();
    if (static_cast<int>(eps_schedule.size()) != sc.control_steps()) {
        throw ModelError("schedule length must equal the number of control steps");
    }

    SimulationTrace trace;
    trace.states_a.reserve(static_cast<std::size_t>(steps) + 1);
    trace.states_b.reserve(static_cast<std::size_t>(steps) + 1);
    trace.steps.reserve(static_cast<std::size_t>(steps));

    std::vector<double> rho_a = sc.dir_a.initial_density;
    std::vector<double> rho_b = sc.dir_b.initial_density;
    std::vector<double> eps_prev = eps_schedule.front();
    trace.states_a.push_back(rho_a);
    trace.states_b.push_back(rho_b);

    AppliedSharing applied;
    for (int k = 0; k < steps; ++k) {
        const auto kc = static_cast<std::size_t>(k / per_control);
        const std::vector<double>& cmd = eps_schedule[kc];
        if (k % per_control == 0) {
            applied = apply_delay(cmd, eps_prev);
        }
        if (k % per_control == per_control - 1) {
            // The command becomes "previous" once its control interval ends.
            eps_prev = cmd;
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

void write_trace(std::ostream& out, const SimulationTrace& trace) {
    out << "k,i,rho_a,rho_b,q_a,q_b,eps_cmd,eps_applied_a,eps_applied_b\n";
    char buf[64];
    const auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.9g", v);
        return std::string(buf);
    };
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const StepRecord& rec = trace.steps[k];
        for (std::size_t i = 0; i < rec.flow_a.size(); ++i) {
            out << k << ',' << i + 1 << ',' << num(trace.states_a[k][i]) << ',' << num(trace.states_b[k][i]) << ','
                << num(rec.flow_a[i]) << ',' << num(rec.flow_b[i]) << ',' << num(rec.eps_cmd[i]) << ','
                << num(rec.eps_applied_a[i]) << ',' << num(rec.eps_applied_b[i]) << '\n';
        }
    }
}

}  // namespace ibc
