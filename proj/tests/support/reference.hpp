#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ibc/scenario.hpp"

namespace ibc::test {

/// The 3 km / 6 section reference configuration used throughout the tests:
/// v_f = 100 km/h, w_s = 12 km/h, q_cap = 12000 veh/h, rho_cr = 120 veh/km,
/// rho_max = 1120 veh/km, T = 10 s, T_c = 60 s, capacity drop (0.7, 0.4).
inline ModelParams reference_params() {
    ModelParams p;
    p.free_speed = 100.0;
    p.backwave_speed = 12.0;
    p.capacity = 12000.0;
    p.critical_density = 120.0;
    p.jam_density = 1120.0;
    p.lambda_ramp = 0.7;
    p.lambda_demand = 0.4;
    p.model_step = 1.0 / 360.0;
    p.control_step = 1.0 / 60.0;
    return p;
}

/// Reference topology with flat demands: off-ramp a at section 2, on-ramp a
/// at section 5, on-ramp b at section 3, off-ramp b at section 4, exit rates
/// 0.1, nominal design demands 5000/1000. Callers adjust profiles as needed.
inline Scenario reference_scenario(double mainstream_a = 2000.0, double mainstream_b = 2000.0,
                                   double ramp_a = 500.0, double ramp_b = 500.0, int horizon = 360) {
    const int n = 6;
    Scenario sc;
    sc.name = "reference";
    sc.params = reference_params();
    sc.drop_lambda_ramp = 0.7;
    sc.drop_lambda_demand = 0.4;
    sc.lengths.assign(n, 0.5);
    sc.horizon_steps = horizon;

    sc.dir_a.mainstream_demand = PiecewiseLinear::constant(mainstream_a);
    sc.dir_a.exit_rates.assign(n, 0.0);
    sc.dir_a.exit_rates[1] = 0.1;
    sc.dir_a.onramp_demand.resize(n);
    sc.dir_a.onramp_demand[4] = PiecewiseLinear::constant(ramp_a);
    sc.dir_a.initial_density.assign(n, 5.0);

    sc.dir_b.mainstream_demand = PiecewiseLinear::constant(mainstream_b);
    sc.dir_b.exit_rates.assign(n, 0.0);
    sc.dir_b.exit_rates[3] = 0.1;
    sc.dir_b.onramp_demand.resize(n);
    sc.dir_b.onramp_demand[2] = PiecewiseLinear::constant(ramp_b);
    sc.dir_b.initial_density.assign(n, 5.0);

    sc.eps_min.assign(n, 0.16);
    sc.eps_max.assign(n, 0.84);

    sc.design.rel_density = 1.0;
    sc.design.eps = 0.5;
    sc.design.mainstream_a = 5000.0;
    sc.design.mainstream_b = 5000.0;
    sc.design.onramp_a.assign(n, 0.0);
    sc.design.onramp_b.assign(n, 0.0);
    sc.design.onramp_a[4] = 1000.0;
    sc.design.onramp_b[2] = 1000.0;
    return sc;
}

inline std::string scenario_path(const std::string& file) {
    return std::string(IBC_SCENARIO_DIR) + "/" + file;
}

/// Deterministic xorshift-style generator for property tests; avoids the
/// implementation-defined standard distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform(double lo, double hi) {
        const double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return lo + u * (hi - lo);
    }

private:
    std::uint64_t state_;
};

}  // namespace ibc::test
