#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ibc/simulation.hpp"
#include "support/reference.hpp"

using namespace ibc;

namespace {

// Minimal n-section scenario with flat demands and no ramps.
Scenario plain_scenario(int n, double mainstream_a, double mainstream_b, int horizon) {
    Scenario sc;
    sc.name = "plain";
    sc.params = test::reference_params();
    sc.params.lambda_ramp = 1.0;
    sc.params.lambda_demand = 0.0;
    sc.drop_lambda_ramp = 1.0;
    sc.drop_lambda_demand = 0.0;
    sc.lengths.assign(n, 0.5);
    sc.horizon_steps = horizon;
    sc.dir_a.mainstream_demand = PiecewiseLinear::constant(mainstream_a);
    sc.dir_a.exit_rates.assign(n, 0.0);
    sc.dir_a.onramp_demand.resize(n);
    sc.dir_a.initial_density.assign(n, 0.0);
    sc.dir_b.mainstream_demand = PiecewiseLinear::constant(mainstream_b);
    sc.dir_b.exit_rates.assign(n, 0.0);
    sc.dir_b.onramp_demand.resize(n);
    sc.dir_b.initial_density.assign(n, 0.0);
    sc.eps_min.assign(n, 0.16);
    sc.eps_max.assign(n, 0.84);
    sc.design.mainstream_a = mainstream_a;
    sc.design.mainstream_b = mainstream_b;
    sc.design.onramp_a.assign(n, 0.0);
    sc.design.onramp_b.assign(n, 0.0);
    return sc;
}

StepDemands zero_demands(int n) {
    StepDemands d;
    d.onramp_a.assign(n, 0.0);
    d.onramp_b.assign(n, 0.0);
    return d;
}

// Net vehicle balance of one recorded step, recomputed from scenario data.
double boundary_balance(const Scenario& sc, const SimulationTrace& trace, std::size_t k) {
    const int n = sc.section_count();
    const StepDemands d = sample_demands(sc, static_cast<int>(k));
    const StepRecord& rec = trace.steps[k];

    double inflow = d.mainstream_a + d.mainstream_b;
    for (int i = 0; i < n; ++i) inflow += d.onramp_a[i] + d.onramp_b[i];

    double outflow = rec.flow_a[static_cast<std::size_t>(n - 1)] + rec.flow_b[0];
    for (int i = 1; i < n; ++i) {
        outflow += sc.dir_a.exit_rates[static_cast<std::size_t>(i)] * rec.flow_a[static_cast<std::size_t>(i - 1)];
    }
    for (int i = 0; i < n - 1; ++i) {
        outflow += sc.dir_b.exit_rates[static_cast<std::size_t>(i)] * rec.flow_b[static_cast<std::size_t>(i + 1)];
    }
    return sc.params.model_step * (inflow - outflow);
}

double stored_vehicles(const Scenario& sc, const SimulationTrace& trace, std::size_t k) {
    double total = 0.0;
    for (int i = 0; i < sc.section_count(); ++i) {
        total += sc.lengths[static_cast<std::size_t>(i)] *
                 (trace.states_a[k][static_cast<std::size_t>(i)] + trace.states_b[k][static_cast<std::size_t>(i)]);
    }
    return total;
}

}  // namespace

TEST_SUITE("ctm_sim") {

TEST_CASE("evacuation delay") {
    SUBCASE("widening a is retarded, narrowing b is immediate") {
        const AppliedSharing applied = apply_delay({0.6}, {0.5});
        CHECK(applied.eps_a[0] == doctest::Approx(0.5));
        CHECK(applied.eps_b[0] == doctest::Approx(0.4));
    }
    SUBCASE("no change, no delay") {
        const AppliedSharing applied = apply_delay({0.5}, {0.5});
        CHECK(applied.eps_a[0] == doctest::Approx(0.5));
        CHECK(applied.eps_b[0] == doctest::Approx(0.5));
    }
    SUBCASE("narrowing a is immediate, widening b is retarded") {
        const AppliedSharing applied = apply_delay({0.4}, {0.5});
        CHECK(applied.eps_a[0] == doctest::Approx(0.4));
        CHECK(applied.eps_b[0] == doctest::Approx(0.5));
    }
    SUBCASE("complementarity") {
        test::Rng rng(3);
        for (int trial = 0; trial < 300; ++trial) {
            const double now = rng.uniform(0.05, 0.95);
            const double prev = rng.uniform(0.05, 0.95);
            const AppliedSharing applied = apply_delay({now}, {prev});
            CHECK(applied.eps_a[0] + applied.eps_b[0] <= 1.0 + 1e-15);
            if (now == prev) CHECK(applied.eps_a[0] + applied.eps_b[0] == doctest::Approx(1.0));
        }
        const AppliedSharing same = apply_delay({0.37}, {0.37});
        CHECK(same.eps_a[0] + same.eps_b[0] == 1.0);
    }
    SUBCASE("rejects out-of-range factors") {
        CHECK_THROWS_AS(apply_delay({1.0}, {0.5}), ModelError);
        CHECK_THROWS_AS(apply_delay({0.5}, {0.0}), ModelError);
    }
}

TEST_CASE("flows: free-flow, empty and jammed cases") {
    const Scenario sc = plain_scenario(2, 0.0, 0.0, 1);
    const std::vector<double> eps{0.5, 0.5};

    SUBCASE("uniform free flow is demand-limited") {
        const FlowPair q = compute_flows(sc, {50.0, 50.0}, {0.0, 0.0}, eps, eps, zero_demands(2));
        CHECK(q.a[0] == doctest::Approx(5000.0));
        CHECK(q.a[1] == doctest::Approx(5000.0));
    }
    SUBCASE("empty network has zero flow") {
        const FlowPair q = compute_flows(sc, {0.0, 0.0}, {0.0, 0.0}, eps, eps, zero_demands(2));
        CHECK(q.a[0] == 0.0);
        CHECK(q.a[1] == 0.0);
        CHECK(q.b[0] == 0.0);
        CHECK(q.b[1] == 0.0);
    }
    SUBCASE("jammed downstream section blocks the outflow") {
        const FlowPair q = compute_flows(sc, {50.0, 560.0}, {0.0, 0.0}, eps, eps, zero_demands(2));
        CHECK(q.a[0] == 0.0);
        // The jammed section still discharges through its demand function.
        CHECK(q.a[1] > 0.0);
    }
}

TEST_CASE("conservation step") {
    SUBCASE("single-section update") {
        const Scenario sc = plain_scenario(1, 4000.0, 0.0, 1);
        std::vector<double> rho_a{50.0}, rho_b{0.0};
        StepDemands d = zero_demands(1);
        d.mainstream_a = 4000.0;
        const FlowPair flows{{5000.0}, {0.0}};
        advance_densities(sc, flows, d, rho_a, rho_b);
        CHECK(rho_a[0] == doctest::Approx(50.0 - 1000.0 / 180.0).epsilon(1e-12));
        CHECK(rho_b[0] == 0.0);
    }
    SUBCASE("equilibrium stays put") {
        const Scenario sc = plain_scenario(2, 5000.0, 0.0, 1);
        std::vector<double> rho_a{50.0, 50.0}, rho_b{0.0, 0.0};
        StepDemands d = zero_demands(2);
        d.mainstream_a = 5000.0;
        const FlowPair flows{{5000.0, 5000.0}, {0.0, 0.0}};
        advance_densities(sc, flows, d, rho_a, rho_b);
        CHECK(rho_a[0] == doctest::Approx(50.0));
        CHECK(rho_a[1] == doctest::Approx(50.0));
    }
    SUBCASE("negative densities are a bug signal") {
        const Scenario sc = plain_scenario(1, 0.0, 0.0, 1);
        std::vector<double> rho_a{1.0}, rho_b{0.0};
        const FlowPair flows{{10000.0}, {0.0}};
        CHECK_THROWS_AS(advance_densities(sc, flows, zero_demands(1), rho_a, rho_b), ModelError);
    }
}

TEST_CASE("open-loop run: empty network") {
    Scenario sc = plain_scenario(6, 0.0, 0.0, 60);
    const SimulationTrace trace = run_open_loop(sc, constant_schedule(sc, 0.5));
    CHECK(trace.states_a.size() == 61);
    CHECK(trace.steps.size() == 60);
    CHECK(trace.total_time_spent == 0.0);
    for (const auto& state : trace.states_a) {
        for (double rho : state) CHECK(rho == 0.0);
    }
}

TEST_CASE("open-loop run: schedule length is checked") {
    Scenario sc = plain_scenario(2, 1000.0, 1000.0, 60);
    std::vector<std::vector<double>> schedule(3, std::vector<double>(2, 0.5));
    CHECK_THROWS_AS(run_open_loop(sc, schedule), ModelError);
}

TEST_CASE("tts: single held section") {
    // One section, both directions at 10 veh/km for one step of 10 s.
    Scenario sc = plain_scenario(1, 1000.0, 1000.0, 1);
    sc.dir_a.initial_density = {10.0};
    sc.dir_b.initial_density = {10.0};
    SimulationTrace trace = run_open_loop(sc, constant_schedule(sc, 0.5));
    // Equilibrium: inflow 1000 veh/h = v_f * 10, outflow likewise.
    CHECK(trace.states_a[1][0] == doctest::Approx(10.0));
    CHECK(trace.total_time_spent == doctest::Approx(10.0 / 360.0).epsilon(1e-12));
    CHECK(tts(sc, trace) == trace.total_time_spent);
}

TEST_CASE("vehicle conservation balance") {
    Scenario sc = test::reference_scenario(3000.0, 2500.0, 800.0, 400.0, 240);
    sc.dir_a.mainstream_demand =
        PiecewiseLinear({0.0, 0.2, 0.4, 0.6}, {2000.0, 5500.0, 5500.0, 1000.0});
    const SimulationTrace trace = run_open_loop(sc, constant_schedule(sc, 0.5));

    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
        const double delta = stored_vehicles(sc, trace, k + 1) - stored_vehicles(sc, trace, k);
        const double balance = boundary_balance(sc, trace, k);
        CHECK(std::abs(delta - balance) <=
              1e-9 * std::max(1.0, std::abs(stored_vehicles(sc, trace, k))));
    }
}

TEST_CASE("determinism: identical runs produce bit-identical traces") {
    const Scenario sc = test::reference_scenario(4500.0, 4000.0, 900.0, 600.0, 240);
    const SimulationTrace t1 = run_open_loop(sc, constant_schedule(sc, 0.5));
    const SimulationTrace t2 = run_open_loop(sc, constant_schedule(sc, 0.5));
    CHECK(t1.total_time_spent == t2.total_time_spent);
    CHECK(t1.states_a == t2.states_a);
    CHECK(t1.states_b == t2.states_b);
    for (std::size_t k = 0; k < t1.steps.size(); ++k) {
        CHECK(t1.steps[k].flow_a == t2.steps[k].flow_a);
        CHECK(t1.steps[k].flow_b == t2.steps[k].flow_b);
    }
}

TEST_CASE("mirror symmetry under symmetric inputs") {
    const int n = 6;
    Scenario sc = plain_scenario(n, 0.0, 0.0, 300);
    sc.params = test::reference_params();  // capacity drop on
    const PiecewiseLinear demand({0.0, 0.1, 0.3, 0.5}, {2000.0, 5800.0, 5800.0, 1200.0});
    sc.dir_a.mainstream_demand = demand;
    sc.dir_b.mainstream_demand = demand;
    // Ramp at section 5 / off-ramp at section 2 for a; mirrored for b.
    sc.dir_a.onramp_demand[4] = PiecewiseLinear::constant(900.0);
    sc.dir_a.exit_rates[1] = 0.1;
    sc.dir_b.onramp_demand[1] = PiecewiseLinear::constant(900.0);
    sc.dir_b.exit_rates[4] = 0.1;
    sc.dir_a.initial_density = {5.0, 6.0, 7.0, 8.0, 9.0, 10.0};
    sc.dir_b.initial_density = {10.0, 9.0, 8.0, 7.0, 6.0, 5.0};

    const SimulationTrace trace = run_open_loop(sc, constant_schedule(sc, 0.5));
    for (std::size_t k = 0; k < trace.states_a.size(); ++k) {
        for (int i = 0; i < n; ++i) {
            CHECK(trace.states_a[k][static_cast<std::size_t>(i)] ==
                  trace.states_b[k][static_cast<std::size_t>(n - 1 - i)]);
        }
    }
}

TEST_CASE("flows never exceed the shared capacity without capacity drop") {
    Scenario sc = test::reference_scenario(5800.0, 5600.0, 1000.0, 800.0, 300);
    sc.params.lambda_ramp = 1.0;
    sc.params.lambda_demand = 0.0;
    const SimulationTrace trace = run_open_loop(sc, constant_schedule(sc, 0.5));
    for (const StepRecord& rec : trace.steps) {
        for (int i = 0; i < sc.section_count(); ++i) {
            const auto s = static_cast<std::size_t>(i);
            CHECK(rec.flow_a[s] >= 0.0);
            CHECK(rec.flow_b[s] >= 0.0);
            CHECK(rec.flow_a[s] <= rec.eps_applied_a[s] * sc.params.capacity + 1e-9);
            CHECK(rec.flow_b[s] <= rec.eps_applied_b[s] * sc.params.capacity + 1e-9);
        }
    }
}

TEST_CASE("trace export format") {
    Scenario sc = plain_scenario(2, 1800.0, 900.0, 12);
    const SimulationTrace trace = run_open_loop(sc, constant_schedule(sc, 0.5));
    std::ostringstream out;
    write_trace(out, trace);

    std::istringstream in(out.str());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "k,i,rho_a,rho_b,q_a,q_b,eps_cmd,eps_applied_a,eps_applied_b");
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 12 * 2);
    // First data row: instant 0, section 1, empty initial state, eps 0.5.
    CHECK(out.str().find("\n0,1,0,0,0,0,0.5,0.5,0.5") != std::string::npos);
}

}  // TEST_SUITE
