#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ibc/model.hpp"
#include "support/reference.hpp"

using namespace ibc;

namespace {

// Nominal (whole-road) triangular FD, the scaling-law oracle.
double nominal_fd(const ModelParams& p, double rho) {
    return std::max(0.0, std::min(p.free_speed * rho,
                                  std::min(p.capacity, p.backwave_speed * (p.jam_density - rho))));
}

}  // namespace

TEST_SUITE("model_core") {

TEST_CASE("directional FD scaling") {
    const ModelParams p = test::reference_params();

    const DirectionalFd a = fd_params_for_direction(p, SharingFactor(0.5), Direction::a);
    CHECK(a.capacity == doctest::Approx(6000.0));
    CHECK(a.critical_density == doctest::Approx(60.0));
    CHECK(a.jam_density == doctest::Approx(560.0));

    const DirectionalFd b = fd_params_for_direction(p, SharingFactor(0.3), Direction::b);
    CHECK(b.capacity == doctest::Approx(8400.0));
    CHECK(b.critical_density == doctest::Approx(84.0));
    CHECK(b.jam_density == doctest::Approx(784.0));

    // Identity scaling in the eps -> 1 limit.
    const DirectionalFd full = fd_params_for_direction(p, SharingFactor(1.0 - 1e-12), Direction::a);
    CHECK(full.capacity == doctest::Approx(p.capacity));
    CHECK(full.critical_density == doctest::Approx(p.critical_density));
    CHECK(full.jam_density == doctest::Approx(p.jam_density));
}

TEST_CASE("sharing factor domain") {
    CHECK_THROWS_AS(SharingFactor(0.0), ModelError);
    CHECK_THROWS_AS(SharingFactor(1.0), ModelError);
    CHECK_THROWS_AS(SharingFactor(-0.2), ModelError);
    CHECK_THROWS_AS(SharingFactor(1.7), ModelError);
    CHECK(SharingFactor(0.16).share(Direction::b) == doctest::Approx(0.84));
}

TEST_CASE("complementary split across directions") {
    const ModelParams p = test::reference_params();
    test::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const SharingFactor eps(rng.uniform(0.01, 0.99));
        const DirectionalFd a = fd_params_for_direction(p, eps, Direction::a);
        const DirectionalFd b = fd_params_for_direction(p, eps, Direction::b);
        CHECK(a.capacity + b.capacity == doctest::Approx(p.capacity));
        CHECK(a.critical_density + b.critical_density == doctest::Approx(p.critical_density));
        CHECK(a.jam_density + b.jam_density == doctest::Approx(p.jam_density));
    }
}

TEST_CASE("demand function") {
    ModelParams p = test::reference_params();

    SUBCASE("no capacity drop") {
        p.lambda_ramp = 1.0;
        p.lambda_demand = 0.0;
        CHECK(demand_flow(p, 60.0, 0.5) == doctest::Approx(6000.0));
        CHECK(demand_flow(p, 0.0, 0.5) == doctest::Approx(0.0));
        CHECK(demand_flow(p, 0.0, 0.16) == doctest::Approx(0.0));

        // Non-decreasing on the under-critical branch, capacity at critical.
        double prev = -1.0;
        for (int j = 0; j <= 100; ++j) {
            const double rho = 60.0 * j / 100.0;
            const double q = demand_flow(p, rho, 0.5);
            CHECK(q >= prev);
            prev = q;
        }
        CHECK(prev == doctest::Approx(6000.0));
    }

    SUBCASE("capacity drop shrinks the over-critical discharge") {
        CHECK(demand_flow(p, 70.0, 0.5) == doctest::Approx(5952.0));
        CHECK(demand_flow(p, 60.0, 0.5) == doctest::Approx(6000.0));
        CHECK(demand_flow(p, 100.0, 0.5) < 6000.0);
    }
}

TEST_CASE("supply function") {
    const ModelParams p = test::reference_params();
    CHECK(supply_flow(p, 60.0, 0.5) == doctest::Approx(6000.0));
    CHECK(supply_flow(p, 0.5 * p.jam_density, 0.5) == doctest::Approx(0.0));
    CHECK(supply_flow(p, 600.0, 0.5) == doctest::Approx(0.0));

    // Equals the scaled capacity up to the scaled critical density, then
    // non-increasing.
    test::Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const double eps = rng.uniform(0.05, 0.95);
        const double rho_under = rng.uniform(0.0, eps * p.critical_density);
        CHECK(supply_flow(p, rho_under, eps) == doctest::Approx(eps * p.capacity));
    }
    double prev = supply_flow(p, 0.0, 0.5);
    for (int j = 1; j <= 200; ++j) {
        const double rho = p.jam_density * j / 200.0;
        const double q = supply_flow(p, rho, 0.5);
        CHECK(q <= prev + 1e-12);
        prev = q;
    }
}

TEST_CASE("scaling law: min(demand, supply) matches the scaled nominal FD") {
    ModelParams p = test::reference_params();
    p.lambda_ramp = 1.0;
    p.lambda_demand = 0.0;

    for (const double eps : {0.16, 0.3, 0.5, 0.77}) {
        for (int j = 0; j <= 120; ++j) {
            const double rho = eps * p.jam_density * j / 120.0;
            const double flow = std::min(demand_flow(p, rho, eps), supply_flow(p, rho, eps));
            CHECK(flow == doctest::Approx(eps * nominal_fd(p, rho / eps)).epsilon(1e-12));
        }
    }
}

TEST_CASE("parameter validation") {
    ModelParams p = test::reference_params();
    CHECK_NOTHROW(validate(p));
    CHECK(p.steps_per_control() == 6);

    SUBCASE("apex inconsistency") {
        p.capacity = 11000.0;
        CHECK_THROWS_AS(validate(p), ModelError);
    }
    SUBCASE("congested-branch inconsistency") {
        p.backwave_speed = 13.0;
        CHECK_THROWS_AS(validate(p), ModelError);
    }
    SUBCASE("control step not a multiple") {
        p.control_step = 2.5 * p.model_step;
        CHECK_THROWS_AS(validate(p), ModelError);
    }
    SUBCASE("capacity drop pair") {
        p.lambda_ramp = 1.0;
        p.lambda_demand = 0.4;
        CHECK_THROWS_AS(validate(p), ModelError);
        p.lambda_ramp = 0.7;
        p.lambda_demand = 0.0;
        CHECK_THROWS_AS(validate(p), ModelError);
        p.lambda_ramp = 1.0;
        CHECK_NOTHROW(validate(p));
    }
}

}  // TEST_SUITE
