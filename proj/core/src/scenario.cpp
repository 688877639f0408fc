#include "ibc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ibc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw ScenarioError(field + ": " + message);
}

double seconds_to_hours(double s) { return s / 3600.0; }

PiecewiseLinear parse_profile(const json& node, const std::string& field) {
    if (node.is_number()) {
        return PiecewiseLinear::constant(node.get<double>());
    }
    if (!node.is_array() || node.empty()) {
        fail(field, "expected a number or a non-empty list of [time_s, value] pairs");
    }
    std::vector<double> times, values;
    times.reserve(node.size());
    values.reserve(node.size());
    for (const auto& bp : node) {
        if (!bp.is_array() || bp.size() != 2 || !bp[0].is_number() || !bp[1].is_number()) {
            fail(field, "each breakpoint must be a [time_s, value] pair");
        }
        times.push_back(seconds_to_hours(bp[0].get<double>()));
        values.push_back(bp[1].get<double>());
    }
    if (!std::is_sorted(times.begin(), times.end())) {
        fail(field, "breakpoint times must be non-decreasing");
    }
    return PiecewiseLinear(std::move(times), std::move(values));
}

double require_number(const json& obj, const std::string& key, const std::string& scope) {
    if (!obj.contains(key) || !obj[key].is_number()) fail(scope + "." + key, "missing or not a number");
    return obj[key].get<double>();
}

std::vector<double> broadcast(const json& node, int n, const std::string& field) {
    std::vector<double> out;
    if (node.is_number()) {
        out.assign(static_cast<std::size_t>(n), node.get<double>());
    } else if (node.is_array() && static_cast<int>(node.size()) == n) {
        for (const auto& v : node) {
            if (!v.is_number()) fail(field, "expected numbers");
            out.push_back(v.get<double>());
        }
    } else {
        fail(field, "expected a number or a list with one entry per section");
    }
    return out;
}

// 1-based section index from the file, bounds-checked against n.
int parse_section_index(const json& node, int n, const std::string& field) {
    if (!node.is_number_integer()) fail(field, "section must be an integer");
    const int s = node.get<int>();
    if (s < 1 || s > n) fail(field, "section out of range 1.." + std::to_string(n));
    return s - 1;
}

DirectionConfig parse_direction(const json& node, int n, const std::string& scope) {
    DirectionConfig cfg;
    cfg.exit_rates.assign(static_cast<std::size_t>(n), 0.0);
    cfg.onramp_demand.resize(static_cast<std::size_t>(n));

    if (!node.contains("mainstream_demand_vph")) fail(scope + ".mainstream_demand_vph", "missing");
    cfg.mainstream_demand = parse_profile(node["mainstream_demand_vph"], scope + ".mainstream_demand_vph");

    if (node.contains("on_ramps")) {
        for (const auto& ramp : node["on_ramps"]) {
            const int s = parse_section_index(ramp.at("section"), n, scope + ".on_ramps.section");
            if (!ramp.contains("demand_vph")) fail(scope + ".on_ramps.demand_vph", "missing");
            cfg.onramp_demand[static_cast<std::size_t>(s)] =
                parse_profile(ramp["demand_vph"], scope + ".on_ramps.demand_vph");
        }
    }
    if (node.contains("off_ramps")) {
        for (const auto& ramp : node["off_ramps"]) {
            const int s = parse_section_index(ramp.at("section"), n, scope + ".off_ramps.section");
            cfg.exit_rates[static_cast<std::size_t>(s)] = require_number(ramp, "exit_rate", scope + ".off_ramps");
        }
    }

    if (!node.contains("initial_density_vpk")) fail(scope + ".initial_density_vpk", "missing");
    cfg.initial_density = broadcast(node["initial_density_vpk"], n, scope + ".initial_density_vpk");
    return cfg;
}

void validate_direction(const Scenario& sc, const DirectionConfig& cfg, Direction dir, const std::string& scope) {
    const int n = sc.section_count();
    // The most upstream section of each direction has no ramp at its
    // upstream boundary: section 1 for a, section n for b.
    const int forbidden = dir == Direction::a ? 0 : n - 1;

    if (cfg.mainstream_demand.empty()) fail(scope + ".mainstream_demand_vph", "missing");
    if (cfg.mainstream_demand.min_value() < 0.0) fail(scope + ".mainstream_demand_vph", "negative demand");

    for (int i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const std::string sec = "[section " + std::to_string(i + 1) + "]";
        if (cfg.exit_rates[idx] < 0.0 || cfg.exit_rates[idx] >= 1.0) {
            fail(scope + ".off_ramps" + sec, "exit rate must lie in [0,1)");
        }
        if (!cfg.onramp_demand[idx].empty() && cfg.onramp_demand[idx].min_value() < 0.0) {
            fail(scope + ".on_ramps" + sec, "negative ramp demand");
        }
        if (i == forbidden && (cfg.exit_rates[idx] != 0.0 || !cfg.onramp_demand[idx].empty())) {
            fail(scope + sec, "most upstream section cannot carry a ramp");
        }
        if (cfg.initial_density[idx] < 0.0 || cfg.initial_density[idx] >= sc.params.jam_density) {
            fail(scope + ".initial_density_vpk" + sec, "must be in [0, jam_density)");
        }
    }
}

}  // namespace

int Scenario::control_steps() const {
    const int m = params.steps_per_control();
    return (horizon_steps + m - 1) / m;
}

Scenario Scenario::with_capacity_drop(bool enabled) const {
    Scenario out = *this;
    if (enabled) {
        out.params.lambda_ramp = drop_lambda_ramp;
        out.params.lambda_demand = drop_lambda_demand;
    } else {
        out.params.lambda_ramp = 1.0;
        out.params.lambda_demand = 0.0;
    }
    return out;
}

void validate(const Scenario& sc) {
    try {
        ibc::validate(sc.params);
    } catch (const ModelError& e) {
        fail("params", e.what());
    }

    const int n = sc.section_count();
    if (n < 1) fail("sections", "at least one section required");
    if (sc.horizon_steps < 1) fail("horizon_steps", "must be positive");

    double min_length = sc.lengths.front();
    for (int i = 0; i < n; ++i) {
        if (sc.lengths[static_cast<std::size_t>(i)] <= 0.0) {
            fail("sections.length_km[section " + std::to_string(i + 1) + "]", "must be positive");
        }
        min_length = std::min(min_length, sc.lengths[static_cast<std::size_t>(i)]);
    }
    if (sc.params.free_speed * sc.params.model_step > min_length * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "CFL violated: free_speed*model_step = " << sc.params.free_speed * sc.params.model_step
            << " km exceeds min section length " << min_length << " km";
        fail("params.model_step", msg.str());
    }

    if (static_cast<int>(sc.dir_a.exit_rates.size()) != n || static_cast<int>(sc.dir_b.exit_rates.size()) != n ||
        static_cast<int>(sc.dir_a.initial_density.size()) != n ||
        static_cast<int>(sc.dir_b.initial_density.size()) != n ||
        static_cast<int>(sc.dir_a.onramp_demand.size()) != n ||
        static_cast<int>(sc.dir_b.onramp_demand.size()) != n) {
        fail("directions", "per-section lists must have one entry per section");
    }
    validate_direction(sc, sc.dir_a, Direction::a, "direction_a");
    validate_direction(sc, sc.dir_b, Direction::b, "direction_b");

    if (static_cast<int>(sc.eps_min.size()) != n || static_cast<int>(sc.eps_max.size()) != n) {
        fail("sharing_factor_bounds", "one bound pair per section required");
    }
    for (int i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        if (!(0.0 < sc.eps_min[idx] && sc.eps_min[idx] < sc.eps_max[idx] && sc.eps_max[idx] < 1.0)) {
            fail("sharing_factor_bounds[section " + std::to_string(i + 1) + "]",
                 "need 0 < min < max < 1");
        }
    }

    const bool drop_off = sc.drop_lambda_ramp == 1.0 && sc.drop_lambda_demand == 0.0;
    const bool drop_on = sc.drop_lambda_ramp > 0.0 && sc.drop_lambda_ramp < 1.0 && sc.drop_lambda_demand > 0.0 &&
                         sc.drop_lambda_demand < 1.0;
    if (!drop_off && !drop_on) {
        fail("params.capacity_drop", "(lambda_ramp, lambda_demand) must be (1,0) or both strictly inside (0,1)");
    }

    if (static_cast<int>(sc.design.onramp_a.size()) != n || static_cast<int>(sc.design.onramp_b.size()) != n) {
        fail("design", "nominal ramp lists must have one entry per section");
    }
    if (!(sc.design.eps > 0.0 && sc.design.eps < 1.0)) fail("design.eps", "must lie in (0,1)");
    if (sc.design.rel_density <= 0.0) fail("design.rel_density", "must be positive");
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file: " + path);

    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError("parse error in " + path + ": " + e.what());
    }

    Scenario sc;
    try {
        sc.name = doc.value("name", std::string{});

        const auto& par = doc.at("params");
        sc.params.free_speed = require_number(par, "free_speed_kmh", "params");
        sc.params.backwave_speed = require_number(par, "backwave_speed_kmh", "params");
        sc.params.capacity = require_number(par, "capacity_vph", "params");
        sc.params.critical_density = require_number(par, "critical_density_vpk", "params");
        sc.params.jam_density = require_number(par, "jam_density_vpk", "params");
        sc.params.model_step = seconds_to_hours(require_number(par, "model_step_s", "params"));
        sc.params.control_step = seconds_to_hours(require_number(par, "control_step_s", "params"));
        sc.drop_lambda_ramp = par.value("lambda_ramp", 1.0);
        sc.drop_lambda_demand = par.value("lambda_demand", 0.0);
        sc.params.lambda_ramp = sc.drop_lambda_ramp;
        sc.params.lambda_demand = sc.drop_lambda_demand;

        const auto& sections = doc.at("sections");
        const int n = sections.at("count").get<int>();
        if (n < 1) fail("sections.count", "must be positive");
        sc.lengths = broadcast(sections.at("length_km"), n, "sections.length_km");

        sc.horizon_steps = doc.at("horizon_steps").get<int>();

        sc.dir_a = parse_direction(doc.at("direction_a"), n, "direction_a");
        sc.dir_b = parse_direction(doc.at("direction_b"), n, "direction_b");

        const auto& bounds = doc.at("sharing_factor_bounds");
        sc.eps_min = broadcast(bounds.at("min"), n, "sharing_factor_bounds.min");
        sc.eps_max = broadcast(bounds.at("max"), n, "sharing_factor_bounds.max");

        sc.design.onramp_a.assign(static_cast<std::size_t>(n), 0.0);
        sc.design.onramp_b.assign(static_cast<std::size_t>(n), 0.0);
        if (doc.contains("design")) {
            const auto& design = doc["design"];
            sc.design.rel_density = design.value("rel_density", 1.0);
            sc.design.eps = design.value("eps", 0.5);
            sc.design.mainstream_a = require_number(design, "mainstream_a_vph", "design");
            sc.design.mainstream_b = require_number(design, "mainstream_b_vph", "design");
            if (design.contains("on_ramps_a")) {
                for (const auto& ramp : design["on_ramps_a"]) {
                    const int s = parse_section_index(ramp.at("section"), n, "design.on_ramps_a.section");
                    sc.design.onramp_a[static_cast<std::size_t>(s)] = require_number(ramp, "vph", "design.on_ramps_a");
                }
            }
            if (design.contains("on_ramps_b")) {
                for (const auto& ramp : design["on_ramps_b"]) {
                    const int s = parse_section_index(ramp.at("section"), n, "design.on_ramps_b.section");
                    sc.design.onramp_b[static_cast<std::size_t>(s)] = require_number(ramp, "vph", "design.on_ramps_b");
                }
            }
        }
    } catch (const json::exception& e) {
        throw ScenarioError("schema error in " + path + ": " + e.what());
    }

    validate(sc);
    return sc;
}

}  // namespace ibc
