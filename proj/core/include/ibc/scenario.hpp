#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ibc/model.hpp"
#include "ibc/profile.hpp"

namespace ibc {

/// Raised by load_scenario / validate with a field-level message.
class ScenarioError : public std::runtime_error {
public:
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

/// Per-direction topology and inputs. Section indices are 0-based in code;
/// the file format uses the 1-based numbering of the stretch description.
/// Direction a travels from section 0 to section n-1, direction b the
/// reverse. An empty on-ramp profile means the section has no on-ramp.
struct DirectionConfig {
    PiecewiseLinear mainstream_demand;            ///< veh/h; enters section 0 (a) resp. n-1 (b)
    std::vector<double> exit_rates;               ///< beta per section, in [0,1); 0 = no off-ramp
    std::vector<PiecewiseLinear> onramp_demand;   ///< veh/h per section; empty = no on-ramp
    std::vector<double> initial_density;          ///< veh/km per section
};

/// Nominal operating point the linearization is evaluated at. Relative
/// densities and sharing factors are uniform across sections; demand values
/// are the nominal mainstream inflows and per-ramp flows.
struct DesignPoint {
    double rel_density = 1.0;
    double eps = 0.5;
    double mainstream_a = 0.0;                    ///< veh/h
    double mainstream_b = 0.0;                    ///< veh/h
    std::vector<double> onramp_a;                 ///< veh/h per section, 0 where no ramp
    std::vector<double> onramp_b;
};

struct Scenario {
    std::string name;
    ModelParams params;
    std::vector<double> lengths;                  ///< km per section
    DirectionConfig dir_a;
    DirectionConfig dir_b;
    std::vector<double> eps_min;                  ///< per-section lower sharing-factor bound
    std::vector<double> eps_max;                  ///< per-section upper bound
    int horizon_steps = 0;                        ///< K, model steps
    DesignPoint design;

    // Capacity-drop coefficients the file declares for drop-enabled runs;
    // params.lambda_* hold the currently effective pair.
    double drop_lambda_ramp = 1.0;
    double drop_lambda_demand = 0.0;

    int section_count() const { return static_cast<int>(lengths.size()); }

    /// Number of control steps covering the horizon (last one may be short).
    int control_steps() const;

    /// Copy with (lambda_r, lambda_d) set to the file's drop pair (on) or to
    /// (1, 0) (off).
    Scenario with_capacity_drop(bool enabled) const;
};

/// Full invariant check: FD consistency, CFL condition v_f*T <= min L_i,
/// ramp/off-ramp placement, profile non-negativity, initial densities,
/// sharing bounds. Throws ScenarioError naming the offending field.
void validate(const Scenario& scenario);

/// Parses and validates a scenario file (JSON schema documented in the
/// repository README). Throws ScenarioError on parse or validation failure.
Scenario load_scenario(const std::string& path);

}  // namespace ibc
