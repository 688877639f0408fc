#pragma once

#include <stdexcept>
#include <string>

namespace ibc {

/// Raised when physical parameters or inputs violate a model invariant.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

enum class Direction { a, b };

/// Physical constants of the bidirectional stretch. Internal units are
/// hours / km / veh throughout, so a 10 s model step is stored as 1/360 h.
///
/// The triangular fundamental diagram is over-determined on purpose:
/// capacity, critical density, jam density and the two wave speeds must be
/// mutually consistent (see validate()), they are never recomputed silently.
struct ModelParams {
    double free_speed = 0.0;        ///< v_f, km/h
    double backwave_speed = 0.0;    ///< w_s, km/h
    double capacity = 0.0;          ///< q_cap, veh/h, both directions combined
    double critical_density = 0.0;  ///< rho_cr, veh/km, both directions
    double jam_density = 0.0;       ///< rho_max, veh/km, both directions
    double lambda_ramp = 1.0;       ///< capacity-drop ramp coefficient; 1 = off
    double lambda_demand = 0.0;     ///< capacity-drop demand coefficient; 0 = off
    double model_step = 0.0;        ///< T, hours
    double control_step = 0.0;      ///< T_c, hours; must be an integer multiple of T

    /// M = T_c / T (validated to be a positive integer).
    int steps_per_control() const;

    bool capacity_drop_enabled() const { return !(lambda_ramp == 1.0 && lambda_demand == 0.0); }
};

/// Checks the fundamental-diagram consistency relations
///   q_cap = v_f * rho_cr,   w_s = q_cap / (rho_max - rho_cr),
/// the control/model step ratio, and the admissible (lambda_r, lambda_d)
/// combinations. Throws ModelError naming the violated relation.
void validate(const ModelParams& params);

/// Fraction of the total road width assigned to direction a; direction b
/// receives the complement. Strictly inside (0,1) so that neither direction
/// is ever fully closed.
class SharingFactor {
public:
    explicit SharingFactor(double value);

    double value() const { return value_; }

    /// Width fraction seen by one direction: eps for a, 1-eps for b.
    double share(Direction dir) const { return dir == Direction::a ? value_ : 1.0 - value_; }

private:
    double value_;
};

/// One direction's triangular-FD constants after width scaling.
struct DirectionalFd {
    double capacity = 0.0;          ///< veh/h
    double critical_density = 0.0;  ///< veh/km
    double jam_density = 0.0;       ///< veh/km
};

/// Scales the cross-road FD constants by the width share of `dir`:
/// direction a receives the eps-scaled triple, direction b the complement.
DirectionalFd fd_params_for_direction(const ModelParams& params, SharingFactor eps, Direction dir);

/// CTM demand function for one direction,
///   Q_D(rho, s) = min{ s*q_cap + lambda_d*q_cap*(rho - s*rho_cr)/(rho_cr - rho_max), v_f*rho },
/// where `share` is the width fraction applied to that direction.
/// Requires rho >= 0. The (rho_cr - rho_max) denominator is negative, which
/// makes the drop term shrink the discharge above the critical density.
double demand_flow(const ModelParams& params, double rho, double share);

/// CTM supply function for one direction,
///   Q_S(rho, s) = max{ 0, min{ s*q_cap, w_s*(s*rho_max - rho) } }.
/// Clamped at zero: a section jammed beyond its scaled jam density accepts
/// nothing rather than producing negative inflow.
double supply_flow(const ModelParams& params, double rho, double share);

}  // namespace ibc
