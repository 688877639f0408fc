#include "ibc/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ibc {

namespace {

// Relative tolerance for the FD consistency checks; the constants are
// file-supplied, so exact equality is too brittle.
constexpr double kConsistencyTol = 1e-9;

bool close(double x, double y, double tol) {
    return std::abs(x - y) <= tol * std::max({1.0, std::abs(x), std::abs(y)});
}

}  // namespace

int ModelParams::steps_per_control() const {
    const double ratio = control_step / model_step;
    const int m = static_cast<int>(std::lround(ratio));
    if (m < 1 || !close(control_step, m * model_step, 1e-9)) {
        std::ostringstream msg;
        msg << "control_step (" << control_step << " h) is not a positive integer multiple of model_step ("
            << model_step << " h)";
        throw ModelError(msg.str());
    }
    return m;
}

void validate(const ModelParams& p) {
    if (p.free_speed <= 0.0) throw ModelError("free_speed must be positive");
    if (p.backwave_speed <= 0.0) throw ModelError("backwave_speed must be positive");
    if (p.capacity <= 0.0) throw ModelError("capacity must be positive");
    if (p.critical_density <= 0.0) throw ModelError("critical_density must be positive");
    if (p.jam_density <= p.critical_density) throw ModelError("jam_density must exceed critical_density");
    if (p.model_step <= 0.0) throw ModelError("model_step must be positive");
    if (p.control_step <= 0.0) throw ModelError("control_step must be positive");

    if (!close(p.capacity, p.free_speed * p.critical_density, kConsistencyTol)) {
        std::ostringstream msg;
        msg << "inconsistent fundamental diagram: capacity " << p.capacity << " != free_speed*critical_density "
            << p.free_speed * p.critical_density;
        throw ModelError(msg.str());
    }
    if (!close(p.backwave_speed, p.capacity / (p.jam_density - p.critical_density), kConsistencyTol)) {
        std::ostringstream msg;
        msg << "inconsistent fundamental diagram: backwave_speed " << p.backwave_speed
            << " != capacity/(jam_density-critical_density) " << p.capacity / (p.jam_density - p.critical_density);
        throw ModelError(msg.str());
    }

    const bool drop_off = p.lambda_ramp == 1.0 && p.lambda_demand == 0.0;
    const bool drop_on = p.lambda_ramp > 0.0 && p.lambda_ramp < 1.0 && p.lambda_demand > 0.0 && p.lambda_demand < 1.0;
    if (!drop_off && !drop_on) {
        throw ModelError("(lambda_ramp, lambda_demand) must be (1,0) or both strictly inside (0,1)");
    }

    p.steps_per_control();  // throws if T_c is not an integer multiple of T
}

SharingFactor::SharingFactor(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
        std::ostringstream msg;
        msg << "sharing factor " << value << " outside (0,1)";
        throw ModelError(msg.str());
    }
}

DirectionalFd fd_params_for_direction(const ModelParams& params, SharingFactor eps, Direction dir) {
    const double s = eps.share(dir);
    return DirectionalFd{s * params.capacity, s * params.critical_density, s * params.jam_density};
}

double demand_flow(const ModelParams& params, double rho, double share) {
    const double drop =
        params.lambda_demand * params.capacity * (rho - share * params.critical_density) /
        (params.critical_density - params.jam_density);
    return std::min(share * params.capacity + drop, params.free_speed * rho);
}

double supply_flow(const ModelParams& params, double rho, double share) {
    const double wave = params.backwave_speed * (share * params.jam_density - rho);
    return std::max(0.0, std::min(share * params.capacity, wave));
}

}  // namespace ibc
