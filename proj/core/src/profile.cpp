#include "ibc/profile.hpp"

#include <algorithm>
#include <stdexcept>

namespace ibc {

PiecewiseLinear::PiecewiseLinear(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.empty() || times_.size() != values_.size()) {
        throw std::invalid_argument("profile needs matching, non-empty time and value lists");
    }
    if (!std::is_sorted(times_.begin(), times_.end())) {
        throw std::invalid_argument("profile breakpoint times must be non-decreasing");
    }
}

PiecewiseLinear PiecewiseLinear::constant(double value) {
    return PiecewiseLinear({0.0}, {value});
}

double PiecewiseLinear::at(double t) const {
    if (times_.empty()) return 0.0;
    if (t <= times_.front()) return values_.front();
    if (t > times_.back()) return values_.back();

    // Last breakpoint strictly before t; the segment [times_[i], times_[i+1]]
    // then contains t with times_[i] < t <= times_[i+1], which makes the
    // evaluation left-continuous across duplicated (jump) breakpoints.
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const auto hi = static_cast<std::size_t>(it - times_.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
    return values_[lo] + w * (values_[hi] - values_[lo]);
}

double PiecewiseLinear::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

double PiecewiseLinear::max_value() const {
    return *std::max_element(values_.begin(), values_.end());
}

}  // namespace ibc
