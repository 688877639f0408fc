#pragma once

#include <vector>

namespace ibc {

/// Piecewise-linear time series given by (time, value) breakpoints with
/// non-decreasing times. Evaluation interpolates linearly inside the
/// breakpoint range and extends the end values as constants outside it.
/// Duplicated breakpoint times encode a jump; sampling at the jump instant
/// returns the left value (left-continuous).
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    PiecewiseLinear(std::vector<double> times, std::vector<double> values);

    static PiecewiseLinear constant(double value);

    double at(double t) const;

    bool empty() const { return times_.empty(); }
    double min_value() const;
    double max_value() const;

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

}  // namespace ibc
