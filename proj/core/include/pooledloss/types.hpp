#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>

#include "pooledloss/errors.hpp"

namespace pooledloss {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Equispaced grid 0 = t_0 < t_1 < ... < t_n = horizon with step dt.
class TimeGrid {
public:
    TimeGrid(double horizon, double dt) : horizon_(horizon), dt_(dt) {
        if (!(horizon > 0.0) || !(dt > 0.0) || !std::isfinite(horizon) || !std::isfinite(dt))
            throw BadGrid("TimeGrid: horizon and dt must be positive and finite");
        const double ratio = horizon / dt;
        steps_ = static_cast<std::size_t>(std::llround(ratio));
        if (steps_ == 0 || std::abs(ratio - static_cast<double>(steps_)) > 1e-9)
            throw BadGrid("TimeGrid: horizon must be an integer multiple of dt");
    }

    double horizon() const { return horizon_; }
    double dt() const { return dt_; }
    std::size_t steps() const { return steps_; }
    std::size_t points() const { return steps_ + 1; }
    double time(std::size_t i) const { return i == steps_ ? horizon_ : static_cast<double>(i) * dt_; }

    bool contains(double t) const {
        if (t < -1e-12 || t > horizon_ + 1e-9) return false;
        const double x = t / dt_;
        return std::abs(x - std::llround(x)) <= 1e-9 * (1.0 + std::abs(x));
    }

    // Grid index of t; throws TimeOffGrid when t is not a grid point.
    std::size_t index_of(double t) const {
        if (!contains(t)) throw TimeOffGrid("time " + std::to_string(t) + " is not on the grid");
        return static_cast<std::size_t>(std::llround(t / dt_));
    }

private:
    double horizon_;
    double dt_;
    std::size_t steps_;
};

}  // namespace pooledloss
