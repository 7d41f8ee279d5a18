#pragma once

#include <span>
#include <vector>

#include "pooledloss/model.hpp"
#include "pooledloss/types.hpp"

namespace pooledloss {

// Truncated moments u_0..u_K of the limiting surviving-intensity measure
// along one systematic path, plus the running integral of sigma0(X)^2 used
// by the stabilizing transform.
struct MomentTrajectory {
    TimeGrid grid;
    int k_lln = 0;
    ObligorParams params;
    std::vector<Vector> u;              // per grid point, size k_lln + 1
    std::vector<double> x_path;         // the path the solve consumed
    std::vector<double> dv_path;        // Brownian increments of that path
    std::vector<double> int_sigma0_sq;  // per grid point
    long clamped = 0;                   // negative moments clamped to zero

    const Vector& at(std::size_t i) const { return u[i]; }
};

// Euler solve of the truncated moment hierarchy with closure u_{K+1} = 0 and
// initial condition u_k(0) = lambda0^k. Requires a homogeneous portfolio.
// Throws UnstableBlowup when any |u_k| exceeds 1e12 (use a smaller step or
// the stabilized transform).
MomentTrajectory solve_lln_moments(const ValidatedPortfolio& portfolio,
                                   const SystematicRiskSpec& risk, const TimeGrid& grid, int k_lln,
                                   std::span<const double> x_path, std::span<const double> dv_path);

// w_k(t) = exp(-0.5 beta_s^2 k(k-1) int_0^t sigma0(X)^2 ds) u_k(t); removes
// the dominant exponential growth for diagnostics and post-processing.
std::vector<Vector> stabilized_moments(const MomentTrajectory& traj);

// L(t) = 1 - u_0(t).
std::vector<double> first_order_loss(const MomentTrajectory& traj);

}  // namespace pooledloss
