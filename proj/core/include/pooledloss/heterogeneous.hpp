#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pooledloss/fluctuation_moments.hpp"
#include "pooledloss/lln_moments.hpp"
#include "pooledloss/model.hpp"

namespace pooledloss {

// Per-type LLN moment trajectories on the discretized type space. Each type
// carries normalized conditional moments (u_0(0, p) = 1); integrals over the
// type space become weighted sums.
struct TypedMomentField {
    TimeGrid grid;
    int k_lln = 0;
    std::vector<double> weights;
    std::vector<MomentTrajectory> per_type;

    // aggregate first moment sum_i w_i u_1(t, p_i), per grid point
    std::vector<double> aggregate_u1;

    // pool loss L(t) = 1 - sum_i w_i u_0(t, p_i)
    std::vector<double> first_order_loss() const;
};

// Lockstep Euler solve of the per-type systems; the contagion coupling uses
// the weighted aggregate first moment. Reduces exactly to solve_lln_moments
// for a single type.
TypedMomentField solve_heterogeneous_lln(const ValidatedPortfolio& portfolio,
                                         const SystematicRiskSpec& risk, const TimeGrid& grid,
                                         int k_lln, std::span<const double> x_path,
                                         std::span<const double> dv_path);

struct HeterogeneousFluctuationSamples {
    TimeGrid grid;
    std::vector<double> weights;
    // v[sample][type][grid point], vectors of size K+1
    std::vector<std::vector<std::vector<Vector>>> v;

    // weighted pool fluctuation sum_i w_i v_0(t, p_i) for one sample
    std::vector<double> aggregate_v0(std::size_t sample) const;
};

// Direct simulation of the per-type fluctuation systems. Martingale
// increments are independent across types (the covariation is diagonal in
// type); the per-type covariation matrix is the homogeneous formula on the
// type's own moments scaled by 1/weight, the discretization of the
// type-diagonal covariation density on atoms. Types couple only through the
// weighted aggregate v_1 drift term. A single type reproduces
// scheme1_sample_paths exactly (same seeds, same draws).
HeterogeneousFluctuationSamples solve_heterogeneous_fluctuation(const TypedMomentField& field,
                                                                const SystematicRiskSpec& risk,
                                                                const FluctuationConfig& cfg,
                                                                std::size_t j_samples,
                                                                std::uint64_t seed);

}  // namespace pooledloss
