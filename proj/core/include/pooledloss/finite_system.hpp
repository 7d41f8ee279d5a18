#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pooledloss/model.hpp"
#include "pooledloss/types.hpp"

namespace pooledloss {

// One simulated pool path. Loss is the fraction of defaulted names at each
// grid point: non-decreasing, quantized to 1/N, loss(0) = 0.
struct PoolPath {
    TimeGrid grid;
    std::vector<double> loss;                          // per grid point
    std::vector<double> x;                             // systematic factor path
    std::vector<std::optional<double>> default_times;  // per name
    std::vector<std::vector<double>> intensities;      // per name per grid point; only if recorded
};

struct SimOptions {
    bool record_intensities = false;
};

// Simulates the N-name system: Euler step of X, full-truncation Euler of each
// surviving intensity, trapezoidal compensator clocks against per-name
// exponential thresholds, and per-step batch contagion jumps beta_c * d / N.
PoolPath simulate_pool(const ValidatedPortfolio& portfolio, const SystematicRiskSpec& risk,
                       const TimeGrid& grid, std::uint64_t seed);

// Same with explicit systematic / idiosyncratic seeding (the two blocks are
// independent streams; with beta_s = 0 the loss is invariant to x_seed).
PoolPath simulate_pool_streams(const ValidatedPortfolio& portfolio, const SystematicRiskSpec& risk,
                               const TimeGrid& grid, std::uint64_t x_seed, std::uint64_t idio_seed,
                               const SimOptions& options = {});

struct EmpiricalLossDistribution {
    double horizon = 0.0;
    std::vector<double> samples;  // indexed by path id
    double mean = 0.0;
    double variance = 0.0;  // unbiased sample variance

    double quantile(double level) const;  // empirical quantile, throws BadLevel
};

// M independent pool paths (independent X per path); loss collected at t.
// Paths are parallelized; per-path seeds derive from (seed, path index), so
// the samples vector is identical for every thread count.
EmpiricalLossDistribution empirical_loss_distribution(const ValidatedPortfolio& portfolio,
                                                      const SystematicRiskSpec& risk,
                                                      const TimeGrid& grid, std::size_t paths,
                                                      double t, std::uint64_t seed,
                                                      unsigned threads = 0);

}  // namespace pooledloss
