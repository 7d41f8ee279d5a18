#include "pooledloss/finite_system.hpp"

#include <algorithm>
#include <cmath>

#include "pooledloss/parallel.hpp"
#include "pooledloss/rng.hpp"

namespace pooledloss {

PoolPath simulate_pool(const ValidatedPortfolio& portfolio, const SystematicRiskSpec& risk,
                       const TimeGrid& grid, std::uint64_t seed) {
    return simulate_pool_streams(portfolio, risk, grid, derive_seed(seed, {salt::kSystematic}),
                                 derive_seed(seed, {salt::kName}));
}

PoolPath simulate_pool_streams(const ValidatedPortfolio& portfolio, const SystematicRiskSpec& risk,
                               const TimeGrid& grid, std::uint64_t x_seed, std::uint64_t idio_seed,
                               const SimOptions& options) {
    const std::size_t n = portfolio.names();
    const std::size_t steps = grid.steps();
    const double dt = grid.dt();
    const double sq_dt = std::sqrt(dt);

    PoolPath path{grid, {}, {}, {}, {}};
    path.loss.assign(grid.points(), 0.0);
    path.x.assign(grid.points(), 0.0);
    path.default_times.assign(n, std::nullopt);

    // Per-name state. Type index, intensity, compensator clock, threshold.
    const auto counts = portfolio.type_counts();
    std::vector<const ObligorParams*> type_of(n);
    {
        std::size_t name = 0;
        for (std::size_t t = 0; t < counts.size(); ++t)
            for (std::size_t c = 0; c < counts[t]; ++c) type_of[name++] = &portfolio.types()[t].params;
    }

    std::vector<double> lambda(n), clock(n), threshold(n);
    std::vector<char> alive(n, 1);
    std::vector<NormalStream> name_stream;
    name_stream.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        name_stream.emplace_back(derive_seed(idio_seed, {salt::kName, i}));
        lambda[i] = type_of[i]->lambda0;
        threshold[i] = name_stream[i].exponential();
        clock[i] = 0.0;
    }

    if (options.record_intensities) {
        path.intensities.assign(n, std::vector<double>(grid.points(), 0.0));
        for (std::size_t i = 0; i < n; ++i) path.intensities[i][0] = lambda[i];
    }

    NormalStream x_stream(x_seed);
    double x = risk.x0;
    path.x[0] = x;

    std::size_t survivors = n;
    for (std::size_t step = 0; step < steps; ++step) {
        const auto [b0, sigma0] = eval_risk_coeffs(risk, x);
        const double dx = b0 * dt + sigma0 * (sq_dt * x_stream.normal());
        const double x_next = x + dx;

        std::size_t defaults = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive[i]) continue;
            const ObligorParams& p = *type_of[i];
            const double lam = lambda[i];
            double lam_next = lam + p.alpha * (p.lambda_bar - lam) * dt + p.beta_s * lam * dx;
            if (p.sigma > 0.0)
                lam_next += p.sigma * std::sqrt(std::max(lam, 0.0)) * sq_dt * name_stream[i].normal();
            lam_next = std::max(lam_next, 0.0);
            clock[i] += 0.5 * (lam + lam_next) * dt;
            lambda[i] = lam_next;
            if (clock[i] >= threshold[i]) {
                alive[i] = 0;
                path.default_times[i] = grid.time(step + 1);
                ++defaults;
            }
        }

        if (defaults > 0) {
            survivors -= defaults;
            const double jump_per_unit = static_cast<double>(defaults) / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                if (alive[i]) lambda[i] += type_of[i]->beta_c * jump_per_unit;
        }

        path.loss[step + 1] = 1.0 - static_cast<double>(survivors) / static_cast<double>(n);
        x = x_next;
        path.x[step + 1] = x;

        if (options.record_intensities)
            for (std::size_t i = 0; i < n; ++i)
                path.intensities[i][step + 1] = alive[i] ? lambda[i] : 0.0;
    }

    return path;
}

double EmpiricalLossDistribution::quantile(double level) const {
    if (!(level > 0.0 && level < 1.0)) throw BadLevel("quantile level must be in (0,1)");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const std::size_t idx = std::min(m - 1, static_cast<std::size_t>(level * static_cast<double>(m)));
    return sorted[idx];
}

EmpiricalLossDistribution empirical_loss_distribution(const ValidatedPortfolio& portfolio,
                                                      const SystematicRiskSpec& risk,
                                                      const TimeGrid& grid, std::size_t paths,
                                                      double t, std::uint64_t seed,
                                                      unsigned threads) {
    if (paths == 0) throw ConfigError("empirical_loss_distribution: paths must be >= 1");
    if (!grid.contains(t)) throw HorizonOffGrid("horizon " + std::to_string(t) + " not on grid");
    const std::size_t t_idx = grid.index_of(t);

    EmpiricalLossDistribution out;
    out.horizon = t;
    out.samples.assign(paths, 0.0);

    parallel_for(paths, threads, [&](std::size_t m) {
        const std::uint64_t path_seed = derive_seed(seed, {salt::kPath, m});
        const PoolPath p = simulate_pool(portfolio, risk, grid, path_seed);
        out.samples[m] = p.loss[t_idx];
    });

    // Order-independent summary: samples are already slotted by path id.
    double sum = 0.0;
    for (double v : out.samples) sum += v;
    out.mean = sum / static_cast<double>(paths);
    double ss = 0.0;
    for (double v : out.samples) ss += (v - out.mean) * (v - out.mean);
    out.variance = paths > 1 ? ss / static_cast<double>(paths - 1) : 0.0;
    return out;
}

}  // namespace pooledloss
