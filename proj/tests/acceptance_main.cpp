// Acceptance suite. Runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits non-zero if any fail.
#include <chrono>
#include <cmath>
#include <numbers>
#include <cstdio>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pooledloss/finite_system.hpp"
#include "pooledloss/fluctuation_moments.hpp"
#include "pooledloss/heterogeneous.hpp"
#include "pooledloss/loss_distribution.hpp"
#include "pooledloss/parallel.hpp"
#include "pooledloss/pipeline.hpp"

using namespace pooledloss;

namespace {

constexpr std::uint64_t kSeed = 42;

ValidatedPortfolio make_pool(std::size_t n, double alpha, double lambda_bar, double sigma,
                             double beta_c, double beta_s, double lambda0) {
    PortfolioSpec spec;
    spec.names = n;
    spec.types.push_back({ObligorParams{alpha, lambda_bar, sigma, beta_c, beta_s, lambda0}, 1.0});
    return validate_portfolio(spec);
}

const SystematicRiskSpec kOu = SystematicRiskSpec::ou(1.0, 2.0, 1.0, 1.0);

struct Check {
    std::string detail;
    bool ok = true;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

double mixture_ks(const GaussianMixtureLoss& mix, const std::vector<double>& samples) {
    return oracles::ks_statistic(samples, [&](double x) { return mix.cdf(x); });
}

double point_mass_ks(double at, const std::vector<double>& samples) {
    return oracles::ks_statistic(samples, [&](double x) { return x >= at ? 1.0 : 0.0; });
}

// ---------------------------------------------------------------------------
// 1. Frozen-intensity analytic case.
Check criterion1() {
    Check c;
    const double target = 1.0 - std::exp(-0.2);

    const auto pool = make_pool(1000, 0.0, 0.0, 0.0, 0.0, 0.0, 0.2);
    const auto risk = SystematicRiskSpec::constant(0.0);

    const TimeGrid lln_grid(1.0, 1e-3);
    RiskPath flat;
    flat.x.assign(lln_grid.points(), 0.0);
    flat.dv.assign(lln_grid.steps(), 0.0);
    const auto traj = solve_lln_moments(pool, risk, lln_grid, 8, flat.x, flat.dv);
    const double lln_loss = 1.0 - traj.u.back()[0];
    c.expect(std::abs(lln_loss - target) < 1e-4,
             "LLN loss " + std::to_string(lln_loss) + " vs " + std::to_string(target));

    const TimeGrid mc_grid(1.0, 0.01);
    const auto dist = empirical_loss_distribution(pool, risk, mc_grid, 10000, 1.0, kSeed, 0);
    const double se = std::sqrt(dist.variance / 10000.0);
    c.expect(std::abs(dist.mean - target) < 3.0 * se,
             "MC mean " + std::to_string(dist.mean) + " off by " +
                 std::to_string((dist.mean - target) / se) + " se");
    return c;
}

// 2. CIR survival against the independently solved Riccati value.
Check criterion2() {
    Check c;
    const double oracle = oracles::cir_survival_riccati(4.0, 0.2, 0.9, 0.2, 1.0);
    const auto pool = make_pool(1000, 4.0, 0.2, 0.9, 0.0, 0.0, 0.2);
    const TimeGrid grid(1.0, 1e-3);
    RiskPath flat;
    flat.x.assign(grid.points(), 0.0);
    flat.dv.assign(grid.steps(), 0.0);
    const auto traj =
        solve_lln_moments(pool, SystematicRiskSpec::constant(0.0), grid, 15, flat.x, flat.dv);
    c.expect(std::abs(traj.u.back()[0] - oracle) < 5e-3,
             "u0(1) " + std::to_string(traj.u.back()[0]) + " vs Riccati " + std::to_string(oracle));
    return c;
}

// 3. Fig. 1 case: semi-analytic second order vs the finite system.
Check criterion3() {
    Check c;
    for (double beta_c : {0.0, 1.0}) {
        const auto pool = make_pool(1000, 4.0, 0.2, 0.9, beta_c, 0.0, 0.2);
        const auto risk = SystematicRiskSpec::constant(0.0);
        const TimeGrid grid(1.0, 0.005);

        ApproxInputs in{pool, risk, grid, 1.0};
        in.k = 6;
        in.k_lln = 18;
        in.m_paths = 1;
        in.seed = kSeed;
        const GaussianMixtureLoss mix = approx_mixture_gaussian(in);

        const auto emp = empirical_loss_distribution(pool, risk, grid, 10000, 1.0,
                                                     derive_seed(kSeed, {3, (std::uint64_t)beta_c}),
                                                     0);
        const double se = std::sqrt(emp.variance / 10000.0);
        const std::string tag = "bc=" + std::to_string(static_cast<int>(beta_c)) + ": ";
        c.expect(std::abs(mix.mean() - emp.mean) < 2.0 * se,
                 tag + "mean " + std::to_string(mix.mean()) + " vs " + std::to_string(emp.mean) +
                     " (" + std::to_string((mix.mean() - emp.mean) / se) + " se)");
        c.expect(std::abs(mix.variance() - emp.variance) < 0.15 * emp.variance,
                 tag + "variance " + std::to_string(mix.variance()) + " vs " +
                     std::to_string(emp.variance));

        const double ks2 = mixture_ks(mix, emp.samples);
        const double ks1 = point_mass_ks(mix.components[0].mean, emp.samples);
        c.expect(ks2 < ks1, tag + "KS " + std::to_string(ks2) + " !< " + std::to_string(ks1));
    }
    return c;
}

// 4. Fig. 2/3 case: Scheme 2 mixture vs the finite system, mean and VaR.
Check criterion4() {
    Check c;
    for (double beta_c : {0.0, 1.0}) {
        const auto pool = make_pool(1000, 4.0, 0.2, 0.9, beta_c, 1.0, 0.2);
        const TimeGrid grid(0.5, 0.005);

        ApproxInputs in{pool, kOu, grid, 0.5};
        in.k = 6;
        in.k_lln = 18;
        in.m_paths = 2000;
        in.seed = kSeed;
        const GaussianMixtureLoss mix = approx_mixture_scheme2(in);

        const auto emp = empirical_loss_distribution(pool, kOu, grid, 10000, 0.5,
                                                     derive_seed(kSeed, {4, (std::uint64_t)beta_c}),
                                                     0);
        const double se_fs = std::sqrt(emp.variance / 10000.0);
        const double se_mix = expected_payoff(mix, Payoff::identity()).std_error;
        const double combined = std::sqrt(se_fs * se_fs + se_mix * se_mix);
        const std::string tag = "bc=" + std::to_string(static_cast<int>(beta_c)) + ": ";
        c.expect(std::abs(mix.mean() - emp.mean) < 2.0 * combined,
                 tag + "mean " + std::to_string(mix.mean()) + " vs " + std::to_string(emp.mean) +
                     " (" + std::to_string((mix.mean() - emp.mean) / combined) + " cse)");
        for (double level : {0.95, 0.99}) {
            const double var_fs = emp.quantile(level);
            const double var_mix = mix.quantile(level);
            c.expect(std::abs(var_mix - var_fs) < 0.10 * var_fs,
                     tag + "VaR" + std::to_string(level) + " " + std::to_string(var_mix) + " vs " +
                         std::to_string(var_fs));
        }
    }
    return c;
}

// 5. Truncation convergence of the second-order law (K = 5 vs K = 6).
Check criterion5() {
    Check c;
    const auto pool = make_pool(1000, 4.0, 0.2, 0.9, 1.0, 1.0, 0.2);
    const TimeGrid grid(0.5, 0.005);
    GaussianMixtureLoss mixes[2];
    int idx = 0;
    for (int k : {5, 6}) {
        ApproxInputs in{pool, kOu, grid, 0.5};
        in.k = k;
        in.k_lln = 3 * k;
        in.m_paths = 1000;
        in.seed = kSeed;  // same seed: identical systematic paths
        mixes[idx++] = approx_mixture_scheme2(in);
    }
    const double dmean = std::abs(mixes[0].mean() - mixes[1].mean());
    const double dvar = std::abs(mixes[0].variance() - mixes[1].variance());
    c.expect(dmean < 1e-3, "mean gap " + std::to_string(dmean));
    c.expect(dvar < 0.02 * mixes[1].variance(),
             "variance gap " + std::to_string(dvar / mixes[1].variance()));
    return c;
}

// 6. Scheme 2 standard error beats Scheme 1 at matched M.
Check criterion6() {
    Check c;
    const auto pool = make_pool(500, 4.0, 0.2, 0.9, 1.0, 1.0, 0.2);
    const TimeGrid grid(0.5, 0.005);
    const Payoff payoff = Payoff::call(0.12);

    int wins = 0;
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
        ApproxInputs in{pool, kOu, grid, 0.5};
        in.k = 6;
        in.k_lln = 18;
        in.m_paths = 200;
        in.j_samples = 4;
        in.seed = derive_seed(kSeed, {salt::kMacro, (std::uint64_t)rep});

        const GaussianMixtureLoss mix = approx_mixture_scheme2(in);
        const double se2 = expected_payoff(mix, payoff).std_error;

        const Scheme1Result s1 = approx_scheme1(in);  // same seed: same X paths
        std::vector<double> per_path(s1.m);
        for (std::size_t m = 0; m < s1.m; ++m) {
            double acc = 0.0;
            for (std::size_t j = 0; j < s1.j; ++j) acc += payoff(s1.losses[m * s1.j + j]);
            per_path[m] = acc / static_cast<double>(s1.j);
        }
        double mean = 0.0;
        for (double v : per_path) mean += v / per_path.size();
        double ss = 0.0;
        for (double v : per_path) ss += (v - mean) * (v - mean);
        const double se1 = std::sqrt(ss / (per_path.size() - 1.0) / per_path.size());
        if (se2 <= se1) ++wins;
    }
    c.expect(wins >= 15, "scheme2 won only " + std::to_string(wins) + "/20");
    if (c.ok) c.detail = "scheme2 se lower in " + std::to_string(wins) + "/20 replications";
    return c;
}

// 7. Equal wall-clock standard error separation (desk-scale budget).
Check criterion7() {
    Check c;
    const auto pool = make_pool(1000, 4.0, 0.2, 0.9, 1.0, 1.0, 0.2);
    const TimeGrid grid(0.5, 0.005);
    ApproxInputs in{pool, kOu, grid, 0.5};
    in.k = 6;
    in.k_lln = 18;
    in.seed = kSeed;
    const CompareResult res = run_compare(in, Payoff::call(0.12), 5.0);
    c.expect(res.se_ratio >= 3.0,
             "se ratio " + std::to_string(res.se_ratio) + " (fs " +
                 std::to_string(res.finite.std_error) + ", 2nd " +
                 std::to_string(res.second_order.std_error) + ")");
    if (c.ok) c.detail = "se_finite/se_second = " + std::to_string(res.se_ratio) + " at 5 s budget";
    return c;
}

// 8. Optimal allocation: budget invariance and grid-search agreement.
Check criterion8() {
    Check c;
    NormalStream rng(kSeed);
    auto u01 = [&rng]() { return 0.5 * (1.0 + std::erf(rng.normal() / std::numbers::sqrt2)); };
    int tested = 0;
    while (tested < 5) {
        const double s1 = 0.2 + u01(), s2 = 0.5 + 4.0 * u01();
        const double t1 = 0.5 + u01(), t2 = 0.05 + 0.2 * u01();
        if (s2 * t1 * t2 - s1 * t1 * t1 <= 0.0) continue;
        const auto a = optimal_allocation(s1, s2, t1, t2, 400.0);
        const auto b = optimal_allocation(s1, s2, t1, t2, 800.0);
        c.expect(a.j == b.j, "J* changed with budget");

        double best_var = 1e300;
        std::size_t best_m = 1;
        for (std::size_t m = 1; m * t1 < 400.0; ++m) {
            const double j = (400.0 - m * t1) / (m * t2);
            if (j < 1.0) break;
            const double var = s1 / m + s2 / (m * j);
            if (var < best_var) {
                best_var = var;
                best_m = m;
            }
        }
        c.expect(std::llabs(static_cast<long long>(a.m) - static_cast<long long>(best_m)) <= 2,
                 "M* " + std::to_string(a.m) + " vs grid " + std::to_string(best_m));
        ++tested;
    }
    return c;
}

// 9. Bridge-sampled marginal equals the direct conditional Gaussian marginal.
Check criterion9() {
    Check c;
    const auto pool = make_pool(1000, 4.0, 0.2, 0.9, 1.0, 1.0, 0.2);
    const TimeGrid grid(0.5, 0.005);
    NormalStream prng(derive_seed(kSeed, {9}));
    const RiskPath rp = simulate_risk_path(kOu, grid, prng);
    const auto traj = solve_lln_moments(pool, kOu, grid, 18, rp.x, rp.dv);
    const auto law = scheme2_conditional_law(traj, kOu, FluctuationConfig{6, Vector(), 0}, rp.dv);

    const std::vector<double> times = {0.25, 0.5};
    const int n = 10000;
    std::vector<double> v0(n);
    NormalStream rng(derive_seed(kSeed, {salt::kSkeleton}));
    for (int i = 0; i < n; ++i) v0[i] = sample_skeleton(law, times, rng)[0][0];

    double mean = 0.0;
    for (double v : v0) mean += v / n;
    double var = 0.0;
    for (double v : v0) var += (v - mean) * (v - mean) / (n - 1.0);

    const double mean_t = law.mean(0.25)[0];
    const double var_t = law.cov(0.25)(0, 0);
    const double se_mean = std::sqrt(var_t / n);
    const double se_var = var_t * std::sqrt(2.0 / (n - 1.0));
    c.expect(std::abs(mean - mean_t) < 3.0 * se_mean,
             "bridge mean " + std::to_string(mean) + " vs " + std::to_string(mean_t));
    c.expect(std::abs(var - var_t) < 3.0 * se_var,
             "bridge var " + std::to_string(var) + " vs " + std::to_string(var_t));
    return c;
}

// 10. Property suite: structural invariants, seeds and thread counts.
Check criterion10() {
    Check c;
    const auto pool = make_pool(50, 4.0, 0.2, 0.9, 1.0, 1.0, 0.2);
    const TimeGrid grid(0.5, 0.01);

    // loss monotonicity / quantization, intensity nonnegativity
    SimOptions opts;
    opts.record_intensities = true;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const PoolPath p = simulate_pool_streams(pool, kOu, grid, seed, seed + 100, opts);
        bool mono = p.loss[0] == 0.0;
        bool quant = true, nonneg = true;
        for (std::size_t i = 1; i < p.loss.size(); ++i) {
            mono = mono && p.loss[i] >= p.loss[i - 1];
            const double units = p.loss[i] * 50.0;
            quant = quant && std::abs(units - std::round(units)) < 1e-9;
        }
        for (const auto& path : p.intensities)
            for (double lam : path) nonneg = nonneg && lam >= 0.0;
        c.expect(mono, "loss monotonicity");
        c.expect(quant, "loss quantization");
        c.expect(nonneg, "intensity nonnegativity");
    }

    // Sigma_M symmetry / PSD, Psi(0)=I, Sigma(0)=0
    {
        const auto big = make_pool(1000, 4.0, 0.2, 0.9, 1.0, 1.0, 0.2);
        const TimeGrid g2(0.5, 0.005);
        NormalStream rng(3);
        const RiskPath rp = simulate_risk_path(kOu, g2, rng);
        const auto traj = solve_lln_moments(big, kOu, g2, 18, rp.x, rp.dv);
        const auto cov = covariation_path(traj, 6);
        bool sym = true, psd = true;
        for (const Matrix& s : cov.sigma_m) {
            sym = sym && (s - s.transpose()).cwiseAbs().maxCoeff() <=
                             1e-10 * (1.0 + s.cwiseAbs().maxCoeff());
            const PsdFactor f = psd_factor(s, kDiscretizedCovClipRatio);
            psd = psd && f.clipped_mass <= kDiscretizedCovClipRatio * std::max(s.trace(), 0.0) + 1e-12;
        }
        c.expect(sym, "Sigma_M symmetry");
        c.expect(psd, "Sigma_M PSD after clipping");

        const auto law = scheme2_conditional_law(traj, kOu, FluctuationConfig{6, Vector(), 0},
                                                 rp.dv);
        c.expect((law.psi()[0] - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() == 0.0, "Psi(0)=I");
        c.expect(law.cov(0.0).cwiseAbs().maxCoeff() == 0.0, "Sigma(0)=0");
    }

    // mixture CDF monotone
    {
        GaussianMixtureLoss mix;
        mix.components.push_back({0.5, 0.1, 1e-4});
        mix.components.push_back({0.5, 0.2, 4e-4});
        double prev = 0.0;
        bool mono = true;
        for (int i = 0; i <= 400; ++i) {
            const double f = mix.cdf(-0.1 + 0.5 * i / 400.0);
            mono = mono && f >= prev - 1e-15 && f <= 1.0;
            prev = f;
        }
        c.expect(mono, "mixture CDF monotone");
    }

    // determinism: fixed seed, varying thread counts
    {
        const auto a = empirical_loss_distribution(pool, kOu, grid, 32, 0.5, 7, 1);
        const auto b = empirical_loss_distribution(pool, kOu, grid, 32, 0.5, 7, 4);
        const auto c2 = empirical_loss_distribution(pool, kOu, grid, 32, 0.5, 7, 1);
        c.expect(a.samples == b.samples, "thread-count determinism");
        c.expect(a.samples == c2.samples, "seed determinism");
    }
    return c;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        Check (*fn)();
    };
    const Entry entries[] = {
        {"1 frozen-intensity analytic", criterion1},
        {"2 CIR survival vs Riccati oracle", criterion2},
        {"3 Fig.1 second-order vs finite system", criterion3},
        {"4 Fig.2/3 scheme-2 mixture vs finite system", criterion4},
        {"5 truncation convergence K=5 vs K=6", criterion5},
        {"6 scheme variance ordering", criterion6},
        {"7 equal-budget standard error separation", criterion7},
        {"8 optimal allocation", criterion8},
        {"9 bridge consistency", criterion9},
        {"10 property suites", criterion10},
    };

    int failures = 0;
    for (const Entry& e : entries) {
        const auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = e.fn();
        } catch (const std::exception& ex) {
            c.ok = false;
            c.detail = std::string("exception: ") + ex.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                                .count();
        std::printf("[%s] criterion %s (%.1fs)%s%s\n", c.ok ? "PASS" : "FAIL", e.name, secs,
                    c.detail.empty() ? "" : " -- ", c.detail.c_str());
        std::fflush(stdout);
        if (!c.ok) ++failures;
    }
    if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
