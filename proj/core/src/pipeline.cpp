#include "pooledloss/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "pooledloss/lln_moments.hpp"
#include "pooledloss/parallel.hpp"

namespace pooledloss {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

MomentTrajectory solve_path_lln(const ApproxInputs& in, std::size_t m, RiskPath* risk_out = nullptr) {
    NormalStream rng = make_stream(in.seed, {salt::kPath, m});
    RiskPath rp = simulate_risk_path(in.risk, in.grid, rng);
    MomentTrajectory traj =
        solve_lln_moments(in.portfolio, in.risk, in.grid, in.lln_level(), rp.x, rp.dv);
    if (risk_out) *risk_out = std::move(rp);
    return traj;
}

}  // namespace

std::vector<PathLaw> scheme2_path_laws(const ApproxInputs& in) {
    if (in.m_paths == 0) throw ConfigError("scheme2_path_laws: m_paths must be >= 1");
    const std::size_t t_idx = in.grid.index_of(in.horizon);
    std::vector<PathLaw> laws(in.m_paths);
    FluctuationConfig cfg{in.k, Vector(), in.dt_fluct};

    parallel_for(in.m_paths, in.threads, [&](std::size_t m) {
        RiskPath rp;
        MomentTrajectory traj = solve_path_lln(in, m, &rp);
        const ConditionalGaussianLaw law = scheme2_conditional_law(traj, in.risk, cfg, rp.dv);
        laws[m].lln_loss = 1.0 - traj.u[t_idx][0];
        laws[m].v0_mean = law.mean_at(t_idx)[0];
        laws[m].v0_var = law.cov_at(t_idx)(0, 0);
    });
    return laws;
}

GaussianMixtureLoss approx_mixture_scheme2(const ApproxInputs& in) {
    const std::vector<PathLaw> laws = scheme2_path_laws(in);
    std::vector<double> lln(laws.size()), means(laws.size()), vars(laws.size());
    for (std::size_t m = 0; m < laws.size(); ++m) {
        lln[m] = laws[m].lln_loss;
        means[m] = laws[m].v0_mean;
        vars[m] = laws[m].v0_var;
    }
    return second_order_mixture(lln, means, vars, static_cast<double>(in.portfolio.names()),
                                in.horizon);
}

GaussianMixtureLoss approx_mixture_gaussian(const ApproxInputs& in) {
    if (in.portfolio.single_type().beta_s != 0.0)
        throw RequiresZeroBetaS("gaussian approximation requires beta_s = 0");
    const std::size_t t_idx = in.grid.index_of(in.horizon);
    MomentTrajectory traj = solve_path_lln(in, 0);
    FluctuationConfig cfg{in.k, Vector(), in.dt_fluct};
    const ConditionalGaussianLaw law = gaussian_case(traj, cfg);
    const double lln_loss = 1.0 - traj.u[t_idx][0];
    const double mean = law.mean_at(t_idx)[0];
    const double var = law.cov_at(t_idx)(0, 0);
    return second_order_mixture(std::vector<double>{lln_loss}, std::vector<double>{mean},
                                std::vector<double>{var}, static_cast<double>(in.portfolio.names()),
                                in.horizon);
}

Scheme1Result approx_scheme1(const ApproxInputs& in) {
    if (in.m_paths == 0 || in.j_samples == 0)
        throw ConfigError("approx_scheme1: m_paths and j_samples must be >= 1");
    const std::size_t t_idx = in.grid.index_of(in.horizon);
    const double sqrt_n = std::sqrt(static_cast<double>(in.portfolio.names()));

    Scheme1Result out;
    out.m = in.m_paths;
    out.j = in.j_samples;
    out.lln_losses.assign(in.m_paths, 0.0);
    out.losses.assign(in.m_paths * in.j_samples, 0.0);
    FluctuationConfig cfg{in.k, Vector(), in.dt_fluct};

    parallel_for(in.m_paths, in.threads, [&](std::size_t m) {
        MomentTrajectory traj = solve_path_lln(in, m);
        const double lln_loss = 1.0 - traj.u[t_idx][0];
        out.lln_losses[m] = lln_loss;
        const FluctuationSamples samples = scheme1_sample_paths(
            traj, in.risk, cfg, in.j_samples, derive_seed(in.seed, {salt::kPath, m}));
        for (std::size_t j = 0; j < in.j_samples; ++j)
            out.losses[m * in.j_samples + j] = lln_loss - samples.v[j][t_idx][0] / sqrt_n;
    });
    return out;
}

std::vector<double> first_order_losses(const ApproxInputs& in) {
    if (in.m_paths == 0) throw ConfigError("first_order_losses: m_paths must be >= 1");
    const std::size_t t_idx = in.grid.index_of(in.horizon);
    std::vector<double> losses(in.m_paths);
    parallel_for(in.m_paths, in.threads, [&](std::size_t m) {
        MomentTrajectory traj = solve_path_lln(in, m);
        losses[m] = 1.0 - traj.u[t_idx][0];
    });
    return losses;
}

CompareResult run_compare(const ApproxInputs& in, const Payoff& payoff, double budget_seconds) {
    if (!(budget_seconds > 0.0)) throw ConfigError("compare: budget must be > 0 seconds");

    // Pilot timings. Small but non-trivial so per-path costs are meaningful.
    const std::size_t pilot = 8;
    auto t0 = Clock::now();
    for (std::size_t m = 0; m < pilot; ++m)
        (void)simulate_pool(in.portfolio, in.risk, in.grid, derive_seed(in.seed, {salt::kMacro, m}));
    const double tau_fs = seconds_since(t0) / static_cast<double>(pilot);

    ApproxInputs pilot_in = in;
    pilot_in.m_paths = pilot;
    t0 = Clock::now();
    (void)scheme2_path_laws(pilot_in);
    const double tau_2 = seconds_since(t0) / static_cast<double>(pilot);

    const auto clamp_paths = [](double v) {
        return static_cast<std::size_t>(std::max(8.0, std::min(v, 4e6)));
    };
    const std::size_t m_fs = clamp_paths(budget_seconds / std::max(tau_fs, 1e-9));
    const std::size_t m_2 = clamp_paths(budget_seconds / std::max(tau_2, 1e-9));

    CompareResult res;
    res.finite_paths = m_fs;
    res.approx_paths = m_2;

    t0 = Clock::now();
    const EmpiricalLossDistribution emp = empirical_loss_distribution(
        in.portfolio, in.risk, in.grid, m_fs, in.horizon, derive_seed(in.seed, {salt::kPath, 1}),
        in.threads);
    res.finite = expected_payoff(emp.samples, payoff);
    res.finite.scheme = Scheme::FiniteSystem;
    res.finite.wall_time = seconds_since(t0);

    ApproxInputs run_in = in;
    run_in.m_paths = m_2;
    run_in.seed = derive_seed(in.seed, {salt::kPath, 2});
    t0 = Clock::now();
    const GaussianMixtureLoss mix = approx_mixture_scheme2(run_in);
    res.second_order = expected_payoff(mix, payoff);
    res.second_order.scheme = Scheme::Scheme2;
    res.second_order.wall_time = seconds_since(t0);

    res.se_ratio = res.second_order.std_error > 0.0
                       ? res.finite.std_error / res.second_order.std_error
                       : std::numeric_limits<double>::infinity();
    return res;
}

PilotEstimates pilot_allocation(const ApproxInputs& in, const Payoff& payoff, double budget_seconds,
                                std::size_t pilot_m, std::size_t pilot_j) {
    if (pilot_m < 2 || pilot_j < 2) throw ConfigError("pilot_allocation: pilot sizes must be >= 2");

    ApproxInputs pilot_in = in;
    pilot_in.m_paths = pilot_m;
    pilot_in.j_samples = pilot_j;

    // tau1: systematic path + LLN solve + covariance machinery, measured via
    // the scheme-2 law; tau2: one inner fluctuation solve.
    auto t0 = Clock::now();
    const std::vector<PathLaw> laws = scheme2_path_laws(pilot_in);
    const double tau1 = seconds_since(t0) / static_cast<double>(pilot_m);

    t0 = Clock::now();
    const Scheme1Result s1 = approx_scheme1(pilot_in);
    const double scheme1_total = seconds_since(t0);
    const double tau2 = std::max((scheme1_total - tau1 * static_cast<double>(pilot_m)) /
                                     static_cast<double>(pilot_m * pilot_j),
                                 1e-9);

    // sigma1^2: variance across paths of the conditional payoff expectation.
    // sigma2^2: mean conditional variance, from the per-path Gaussian law.
    const double n = static_cast<double>(in.portfolio.names());
    std::vector<double> cond_mean(pilot_m);
    double sigma2_sq = 0.0;
    for (std::size_t m = 0; m < pilot_m; ++m) {
        GaussianMixtureLoss single;
        single.n_names = n;
        single.horizon = in.horizon;
        single.components.push_back({1.0, laws[m].lln_loss - laws[m].v0_mean / std::sqrt(n),
                                     std::max(laws[m].v0_var, 0.0) / n});
        cond_mean[m] = expected_payoff(single, payoff).estimate;
        // E[f^2 | X] by quadrature on the single Gaussian: use the identity
        // Var = E f^2 - (E f)^2 with E f^2 from a second closed form when
        // available; fall back to sampling the Gaussian directly.
        const double sd = std::sqrt(std::max(laws[m].v0_var, 0.0) / n);
        double var_f = 0.0;
        if (sd > 0.0) {
            // 33-point Gauss-Hermite style rectangle over +-6 sd
            const int q = 33;
            double ef2 = 0.0, ef = 0.0, wsum = 0.0;
            const double mu = laws[m].lln_loss - laws[m].v0_mean / std::sqrt(n);
            for (int i = 0; i < q; ++i) {
                const double z = -6.0 + 12.0 * static_cast<double>(i) / (q - 1);
                const double w = std::exp(-0.5 * z * z);
                const double f = payoff(mu + sd * z);
                ef += w * f;
                ef2 += w * f * f;
                wsum += w;
            }
            ef /= wsum;
            ef2 /= wsum;
            var_f = std::max(ef2 - ef * ef, 0.0);
        }
        sigma2_sq += var_f / static_cast<double>(pilot_m);
    }
    double mean_of_means = 0.0;
    for (double v : cond_mean) mean_of_means += v / static_cast<double>(pilot_m);
    double sigma1_sq = 0.0;
    for (double v : cond_mean) sigma1_sq += (v - mean_of_means) * (v - mean_of_means);
    sigma1_sq /= static_cast<double>(pilot_m - 1);

    PilotEstimates est;
    est.sigma1_sq = sigma1_sq;
    est.sigma2_sq = sigma2_sq;
    est.tau1 = tau1;
    est.tau2 = tau2;
    est.allocation = optimal_allocation(sigma1_sq, sigma2_sq, tau1, tau2, budget_seconds);
    return est;
}

}  // namespace pooledloss
