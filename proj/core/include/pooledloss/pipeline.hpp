#pragma once

#include <cstdint>
#include <vector>

#include "pooledloss/finite_system.hpp"
#include "pooledloss/fluctuation_moments.hpp"
#include "pooledloss/loss_distribution.hpp"
#include "pooledloss/model.hpp"

namespace pooledloss {

// Inputs shared by the approximation drivers. One systematic path per outer
// iteration m, seeded from (seed, path, m); everything conditioned on that
// path shares its (x, dV) draws.
struct ApproxInputs {
    ValidatedPortfolio portfolio;
    SystematicRiskSpec risk;
    TimeGrid grid;
    double horizon = 0.0;      // time at which the loss law is collected
    int k = 6;                 // fluctuation truncation
    int k_lln = 0;             // 0 = 3k
    std::size_t m_paths = 1;   // systematic paths
    std::size_t j_samples = 1; // scheme-1 inner samples per path
    std::uint64_t seed = 0;
    unsigned threads = 0;
    double dt_fluct = 0.0;

    int lln_level() const { return k_lln > 0 ? k_lln : 3 * k; }
};

// Per-path second-order summary at the horizon.
struct PathLaw {
    double lln_loss = 0.0;
    double v0_mean = 0.0;
    double v0_var = 0.0;
};

// One LLN solve + conditionally semi-analytic law per systematic path.
std::vector<PathLaw> scheme2_path_laws(const ApproxInputs& in);

// Mixture of per-path Gaussians via scheme 2.
GaussianMixtureLoss approx_mixture_scheme2(const ApproxInputs& in);

// beta_s = 0: the law does not depend on the systematic path; a single
// Gaussian component computed with the RK4 fundamental solution.
GaussianMixtureLoss approx_mixture_gaussian(const ApproxInputs& in);

struct Scheme1Result {
    std::size_t m = 0;
    std::size_t j = 0;
    std::vector<double> lln_losses;  // per path, at the horizon
    std::vector<double> losses;      // m*j approximate losses, path-major
};

// Direct simulation: J fluctuation paths per systematic path, approximate
// losses L^m - v0^{m,j}/sqrt(N).
Scheme1Result approx_scheme1(const ApproxInputs& in);

// First-order losses L^m at the horizon, one per systematic path.
std::vector<double> first_order_losses(const ApproxInputs& in);

struct CompareResult {
    EstimatorReport finite;
    EstimatorReport second_order;
    double se_ratio = 0.0;  // finite SE / second-order SE
    std::size_t finite_paths = 0;
    std::size_t approx_paths = 0;
};

// Sizes a finite-system run and a scheme-2 run to the same wall-clock budget
// (per-path costs measured on a small pilot), then reports both estimators.
CompareResult run_compare(const ApproxInputs& in, const Payoff& payoff, double budget_seconds);

struct PilotEstimates {
    double sigma1_sq = 0.0;
    double sigma2_sq = 0.0;
    double tau1 = 0.0;
    double tau2 = 0.0;
    Allocation allocation;
};

// Estimates the variance components and per-path costs from a pilot run and
// feeds them to optimal_allocation.
PilotEstimates pilot_allocation(const ApproxInputs& in, const Payoff& payoff, double budget_seconds,
                                std::size_t pilot_m = 50, std::size_t pilot_j = 20);

}  // namespace pooledloss
