#pragma once

#include <span>
#include <vector>

#include "pooledloss/fluctuation_moments.hpp"
#include "pooledloss/types.hpp"

namespace pooledloss {

// Unconditional loss law as an equal-weight mixture of per-path Gaussians
// N(L^m, Var[v0^m]/N). Support is deliberately not truncated to [0,1];
// mass_outside_unit() reports the leakage instead.
struct GaussianMixtureLoss {
    struct Component {
        double weight = 0.0;
        double mean = 0.0;
        double variance = 0.0;
    };
    std::vector<Component> components;
    double horizon = 0.0;
    double n_names = 0.0;

    double cdf(double x) const;
    double pdf(double x) const;
    double quantile(double level) const;  // bisection to 1e-10 on the CDF
    double mean() const;
    double variance() const;
    double mass_outside_unit() const;
};

// Mixture from per-path first-order losses and fluctuation laws at time t:
// component m is N(L^m - E[v0^m]/sqrt(N), Var[v0^m]/N).
GaussianMixtureLoss second_order_mixture(std::span<const double> lln_losses,
                                         std::span<const ConditionalGaussianLaw> laws, double n_names,
                                         double t);

// Same with the laws already reduced to the zero-moment mean and variance.
GaussianMixtureLoss second_order_mixture(std::span<const double> lln_losses,
                                         std::span<const double> v0_means,
                                         std::span<const double> v0_vars, double n_names, double t);

struct Payoff {
    enum class Kind { Call, Identity, Indicator };
    Kind kind = Kind::Identity;
    double param = 0.0;  // strike or threshold

    static Payoff call(double strike) { return {Kind::Call, strike}; }
    static Payoff identity() { return {Kind::Identity, 0.0}; }
    static Payoff indicator(double threshold) { return {Kind::Indicator, threshold}; }

    double operator()(double loss) const;
};

enum class Scheme { FiniteSystem, Scheme1, Scheme2, FirstOrder };

struct EstimatorReport {
    double estimate = 0.0;
    double std_error = 0.0;
    double wall_time = 0.0;  // seconds, filled by drivers
    Scheme scheme = Scheme::FirstOrder;
};

const char* scheme_name(Scheme s);

// Closed-form per-component payoff expectation, aggregated over the mixture.
// std_error is the across-component sampling error of the equal-weight path
// average (the sigma_1 contribution).
EstimatorReport expected_payoff(const GaussianMixtureLoss& mix, const Payoff& payoff);

// Sample mean and standard error of payoff over raw loss samples.
EstimatorReport expected_payoff(std::span<const double> samples, const Payoff& payoff);

struct Allocation {
    std::size_t m = 0;  // systematic paths
    std::size_t j = 0;  // fluctuation samples per path
};

// Optimal (M, J) split of a fixed compute budget between outer systematic
// paths (cost tau1 each) and inner fluctuation solves (cost tau2 each),
// minimizing sigma1^2/M + sigma2^2/(M J). J does not depend on the budget.
Allocation optimal_allocation(double sigma1_sq, double sigma2_sq, double tau1, double tau2,
                              double total_time);

// Approximate loss path L(t) - v0(t)/sqrt(N) on a skeleton of times.
std::vector<double> loss_process_path(std::span<const double> lln_loss, std::span<const double> v0,
                                      double n_names);

}  // namespace pooledloss
