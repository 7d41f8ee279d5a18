#include "pooledloss/loss_distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pooledloss {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double GaussianMixtureLoss::cdf(double x) const {
    double acc = 0.0;
    for (const auto& c : components) {
        const double sd = std::sqrt(c.variance);
        if (sd > 0.0)
            acc += c.weight * normal_cdf((x - c.mean) / sd);
        else
            acc += c.weight * (x >= c.mean ? 1.0 : 0.0);
    }
    return acc;
}

double GaussianMixtureLoss::pdf(double x) const {
    double acc = 0.0;
    for (const auto& c : components) {
        const double sd = std::sqrt(c.variance);
        if (sd > 0.0) acc += c.weight * normal_pdf((x - c.mean) / sd) / sd;
    }
    return acc;
}

double GaussianMixtureLoss::quantile(double level) const {
    if (!(level > 0.0 && level < 1.0)) throw BadLevel("quantile level must be in (0,1)");
    if (components.empty()) throw ConfigError("quantile of empty mixture");
    double lo = components.front().mean, hi = lo;
    for (const auto& c : components) {
        const double sd = std::sqrt(c.variance);
        lo = std::min(lo, c.mean - 10.0 * sd - 1e-9);
        hi = std::max(hi, c.mean + 10.0 * sd + 1e-9);
    }
    while (cdf(lo) > level) lo -= (hi - lo);
    while (cdf(hi) < level) hi += (hi - lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = cdf(mid);
        if (std::abs(f - level) <= 1e-10 || hi - lo < 1e-14 * (1.0 + std::abs(mid))) return mid;
        (f < level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double GaussianMixtureLoss::mean() const {
    double acc = 0.0;
    for (const auto& c : components) acc += c.weight * c.mean;
    return acc;
}

double GaussianMixtureLoss::variance() const {
    const double mu = mean();
    double acc = 0.0;
    for (const auto& c : components)
        acc += c.weight * (c.variance + (c.mean - mu) * (c.mean - mu));
    return acc;
}

double GaussianMixtureLoss::mass_outside_unit() const { return cdf(0.0) + (1.0 - cdf(1.0)); }

GaussianMixtureLoss second_order_mixture(std::span<const double> lln_losses,
                                         std::span<const ConditionalGaussianLaw> laws, double n_names,
                                         double t) {
    if (lln_losses.size() != laws.size() || lln_losses.empty())
        throw MismatchedPaths("second_order_mixture: path counts differ or are empty");
    std::vector<double> means(laws.size()), vars(laws.size());
    for (std::size_t m = 0; m < laws.size(); ++m) {
        means[m] = laws[m].mean(t)[0];
        vars[m] = laws[m].cov(t)(0, 0);
    }
    return second_order_mixture(lln_losses, means, vars, n_names, t);
}

GaussianMixtureLoss second_order_mixture(std::span<const double> lln_losses,
                                         std::span<const double> v0_means,
                                         std::span<const double> v0_vars, double n_names, double t) {
    if (lln_losses.size() != v0_means.size() || lln_losses.size() != v0_vars.size() ||
        lln_losses.empty())
        throw MismatchedPaths("second_order_mixture: path counts differ or are empty");
    if (!(n_names > 0)) throw ConfigError("second_order_mixture: N must be positive");

    GaussianMixtureLoss mix;
    mix.horizon = t;
    mix.n_names = n_names;
    const double m_count = static_cast<double>(lln_losses.size());
    const double sqrt_n = std::sqrt(n_names);
    mix.components.reserve(lln_losses.size());
    for (std::size_t m = 0; m < lln_losses.size(); ++m) {
        GaussianMixtureLoss::Component c;
        c.weight = 1.0 / m_count;
        c.mean = lln_losses[m] - v0_means[m] / sqrt_n;
        c.variance = std::max(v0_vars[m], 0.0) / n_names;
        mix.components.push_back(c);
    }
    return mix;
}

double Payoff::operator()(double loss) const {
    switch (kind) {
        case Kind::Call:
            return std::max(loss - param, 0.0);
        case Kind::Identity:
            return loss;
        case Kind::Indicator:
            return loss > param ? 1.0 : 0.0;
    }
    return 0.0;
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::FiniteSystem:
            return "finite_system";
        case Scheme::Scheme1:
            return "scheme1";
        case Scheme::Scheme2:
            return "scheme2";
        case Scheme::FirstOrder:
            return "first_order";
    }
    return "?";
}

namespace {

double component_payoff(const GaussianMixtureLoss::Component& c, const Payoff& payoff) {
    const double sd = std::sqrt(c.variance);
    switch (payoff.kind) {
        case Payoff::Kind::Identity:
            return c.mean;
        case Payoff::Kind::Call: {
            if (sd == 0.0) return std::max(c.mean - payoff.param, 0.0);
            const double z = (c.mean - payoff.param) / sd;
            return (c.mean - payoff.param) * normal_cdf(z) + sd * normal_pdf(z);
        }
        case Payoff::Kind::Indicator: {
            if (sd == 0.0) return c.mean > payoff.param ? 1.0 : 0.0;
            return normal_cdf((c.mean - payoff.param) / sd);
        }
    }
    return 0.0;
}

}  // namespace

EstimatorReport expected_payoff(const GaussianMixtureLoss& mix, const Payoff& payoff) {
    EstimatorReport rep;
    rep.scheme = Scheme::Scheme2;
    const std::size_t m = mix.components.size();
    std::vector<double> vals(m);
    double est = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        vals[i] = component_payoff(mix.components[i], payoff);
        est += mix.components[i].weight * vals[i];
    }
    rep.estimate = est;
    if (m > 1) {
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            ss += mix.components[i].weight * (vals[i] - est) * (vals[i] - est);
        rep.std_error = std::sqrt(ss / static_cast<double>(m - 1));
    }
    return rep;
}

EstimatorReport expected_payoff(std::span<const double> samples, const Payoff& payoff) {
    if (samples.empty()) throw ConfigError("expected_payoff: no samples");
    EstimatorReport rep;
    rep.scheme = Scheme::FiniteSystem;
    double sum = 0.0;
    for (double s : samples) sum += payoff(s);
    const double n = static_cast<double>(samples.size());
    rep.estimate = sum / n;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double s : samples) {
            const double d = payoff(s) - rep.estimate;
            ss += d * d;
        }
        rep.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return rep;
}

Allocation optimal_allocation(double sigma1_sq, double sigma2_sq, double tau1, double tau2,
                              double total_time) {
    if (!(sigma1_sq > 0.0) || !(sigma2_sq > 0.0) || !(tau1 > 0.0) || !(tau2 > 0.0) ||
        !(total_time > 0.0))
        throw DegenerateInputs("optimal_allocation: inputs must be positive");
    const double disc = sigma2_sq * tau1 * tau2 - sigma1_sq * tau1 * tau1;
    if (!(disc > 0.0))
        throw DegenerateInputs("optimal_allocation: sigma2^2 tau1 tau2 - sigma1^2 tau1^2 must be > 0");

    const double m0 = (-2.0 * tau1 * sigma1_sq +
                       std::sqrt(4.0 * tau1 * tau1 * sigma1_sq * sigma1_sq + 4.0 * sigma1_sq * disc)) /
                      (2.0 * disc);
    const double m_star = m0 * total_time;
    const double j_star = (1.0 - m0 * tau1) / (tau2 * m0);

    Allocation out;
    out.m = static_cast<std::size_t>(std::max<long long>(1, std::llround(m_star)));
    out.j = static_cast<std::size_t>(std::max<long long>(1, std::llround(j_star)));
    return out;
}

std::vector<double> loss_process_path(std::span<const double> lln_loss, std::span<const double> v0,
                                      double n_names) {
    if (lln_loss.size() != v0.size())
        throw GridMismatch("loss_process_path: loss and v0 skeleton lengths differ");
    std::vector<double> out(lln_loss.size());
    const double sqrt_n = std::sqrt(n_names);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lln_loss[i] - v0[i] / sqrt_n;
    return out;
}

}  // namespace pooledloss
