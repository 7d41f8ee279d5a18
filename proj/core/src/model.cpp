#include "pooledloss/model.hpp"

#include <algorithm>
#include <cmath>

namespace pooledloss {

SystematicRiskSpec SystematicRiskSpec::ou(double mean, double speed, double vol, double x0) {
    if (speed < 0.0 || vol < 0.0) throw NegativeParameter("OU speed and vol must be >= 0");
    SystematicRiskSpec s;
    s.kind = Kind::OU;
    s.mean = mean;
    s.speed = speed;
    s.vol = vol;
    s.x0 = x0;
    return s;
}

SystematicRiskSpec SystematicRiskSpec::constant(double level) {
    SystematicRiskSpec s;
    s.kind = Kind::Constant;
    s.x0 = level;
    return s;
}

SystematicRiskSpec SystematicRiskSpec::custom(std::function<double(double)> drift,
                                              std::function<double(double)> vol, double x0) {
    SystematicRiskSpec s;
    s.kind = Kind::Custom;
    s.drift_fn = std::move(drift);
    s.vol_fn = std::move(vol);
    s.x0 = x0;
    return s;
}

std::pair<double, double> eval_risk_coeffs(const SystematicRiskSpec& spec, double x) {
    if (!std::isfinite(x)) throw NonFiniteInput("eval_risk_coeffs: x is not finite");
    switch (spec.kind) {
        case SystematicRiskSpec::Kind::OU:
            return {spec.speed * (spec.mean - x), spec.vol};
        case SystematicRiskSpec::Kind::Constant:
            return {0.0, 0.0};
        case SystematicRiskSpec::Kind::Custom:
            return {spec.drift_fn(x), spec.vol_fn(x)};
    }
    return {0.0, 0.0};
}

namespace {

void check_params(const ObligorParams& p) {
    const double fields[] = {p.alpha, p.lambda_bar, p.sigma, p.beta_c, p.beta_s, p.lambda0};
    for (double v : fields)
        if (!std::isfinite(v)) throw NonFiniteInput("obligor parameter is not finite");
    if (p.alpha < 0.0) throw NegativeParameter("alpha must be >= 0");
    if (p.lambda_bar < 0.0) throw NegativeParameter("lambda_bar must be >= 0");
    if (p.sigma < 0.0) throw NegativeParameter("sigma must be >= 0");
    if (p.beta_c < 0.0) throw NegativeParameter("beta_c must be >= 0");
    if (p.lambda0 < 0.0) throw NegativeParameter("lambda0 must be >= 0");
}

}  // namespace

ValidatedPortfolio validate_portfolio(const PortfolioSpec& spec) {
    if (spec.names == 0 || spec.types.empty()) throw EmptyPortfolio();
    double total = 0.0;
    for (const auto& t : spec.types) {
        check_params(t.params);
        if (!std::isfinite(t.weight) || t.weight <= 0.0)
            throw BadWeights("type weights must be positive");
        total += t.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw BadWeights("type weights must sum to 1");
    PortfolioSpec normalized = spec;
    for (auto& t : normalized.types) t.weight /= total;
    return ValidatedPortfolio(std::move(normalized));
}

const ObligorParams& ValidatedPortfolio::single_type() const {
    if (!homogeneous()) throw ConfigError("operation requires a homogeneous portfolio");
    return spec_.types.front().params;
}

std::vector<std::size_t> ValidatedPortfolio::type_counts() const {
    const std::size_t n = spec_.names;
    const std::size_t m = spec_.types.size();
    std::vector<std::size_t> counts(m);
    std::vector<std::pair<double, std::size_t>> remainders(m);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double exact = spec_.types[i].weight * static_cast<double>(n);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainders[i] = {exact - std::floor(exact), i};
        assigned += counts[i];
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) counts[remainders[k % m].second]++;
    return counts;
}

RiskPath simulate_risk_path(const SystematicRiskSpec& spec, const TimeGrid& grid, NormalStream& rng) {
    RiskPath path;
    path.x.resize(grid.points());
    path.dv.resize(grid.steps());
    const double dt = grid.dt();
    const double sq_dt = std::sqrt(dt);
    double x = spec.x0;
    path.x[0] = x;
    for (std::size_t i = 0; i < grid.steps(); ++i) {
        const auto [b0, sigma0] = eval_risk_coeffs(spec, x);
        const double dv = sq_dt * rng.normal();
        path.dv[i] = dv;
        x += b0 * dt + sigma0 * dv;
        path.x[i + 1] = x;
    }
    return path;
}

}  // namespace pooledloss
