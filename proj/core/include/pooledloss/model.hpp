#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "pooledloss/rng.hpp"
#include "pooledloss/types.hpp"

namespace pooledloss {

// Intensity dynamics of one obligor type:
//   d lambda = alpha (lambda_bar - lambda) dt + sigma sqrt(lambda) dW
//              + beta_c dL + beta_s lambda dX,   lambda(0) = lambda0.
struct ObligorParams {
    double alpha = 0.0;       // mean reversion speed
    double lambda_bar = 0.0;  // reversion level
    double sigma = 0.0;       // diffusive volatility
    double beta_c = 0.0;      // contagion sensitivity, >= 0
    double beta_s = 0.0;      // systematic sensitivity, any sign
    double lambda0 = 0.0;     // initial intensity
};

// Common factor dX = b0(X) dt + sigma0(X) dV. OU means
// b0(x) = speed (mean - x), sigma0(x) = vol.
struct SystematicRiskSpec {
    enum class Kind { OU, Constant, Custom };

    Kind kind = Kind::Constant;
    double mean = 0.0;
    double speed = 0.0;
    double vol = 0.0;
    double x0 = 0.0;
    std::function<double(double)> drift_fn;  // Custom only
    std::function<double(double)> vol_fn;    // Custom only

    static SystematicRiskSpec ou(double mean, double speed, double vol, double x0);
    static SystematicRiskSpec constant(double level);
    static SystematicRiskSpec custom(std::function<double(double)> drift,
                                     std::function<double(double)> vol, double x0);
};

// (b0, sigma0) at x. Throws NonFiniteInput for non-finite x.
std::pair<double, double> eval_risk_coeffs(const SystematicRiskSpec& spec, double x);

struct PortfolioSpec {
    struct Type {
        ObligorParams params;
        double weight = 1.0;
    };
    std::size_t names = 0;
    std::vector<Type> types;
};

// PortfolioSpec whose invariants have been checked. Immutable afterwards and
// safe to share across threads.
class ValidatedPortfolio {
public:
    std::size_t names() const { return spec_.names; }
    const std::vector<PortfolioSpec::Type>& types() const { return spec_.types; }
    bool homogeneous() const { return spec_.types.size() == 1; }
    const ObligorParams& single_type() const;
    const PortfolioSpec& spec() const { return spec_; }

    // Deterministic largest-remainder apportionment of names to types.
    std::vector<std::size_t> type_counts() const;

    friend ValidatedPortfolio validate_portfolio(const PortfolioSpec& spec);

private:
    explicit ValidatedPortfolio(PortfolioSpec spec) : spec_(std::move(spec)) {}
    PortfolioSpec spec_;
};

// Checks parameter signs, finiteness and weight normalization.
// Throws NegativeParameter, BadWeights or EmptyPortfolio.
ValidatedPortfolio validate_portfolio(const PortfolioSpec& spec);

// Euler path of the systematic factor together with the Brownian increments
// that produced it. The same (x, dv) pair must be fed to every moment system
// conditioned on this factor path.
struct RiskPath {
    std::vector<double> x;   // grid.points() values
    std::vector<double> dv;  // grid.steps() increments
};

RiskPath simulate_risk_path(const SystematicRiskSpec& spec, const TimeGrid& grid, NormalStream& rng);

}  // namespace pooledloss
