#include "pooledloss/lln_moments.hpp"

#include <cmath>

namespace pooledloss {

namespace {
constexpr double kBlowupLimit = 1e12;
}

MomentTrajectory solve_lln_moments(const ValidatedPortfolio& portfolio,
                                   const SystematicRiskSpec& risk, const TimeGrid& grid, int k_lln,
                                   std::span<const double> x_path, std::span<const double> dv_path) {
    if (k_lln < 1) throw ConfigError("solve_lln_moments: k_lln must be >= 1");
    if (x_path.size() != grid.points() || dv_path.size() != grid.steps())
        throw GridMismatch("solve_lln_moments: path lengths do not match grid");
    const ObligorParams& p = portfolio.single_type();

    const int kk = k_lln;
    const double dt = grid.dt();

    MomentTrajectory traj{grid,
                          kk,
                          p,
                          {},
                          {x_path.begin(), x_path.end()},
                          {dv_path.begin(), dv_path.end()},
                          {},
                          0};
    traj.u.reserve(grid.points());
    traj.int_sigma0_sq.assign(grid.points(), 0.0);

    Vector u(kk + 1);
    for (int k = 0; k <= kk; ++k) u[k] = std::pow(p.lambda0, k);
    traj.u.push_back(u);

    double prev_s0_sq = 0.0;
    {
        const auto [b0, s0] = eval_risk_coeffs(risk, x_path[0]);
        (void)b0;
        prev_s0_sq = s0 * s0;
    }

    Vector du(kk + 1);
    for (std::size_t i = 0; i < grid.steps(); ++i) {
        const auto [b0, s0] = eval_risk_coeffs(risk, x_path[i]);
        const double dv = dv_path[i];
        const double u1 = u[1];

        for (int k = 0; k <= kk; ++k) {
            const double dk = static_cast<double>(k);
            double drift = u[k] * (-p.alpha * dk + p.beta_s * b0 * dk +
                                   0.5 * p.beta_s * p.beta_s * s0 * s0 * dk * (dk - 1.0));
            if (k > 0)
                drift += u[k - 1] * (0.5 * p.sigma * p.sigma * dk * (dk - 1.0) +
                                     p.alpha * p.lambda_bar * dk + p.beta_c * dk * u1);
            if (k < kk) drift -= u[k + 1];  // closure: u_{K+1} = 0
            du[k] = drift * dt + p.beta_s * s0 * dk * u[k] * dv;
        }
        u += du;

        for (int k = 0; k <= kk; ++k) {
            if (u[k] < 0.0) {
                u[k] = 0.0;
                ++traj.clamped;
            }
            if (!(std::abs(u[k]) < kBlowupLimit) || !std::isfinite(u[k]))
                throw UnstableBlowup("solve_lln_moments: |u_" + std::to_string(k) + "| blew up at t=" +
                                     std::to_string(grid.time(i + 1)) +
                                     "; reduce dt or lower the truncation level");
        }
        traj.u.push_back(u);

        const auto [b0n, s0n] = eval_risk_coeffs(risk, x_path[i + 1]);
        (void)b0n;
        const double s0n_sq = s0n * s0n;
        traj.int_sigma0_sq[i + 1] = traj.int_sigma0_sq[i] + 0.5 * (prev_s0_sq + s0n_sq) * dt;
        prev_s0_sq = s0n_sq;
    }

    return traj;
}

std::vector<Vector> stabilized_moments(const MomentTrajectory& traj) {
    std::vector<Vector> w(traj.u.size());
    const double bs_sq = traj.params.beta_s * traj.params.beta_s;
    for (std::size_t i = 0; i < traj.u.size(); ++i) {
        w[i] = traj.u[i];
        for (int k = 2; k <= traj.k_lln; ++k) {
            const double dk = static_cast<double>(k);
            w[i][k] *= std::exp(-0.5 * bs_sq * dk * (dk - 1.0) * traj.int_sigma0_sq[i]);
        }
    }
    return w;
}

std::vector<double> first_order_loss(const MomentTrajectory& traj) {
    std::vector<double> loss(traj.u.size());
    for (std::size_t i = 0; i < traj.u.size(); ++i) loss[i] = 1.0 - traj.u[i][0];
    return loss;
}

}  // namespace pooledloss
