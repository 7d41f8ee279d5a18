#include "pooledloss/heterogeneous.hpp"

#include <cmath>

namespace pooledloss {

namespace {
constexpr double kBlowupLimit = 1e12;
}

std::vector<double> TypedMomentField::first_order_loss() const {
    std::vector<double> loss(grid.points(), 1.0);
    for (std::size_t i = 0; i < grid.points(); ++i) {
        double u0 = 0.0;
        for (std::size_t t = 0; t < per_type.size(); ++t) u0 += weights[t] * per_type[t].u[i][0];
        loss[i] = 1.0 - u0;
    }
    return loss;
}

TypedMomentField solve_heterogeneous_lln(const ValidatedPortfolio& portfolio,
                                         const SystematicRiskSpec& risk, const TimeGrid& grid,
                                         int k_lln, std::span<const double> x_path,
                                         std::span<const double> dv_path) {
    if (k_lln < 1) throw ConfigError("solve_heterogeneous_lln: k_lln must be >= 1");
    if (x_path.size() != grid.points() || dv_path.size() != grid.steps())
        throw GridMismatch("solve_heterogeneous_lln: path lengths do not match grid");

    const std::size_t n_types = portfolio.types().size();
    const int kk = k_lln;
    const double dt = grid.dt();

    TypedMomentField field{grid, kk, {}, {}, {}};
    field.weights.reserve(n_types);
    field.per_type.reserve(n_types);
    for (const auto& type : portfolio.types()) {
        field.weights.push_back(type.weight);
        MomentTrajectory traj{grid,
                              kk,
                              type.params,
                              {},
                              {x_path.begin(), x_path.end()},
                              {dv_path.begin(), dv_path.end()},
                              {},
                              0};
        traj.u.reserve(grid.points());
        traj.int_sigma0_sq.assign(grid.points(), 0.0);
        Vector u(kk + 1);
        for (int k = 0; k <= kk; ++k) u[k] = std::pow(type.params.lambda0, k);
        traj.u.push_back(u);
        field.per_type.push_back(std::move(traj));
    }
    field.aggregate_u1.assign(grid.points(), 0.0);

    auto aggregate_u1_at = [&](std::size_t i) {
        double agg = 0.0;
        for (std::size_t t = 0; t < n_types; ++t)
            agg += field.weights[t] * field.per_type[t].u[i][1];
        return agg;
    };
    field.aggregate_u1[0] = aggregate_u1_at(0);

    double prev_s0_sq = eval_risk_coeffs(risk, x_path[0]).second;
    prev_s0_sq *= prev_s0_sq;

    Vector du(kk + 1);
    for (std::size_t i = 0; i < grid.steps(); ++i) {
        const auto [b0, s0] = eval_risk_coeffs(risk, x_path[i]);
        const double dv = dv_path[i];
        const double agg_u1 = field.aggregate_u1[i];

        for (std::size_t t = 0; t < n_types; ++t) {
            MomentTrajectory& traj = field.per_type[t];
            const ObligorParams& p = traj.params;
            const Vector& u = traj.u[i];
            for (int k = 0; k <= kk; ++k) {
                const double dk = static_cast<double>(k);
                double drift = u[k] * (-p.alpha * dk + p.beta_s * b0 * dk +
                                       0.5 * p.beta_s * p.beta_s * s0 * s0 * dk * (dk - 1.0));
                if (k > 0)
                    drift += u[k - 1] * (0.5 * p.sigma * p.sigma * dk * (dk - 1.0) +
                                         p.alpha * p.lambda_bar * dk + p.beta_c * dk * agg_u1);
                if (k < kk) drift -= u[k + 1];
                du[k] = drift * dt + p.beta_s * s0 * dk * u[k] * dv;
            }
            Vector next = u + du;
            for (int k = 0; k <= kk; ++k) {
                if (next[k] < 0.0) {
                    next[k] = 0.0;
                    ++traj.clamped;
                }
                if (!(std::abs(next[k]) < kBlowupLimit) || !std::isfinite(next[k]))
                    throw UnstableBlowup("solve_heterogeneous_lln: moment blew up");
            }
            traj.u.push_back(std::move(next));
        }

        const double s0n = eval_risk_coeffs(risk, x_path[i + 1]).second;
        for (std::size_t t = 0; t < n_types; ++t) {
            MomentTrajectory& traj = field.per_type[t];
            traj.int_sigma0_sq[i + 1] =
                traj.int_sigma0_sq[i] + 0.5 * (prev_s0_sq + s0n * s0n) * dt;
        }
        prev_s0_sq = s0n * s0n;
        field.aggregate_u1[i + 1] = aggregate_u1_at(i + 1);
    }

    return field;
}

std::vector<double> HeterogeneousFluctuationSamples::aggregate_v0(std::size_t sample) const {
    const auto& paths = v.at(sample);
    std::vector<double> out(grid.points(), 0.0);
    for (std::size_t i = 0; i < grid.points(); ++i)
        for (std::size_t t = 0; t < paths.size(); ++t) out[i] += weights[t] * paths[t][i][0];
    return out;
}

HeterogeneousFluctuationSamples solve_heterogeneous_fluctuation(const TypedMomentField& field,
                                                                const SystematicRiskSpec& risk,
                                                                const FluctuationConfig& cfg,
                                                                std::size_t j_samples,
                                                                std::uint64_t seed) {
    const int kk = cfg.k;
    if (field.k_lln < 2 * kk + 1)
        throw MomentVectorTooShort("need per-type LLN moments up to 2K+1");
    const TimeGrid& grid = field.grid;
    const double dt = grid.dt();
    const std::size_t n_types = field.per_type.size();

    std::size_t refine = 1;
    if (cfg.dt_fluct > 0.0) {
        const double ratio = dt / cfg.dt_fluct;
        refine = static_cast<std::size_t>(std::llround(ratio));
        if (refine == 0 || std::abs(ratio - static_cast<double>(refine)) > 1e-9)
            throw BadGrid("dt_fluct must subdivide the trajectory grid step");
    }
    const double dtf = dt / static_cast<double>(refine);
    const std::size_t fine_steps = grid.steps() * refine;
    const double sq_dtf = std::sqrt(dtf);

    // Interpolated per-type moments and per-type martingale factors, shared by
    // all samples. Covariation is the homogeneous formula on the type's own
    // moments scaled by 1/weight.
    std::vector<std::vector<Vector>> u_fine(n_types, std::vector<Vector>(fine_steps + 1));
    std::vector<std::vector<PsdFactor>> factor_fine(n_types, std::vector<PsdFactor>(fine_steps));
    std::vector<double> b0_fine(fine_steps), s0_fine(fine_steps);
    const std::vector<double>& x_path = field.per_type.front().x_path;

    for (std::size_t s = 0; s <= fine_steps; ++s) {
        const std::size_t ci = s / refine;
        const std::size_t r = s % refine;
        const double w = static_cast<double>(r) / static_cast<double>(refine);
        for (std::size_t t = 0; t < n_types; ++t) {
            const auto& u = field.per_type[t].u;
            u_fine[t][s] = (r == 0) ? u[ci] : Vector((1.0 - w) * u[ci] + w * u[ci + 1]);
        }
        if (s < fine_steps) {
            const double xw = (r == 0) ? x_path[ci] : (1.0 - w) * x_path[ci] + w * x_path[ci + 1];
            const auto [b0, s0] = eval_risk_coeffs(risk, xw);
            b0_fine[s] = b0;
            s0_fine[s] = s0;
        }
    }
    for (std::size_t t = 0; t < n_types; ++t)
        for (std::size_t s = 0; s < fine_steps; ++s) {
            const Matrix cov =
                covariation_matrix(u_fine[t][s], field.per_type[t].params, kk) / field.weights[t];
            factor_fine[t][s] = psd_factor(cov, kDiscretizedCovClipRatio);
        }

    HeterogeneousFluctuationSamples out{grid, field.weights, {}};
    out.v.assign(j_samples, {});

    for (std::size_t j = 0; j < j_samples; ++j) {
        NormalStream rng = make_stream(seed, {salt::kMartingale, j});
        std::vector<Vector> v(n_types);
        for (auto& vt : v) vt = cfg.initial(kk);

        auto& sample = out.v[j];
        sample.assign(n_types, {});
        for (std::size_t t = 0; t < n_types; ++t) {
            sample[t].reserve(grid.points());
            sample[t].push_back(v[t]);
        }

        Vector z(kk + 1), dm(kk + 1), dv_drift(kk + 1);
        for (std::size_t s = 0; s < fine_steps; ++s) {
            const double b0 = b0_fine[s];
            const double s0 = s0_fine[s];
            const double dv_sub =
                field.per_type.front().dv_path[s / refine] / static_cast<double>(refine);

            double agg_u1 = 0.0, agg_v1 = 0.0;
            for (std::size_t t = 0; t < n_types; ++t) {
                agg_u1 += field.weights[t] * u_fine[t][s][1];
                agg_v1 += field.weights[t] * v[t][1];
            }

            for (std::size_t t = 0; t < n_types; ++t) {
                const ObligorParams& p = field.per_type[t].params;
                const Vector& u = u_fine[t][s];
                Vector& vt = v[t];

                for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
                dm.noalias() = sq_dtf * (factor_fine[t][s].factor * z);

                for (int k = 0; k <= kk; ++k) {
                    const double dk = static_cast<double>(k);
                    double drift = (dk * p.beta_s * b0 - dk * p.alpha +
                                    0.5 * dk * (dk - 1.0) * (p.beta_s * s0) * (p.beta_s * s0)) *
                                   vt[k];
                    if (k > 0) {
                        drift += p.beta_c * dk * u[k - 1] * agg_v1;
                        drift += (0.5 * p.sigma * p.sigma * dk * (dk - 1.0) +
                                  p.alpha * p.lambda_bar * dk + dk * p.beta_c * agg_u1) *
                                 vt[k - 1];
                    }
                    if (k < kk) drift -= vt[k + 1];
                    dv_drift[k] = drift * dtf + dk * p.beta_s * s0 * vt[k] * dv_sub;
                }
                vt += dv_drift + dm;
                for (int k = 0; k <= kk; ++k)
                    if (!(std::abs(vt[k]) < kBlowupLimit))
                        throw UnstableBlowup("solve_heterogeneous_fluctuation: blowup");
            }

            if ((s + 1) % refine == 0)
                for (std::size_t t = 0; t < n_types; ++t) sample[t].push_back(v[t]);
        }
    }
    return out;
}

}  // namespace pooledloss
