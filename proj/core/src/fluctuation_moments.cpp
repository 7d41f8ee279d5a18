#include "pooledloss/fluctuation_moments.hpp"

#include <algorithm>
#include <cmath>

namespace pooledloss {

namespace {

constexpr double kBlowupLimit = 1e12;
constexpr double kConditionLimit = 1e12;

// Drift matrix of the linear fluctuation system, excluding the k beta_s b0
// term (it belongs to the B dX part in the dX formulation; for beta_s = 0 it
// vanishes anyway).
Matrix fluct_drift_matrix(const Vector& u, const ObligorParams& p, int kk, double sigma0) {
    Matrix a = Matrix::Zero(kk + 1, kk + 1);
    const double bs_s0 = p.beta_s * sigma0;
    for (int k = 0; k <= kk; ++k) {
        const double dk = static_cast<double>(k);
        a(k, k) += -dk * p.alpha + 0.5 * dk * (dk - 1.0) * bs_s0 * bs_s0;
        if (k > 0) {
            a(k, k - 1) += 0.5 * p.sigma * p.sigma * dk * (dk - 1.0) + p.alpha * p.lambda_bar * dk +
                           dk * p.beta_c * u[1];
            a(k, 1) += p.beta_c * dk * u[k - 1];
        }
        if (k < kk) a(k, k + 1) -= 1.0;
    }
    return a;
}

void require_moments(const MomentTrajectory& traj, int k) {
    if (k < 1) throw ConfigError("fluctuation truncation level must be >= 1");
    if (traj.k_lln < 2 * k + 1)
        throw MomentVectorTooShort("need LLN moments up to 2K+1 = " + std::to_string(2 * k + 1) +
                                   ", have K_lln = " + std::to_string(traj.k_lln));
}

double condition_estimate(const Matrix& m, const Matrix& m_inv) {
    const double n1 = m.cwiseAbs().colwise().sum().maxCoeff();
    const double n2 = m_inv.cwiseAbs().colwise().sum().maxCoeff();
    return n1 * n2;
}

// Shared tail of gaussian_case / scheme2: invert Psi per grid point and
// accumulate the inner integral by the trapezoidal rule.
ConditionalGaussianLaw assemble_law(const MomentTrajectory& traj, const FluctuationConfig& cfg,
                                    std::vector<Matrix> psi) {
    const int kk = cfg.k;
    const std::size_t points = traj.grid.points();
    std::vector<Matrix> inner(points);

    Matrix c = Matrix::Zero(kk + 1, kk + 1);
    Matrix g_prev;
    for (std::size_t i = 0; i < points; ++i) {
        Eigen::PartialPivLU<Matrix> lu(psi[i]);
        const Matrix psi_inv = lu.inverse();
        if (!psi_inv.allFinite() || condition_estimate(psi[i], psi_inv) > kConditionLimit)
            throw IllConditionedPsi("fundamental solution condition number exceeds 1e12 at t=" +
                                    std::to_string(traj.grid.time(i)));
        const Matrix g = psi_inv * covariation_matrix(traj.u[i], traj.params, kk) * psi_inv.transpose();
        if (i > 0) c += 0.5 * traj.grid.dt() * (g_prev + g);
        inner[i] = c;
        g_prev = g;
    }
    return ConditionalGaussianLaw(traj.grid, cfg.initial(kk), std::move(psi), std::move(inner));
}

}  // namespace

Vector FluctuationConfig::initial(int k_level) const {
    if (v0.size() == 0) return Vector::Zero(k_level + 1);
    if (v0.size() != k_level + 1)
        throw DimensionMismatch("FluctuationConfig: v0 must have K+1 entries");
    return v0;
}

Matrix covariation_matrix(const Vector& u, const ObligorParams& params, int k) {
    if (u.size() < 2 * k + 2)
        throw MomentVectorTooShort("covariation_matrix: need moments up to index 2K+1");
    Matrix sigma(k + 1, k + 1);
    const double s_sq = params.sigma * params.sigma;
    const double bc = params.beta_c;
    for (int a = 0; a <= k; ++a) {
        for (int b = a; b <= k; ++b) {
            const double da = static_cast<double>(a);
            const double db = static_cast<double>(b);
            double v = u[a + b + 1];
            if (a > 0 && b > 0) v += s_sq * da * db * u[a + b - 1];
            if (a > 0) v -= bc * da * u[a - 1] * u[b + 1];
            if (b > 0) v -= bc * db * u[b - 1] * u[a + 1];
            if (a > 0 && b > 0) v += bc * bc * da * db * u[a - 1] * u[b - 1] * u[1];
            sigma(a, b) = v;
            sigma(b, a) = v;
        }
    }
    return sigma;
}

CovariationPath covariation_path(const MomentTrajectory& traj, int k) {
    require_moments(traj, k);
    CovariationPath path{traj.grid, {}};
    path.sigma_m.reserve(traj.u.size());
    for (const Vector& u : traj.u) path.sigma_m.push_back(covariation_matrix(u, traj.params, k));
    return path;
}

FluctuationSamples scheme1_sample_paths(const MomentTrajectory& traj, const SystematicRiskSpec& risk,
                                        const FluctuationConfig& cfg, std::size_t j_samples,
                                        std::uint64_t seed) {
    require_moments(traj, cfg.k);
    const int kk = cfg.k;
    const TimeGrid& grid = traj.grid;
    const double dt = grid.dt();

    // Optional subdivision of the trajectory grid for stability. u and x are
    // interpolated linearly; each coarse dV increment is split evenly so the
    // total noise consumed per coarse step is unchanged.
    std::size_t refine = 1;
    if (cfg.dt_fluct > 0.0) {
        const double ratio = dt / cfg.dt_fluct;
        refine = static_cast<std::size_t>(std::llround(ratio));
        if (refine == 0 || std::abs(ratio - static_cast<double>(refine)) > 1e-9)
            throw BadGrid("dt_fluct must subdivide the trajectory grid step");
    }
    const double dtf = dt / static_cast<double>(refine);
    const std::size_t fine_steps = grid.steps() * refine;

    // Per fine step: interpolated moments, risk coefficients at interpolated x,
    // and the spectral factor of the covariation matrix (shared by all samples).
    std::vector<Vector> u_fine(fine_steps + 1);
    std::vector<double> b0_fine(fine_steps), s0_fine(fine_steps);
    std::vector<PsdFactor> factor_fine(fine_steps);
    for (std::size_t s = 0; s <= fine_steps; ++s) {
        const std::size_t ci = s / refine;
        const std::size_t r = s % refine;
        if (r == 0) {
            u_fine[s] = traj.u[ci];
        } else {
            const double w = static_cast<double>(r) / static_cast<double>(refine);
            u_fine[s] = (1.0 - w) * traj.u[ci] + w * traj.u[ci + 1];
        }
        if (s < fine_steps) {
            const double xw = (r == 0) ? traj.x_path[ci]
                                       : (1.0 - static_cast<double>(r) / refine) * traj.x_path[ci] +
                                             (static_cast<double>(r) / refine) * traj.x_path[ci + 1];
            const auto [b0, s0] = eval_risk_coeffs(risk, xw);
            b0_fine[s] = b0;
            s0_fine[s] = s0;
        }
    }
    for (std::size_t s = 0; s < fine_steps; ++s)
        factor_fine[s] = psd_factor(covariation_matrix(u_fine[s], traj.params, kk),
                                    kDiscretizedCovClipRatio);

    const ObligorParams& p = traj.params;
    const double sq_dtf = std::sqrt(dtf);

    FluctuationSamples out{grid, {}};
    out.v.assign(j_samples, {});

    for (std::size_t j = 0; j < j_samples; ++j) {
        NormalStream rng = make_stream(seed, {salt::kMartingale, j});
        Vector v = cfg.initial(kk);
        Vector z(kk + 1), dm(kk + 1), dv_drift(kk + 1);

        auto& path = out.v[j];
        path.reserve(grid.points());
        path.push_back(v);

        for (std::size_t s = 0; s < fine_steps; ++s) {
            const Vector& u = u_fine[s];
            const double b0 = b0_fine[s];
            const double s0 = s0_fine[s];
            const double dv_sub = traj.dv_path[s / refine] / static_cast<double>(refine);

            for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
            dm.noalias() = sq_dtf * (factor_fine[s].factor * z);

            const double u1 = u[1];
            for (int k = 0; k <= kk; ++k) {
                const double dk = static_cast<double>(k);
                double drift = (dk * p.beta_s * b0 - dk * p.alpha +
                                0.5 * dk * (dk - 1.0) * (p.beta_s * s0) * (p.beta_s * s0)) *
                               v[k];
                if (k > 0) {
                    drift += p.beta_c * dk * u[k - 1] * v[1];
                    drift += (0.5 * p.sigma * p.sigma * dk * (dk - 1.0) + p.alpha * p.lambda_bar * dk +
                              dk * p.beta_c * u1) *
                             v[k - 1];
                }
                if (k < kk) drift -= v[k + 1];
                dv_drift[k] = drift * dtf + dk * p.beta_s * s0 * v[k] * dv_sub;
            }
            v += dv_drift + dm;

            for (int k = 0; k <= kk; ++k)
                if (!(std::abs(v[k]) < kBlowupLimit))
                    throw UnstableBlowup("scheme1: |v_" + std::to_string(k) +
                                         "| blew up; reduce dt_fluct");
            if ((s + 1) % refine == 0) path.push_back(v);
        }
    }
    return out;
}

ConditionalGaussianLaw gaussian_case(const MomentTrajectory& traj, const FluctuationConfig& cfg) {
    require_moments(traj, cfg.k);
    if (traj.params.beta_s != 0.0)
        throw RequiresZeroBetaS("gaussian_case: requires beta_s = 0; use scheme 1 or scheme 2");

    const int kk = cfg.k;
    const TimeGrid& grid = traj.grid;
    const double dt = grid.dt();

    // A(t) with u interpolated linearly between grid points (RK4 midpoints).
    auto a_of_t = [&](double t) {
        const double pos = t / dt;
        std::size_t i = static_cast<std::size_t>(pos);
        if (i >= grid.steps()) i = grid.steps() - 1;
        const double w = std::min(std::max(pos - static_cast<double>(i), 0.0), 1.0);
        const Vector u = (1.0 - w) * traj.u[i] + w * traj.u[i + 1];
        return fluct_drift_matrix(u, traj.params, kk, 0.0);
    };

    MatrixPath psi = integrate_matrix_ode(a_of_t, grid);
    return assemble_law(traj, cfg, std::move(psi.mats));
}

ConditionalGaussianLaw scheme2_conditional_law(const MomentTrajectory& traj,
                                               const SystematicRiskSpec& risk,
                                               const FluctuationConfig& cfg,
                                               std::span<const double> dv_path) {
    require_moments(traj, cfg.k);
    if (dv_path.size() != traj.grid.steps())
        throw GridMismatch("scheme2: dV path length does not match grid");

    const int kk = cfg.k;
    Matrix b = Matrix::Zero(kk + 1, kk + 1);
    for (int k = 0; k <= kk; ++k) b(k, k) = static_cast<double>(k) * traj.params.beta_s;

    std::vector<double> sigma0(traj.grid.points());
    for (std::size_t i = 0; i < traj.grid.points(); ++i)
        sigma0[i] = eval_risk_coeffs(risk, traj.x_path[i]).second;

    auto a_of_i = [&](std::size_t i) {
        return fluct_drift_matrix(traj.u[i], traj.params, kk, sigma0[i]);
    };

    MatrixPath psi = integrate_matrix_sde(a_of_i, b, traj.x_path, sigma0, traj.grid);
    return assemble_law(traj, cfg, std::move(psi.mats));
}

ConditionalGaussianLaw::ConditionalGaussianLaw(TimeGrid grid, Vector v0, std::vector<Matrix> psi,
                                               std::vector<Matrix> inner)
    : grid_(grid), v0_(std::move(v0)), psi_(std::move(psi)), inner_(std::move(inner)) {}

Matrix ConditionalGaussianLaw::cov_at(std::size_t i) const {
    Matrix s = psi_[i] * inner_[i] * psi_[i].transpose();
    return 0.5 * (s + s.transpose()).eval();
}

Matrix ConditionalGaussianLaw::cross_cov(double tau1, double tau2) const {
    const std::size_t i1 = grid_.index_of(tau1);
    const std::size_t i2 = grid_.index_of(tau2);
    return psi_[i1] * inner_[std::min(i1, i2)] * psi_[i2].transpose();
}

Matrix cross_covariance(const ConditionalGaussianLaw& law, double tau1, double tau2) {
    return law.cross_cov(tau1, tau2);
}

std::vector<Vector> sample_skeleton(const ConditionalGaussianLaw& law, std::span<const double> times,
                                    NormalStream& rng) {
    if (times.empty()) throw ConfigError("sample_skeleton: no times requested");
    for (std::size_t i = 0; i < times.size(); ++i) {
        law.grid().index_of(times[i]);  // throws TimeOffGrid if off-grid
        if (i > 0 && !(times[i] > times[i - 1]))
            throw ConfigError("sample_skeleton: times must be strictly increasing");
    }

    const int d = law.k() + 1;
    const std::size_t m = times.size();
    std::vector<Vector> sampled(m);

    // Latest time from the marginal law.
    sampled[m - 1] = mvn_sample(law.mean(times[m - 1]),
                                psd_factor(law.cov(times[m - 1]), kDiscretizedCovClipRatio), rng);
    if (m == 1) return sampled;

    // Remaining times in increasing order. Each conditions on the nearest
    // sampled neighbour on each side; the fluctuation moments are Gauss-Markov
    // given X, so bracketing points carry all the information.
    for (std::size_t r = 0; r + 1 < m; ++r) {
        const double t = times[r];
        const double t_above = times[m - 1];  // nearest sampled time above t
        const bool has_below = r > 0;

        const int blocks = has_below ? 3 : 2;
        const Eigen::Index dim = static_cast<Eigen::Index>(blocks) * d;
        Vector mean(dim);
        Matrix cov(dim, dim);
        std::vector<double> block_times = {t, t_above};
        if (has_below) block_times.push_back(times[r - 1]);
        for (int a = 0; a < blocks; ++a) {
            mean.segment(a * d, d) = law.mean(block_times[a]);
            for (int b2 = 0; b2 < blocks; ++b2)
                cov.block(a * d, b2 * d, d, d) = law.cross_cov(block_times[a], block_times[b2]);
        }

        std::vector<std::size_t> obs_idx;
        Vector obs_vals((blocks - 1) * d);
        for (int a = 1; a < blocks; ++a)
            for (int q = 0; q < d; ++q) obs_idx.push_back(static_cast<std::size_t>(a * d + q));
        obs_vals.segment(0, d) = sampled[m - 1];
        if (has_below) obs_vals.segment(d, d) = sampled[r - 1];

        const ConditionalGaussian cg = conditional_gaussian(mean, cov, obs_idx, obs_vals);
        sampled[r] = mvn_sample(cg.mean, psd_factor(cg.cov, kDiscretizedCovClipRatio), rng);
    }

    return sampled;
}

}  // namespace pooledloss
