#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pooledloss/lln_moments.hpp"
#include "pooledloss/model.hpp"
#include "pooledloss/numerics.hpp"
#include "pooledloss/rng.hpp"
#include "pooledloss/types.hpp"

namespace pooledloss {

struct FluctuationConfig {
    int k = 6;            // truncation level of the fluctuation hierarchy
    Vector v0;            // initial fluctuation moments; empty means zero
    double dt_fluct = 0;  // Euler step for direct simulation; 0 = trajectory grid step,
                          // otherwise must subdivide it (u and x are interpolated)

    Vector initial(int k_level) const;
};

// Conditional quadratic covariation of the martingale forcing, per grid point.
struct CovariationPath {
    TimeGrid grid;
    std::vector<Matrix> sigma_m;
};

// Covariation matrix entry (k, j), built from LLN moments up to u_{2K+1}:
//   sigma^2 k j u_{k+j-1} + u_{k+j+1} - beta_c k u_{k-1} u_{j+1}
//   - beta_c j u_{j-1} u_{k+1} + beta_c^2 k j u_{k-1} u_{j-1} u_1.
// Terms with index -1 always carry a factor k or j and vanish.
Matrix covariation_matrix(const Vector& u, const ObligorParams& params, int k);

// covariation_matrix evaluated along the whole trajectory.
CovariationPath covariation_path(const MomentTrajectory& traj, int k);

struct FluctuationSamples {
    TimeGrid grid;
    std::vector<std::vector<Vector>> v;  // [sample][grid point], vectors of size K+1
};

// Scheme 1: direct Euler simulation of the fluctuation moment SDEs with
// conditionally Gaussian martingale increments drawn from the spectral
// factorization of the covariation matrix. All samples share the trajectory's
// (x, dV) path; sample j uses the substream (seed, martingale, j).
FluctuationSamples scheme1_sample_paths(const MomentTrajectory& traj, const SystematicRiskSpec& risk,
                                        const FluctuationConfig& cfg, std::size_t j_samples,
                                        std::uint64_t seed);

// Conditionally Gaussian law of the fluctuation moments along one systematic
// path: v(t) ~ N(Psi(t) v0, Sigma(t)) with
// Sigma(t1, t2) = Psi(t1) [ int_0^{t1 ^ t2} Psi^-1 Sigma_M Psi^-T ds ] Psi(t2)^T.
class ConditionalGaussianLaw {
public:
    ConditionalGaussianLaw(TimeGrid grid, Vector v0, std::vector<Matrix> psi,
                           std::vector<Matrix> inner);

    const TimeGrid& grid() const { return grid_; }
    int k() const { return static_cast<int>(psi_.front().rows()) - 1; }
    const Vector& v0() const { return v0_; }

    Vector mean_at(std::size_t i) const { return psi_[i] * v0_; }
    Vector mean(double t) const { return mean_at(grid_.index_of(t)); }
    Matrix cov_at(std::size_t i) const;
    Matrix cov(double t) const { return cov_at(grid_.index_of(t)); }
    Matrix cross_cov(double tau1, double tau2) const;

    const std::vector<Matrix>& psi() const { return psi_; }

private:
    TimeGrid grid_;
    Vector v0_;
    std::vector<Matrix> psi_;
    std::vector<Matrix> inner_;  // running integral of Psi^-1 Sigma_M Psi^-T
};

// beta_s = 0 case: the forced linear system is Gaussian outright. Psi solves
// the matrix ODE via RK4; throws RequiresZeroBetaS otherwise.
ConditionalGaussianLaw gaussian_case(const MomentTrajectory& traj, const FluctuationConfig& cfg);

// Scheme 2: fundamental solution of d Psi = A(t) Psi dt + B Psi dX with
// B = diag(k beta_s), Euler-Maruyama along the trajectory's X path; the
// remaining drift (including 0.5 k(k-1) (beta_s sigma0)^2) stays in A(t).
// Throws IllConditionedPsi when cond(Psi) exceeds 1e12.
ConditionalGaussianLaw scheme2_conditional_law(const MomentTrajectory& traj,
                                               const SystematicRiskSpec& risk,
                                               const FluctuationConfig& cfg,
                                               std::span<const double> dv_path);

// Cov[v(tau1), v(tau2)] given the systematic path.
Matrix cross_covariance(const ConditionalGaussianLaw& law, double tau1, double tau2);

// Sequential conditional sampling of v at an increasing subset of grid times:
// latest time from the marginal, earlier times from the Gaussian bridge given
// the nearest already-sampled neighbours.
std::vector<Vector> sample_skeleton(const ConditionalGaussianLaw& law, std::span<const double> times,
                                    NormalStream& rng);

}  // namespace pooledloss
