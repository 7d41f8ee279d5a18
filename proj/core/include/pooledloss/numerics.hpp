#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pooledloss/rng.hpp"
#include "pooledloss/types.hpp"

namespace pooledloss {

// One square matrix per grid point, e.g. a fundamental solution Psi(t).
struct MatrixPath {
    TimeGrid grid;
    std::vector<Matrix> mats;
};

// Factor F with F F^T ~ Sigma after clipping negative eigenvalues to zero.
struct PsdFactor {
    Matrix factor;
    double clipped_mass = 0.0;  // sum of the magnitudes of clipped eigenvalues
};

// d Psi = A(t) Psi dt, Psi(0) = I, via classical RK4 on the grid.
// A is evaluated at step midpoints as well as grid points.
MatrixPath integrate_matrix_ode(const std::function<Matrix(double)>& a, const TimeGrid& grid);

// d Psi = A(t) Psi dt + B Psi dX, Psi(0) = I, Euler-Maruyama with left-point
// coefficients: Psi_{i+1} = Psi_i + A(t_i) Psi_i dt + B Psi_i (x_{i+1}-x_i).
// A is indexed by grid step. sigma0_path is the diffusion coefficient of X
// along the path; it is validated together with x_path.
MatrixPath integrate_matrix_sde(const std::function<Matrix(std::size_t)>& a, const Matrix& b,
                                std::span<const double> x_path, std::span<const double> sigma0_path,
                                const TimeGrid& grid);

// Spectral factorization with negative eigenvalues clipped to zero.
// Throws NotSymmetric for asymmetric input and ExcessiveNegativity when the
// clipped mass exceeds max_clip_ratio * trace (plus a round-off floor). The
// strict default suits exact covariances; callers factoring covariation
// matrices built from coarse-step Euler moments pass a larger budget, since
// the discretization error there shows up as indefiniteness that the
// clipping is meant to absorb.
PsdFactor psd_factor(const Matrix& sigma, double max_clip_ratio = 1e-6);

// Clip budget for covariation matrices along discretized moment
// trajectories. At the large-beta_s figure settings the Euler moment error
// puts percents of the trace into negative eigenvalues; beyond this share
// something is genuinely wrong upstream.
inline constexpr double kDiscretizedCovClipRatio = 0.25;

// mean + F z, z standard normal.
Vector mvn_sample(const Vector& mean, const PsdFactor& factor, NormalStream& rng);

struct ConditionalGaussian {
    Vector mean;
    Matrix cov;
};

// Gaussian conditioning of the unobserved coordinates on observed ones.
// The observed block is regularized with ridge 1e-12 * trace before solving;
// throws SingularObservedBlock if it is still singular.
ConditionalGaussian conditional_gaussian(const Vector& mean, const Matrix& cov,
                                         std::span<const std::size_t> observed_idx,
                                         const Vector& observed_vals);

}  // namespace pooledloss
