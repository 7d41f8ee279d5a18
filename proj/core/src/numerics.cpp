#include "pooledloss/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace pooledloss {

namespace {

void check_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw NonFiniteCoefficient(std::string(what) + " produced NaN/Inf");
}

}  // namespace

MatrixPath integrate_matrix_ode(const std::function<Matrix(double)>& a, const TimeGrid& grid) {
    const double dt = grid.dt();
    MatrixPath out{grid, {}};
    out.mats.reserve(grid.points());

    Matrix psi = Matrix::Identity(a(0.0).rows(), a(0.0).cols());
    out.mats.push_back(psi);
    for (std::size_t i = 0; i < grid.steps(); ++i) {
        const double t = grid.time(i);
        const Matrix a1 = a(t);
        const Matrix a2 = a(t + 0.5 * dt);
        const Matrix a4 = a(t + dt);
        check_finite(a1, "integrate_matrix_ode: A(t)");
        check_finite(a2, "integrate_matrix_ode: A(t)");
        check_finite(a4, "integrate_matrix_ode: A(t)");
        const Matrix k1 = a1 * psi;
        const Matrix k2 = a2 * (psi + 0.5 * dt * k1);
        const Matrix k3 = a2 * (psi + 0.5 * dt * k2);
        const Matrix k4 = a4 * (psi + dt * k3);
        psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(psi, "integrate_matrix_ode: Psi");
        out.mats.push_back(psi);
    }
    return out;
}

MatrixPath integrate_matrix_sde(const std::function<Matrix(std::size_t)>& a, const Matrix& b,
                                std::span<const double> x_path, std::span<const double> sigma0_path,
                                const TimeGrid& grid) {
    if (x_path.size() != grid.points() || sigma0_path.size() != grid.points())
        throw GridMismatch("integrate_matrix_sde: path length does not match grid");
    for (double v : x_path)
        if (!std::isfinite(v)) throw NonFiniteCoefficient("integrate_matrix_sde: x path");
    for (double v : sigma0_path)
        if (!std::isfinite(v)) throw NonFiniteCoefficient("integrate_matrix_sde: sigma0 path");

    const double dt = grid.dt();
    MatrixPath out{grid, {}};
    out.mats.reserve(grid.points());

    Matrix psi = Matrix::Identity(b.rows(), b.cols());
    out.mats.push_back(psi);
    for (std::size_t i = 0; i < grid.steps(); ++i) {
        const Matrix ai = a(i);
        check_finite(ai, "integrate_matrix_sde: A(t)");
        const double dx = x_path[i + 1] - x_path[i];
        psi += ai * psi * dt + b * psi * dx;
        check_finite(psi, "integrate_matrix_sde: Psi");
        out.mats.push_back(psi);
    }
    return out;
}

PsdFactor psd_factor(const Matrix& sigma, double max_clip_ratio) {
    if (sigma.rows() != sigma.cols()) throw NotSymmetric("psd_factor: non-square input");
    const double scale = sigma.size() > 0 ? sigma.cwiseAbs().maxCoeff() : 0.0;
    const double tol = 1e-10 * (1.0 + scale);
    if (((sigma - sigma.transpose()).cwiseAbs().maxCoeff()) > tol)
        throw NotSymmetric("psd_factor: input is not symmetric");

    const Matrix sym = 0.5 * (sigma + sigma.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) throw NumericalError("psd_factor: eigendecomposition failed");

    Vector lam = eig.eigenvalues();
    double clipped = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam[i] < 0.0) {
            clipped += -lam[i];
            lam[i] = 0.0;
        }
    }
    const double trace = sym.trace();
    if (clipped > max_clip_ratio * std::max(trace, 0.0) + 1e-12)
        throw ExcessiveNegativity("psd_factor: clipped mass " + std::to_string(clipped));

    PsdFactor out;
    out.factor = eig.eigenvectors() * lam.cwiseSqrt().asDiagonal();
    out.clipped_mass = clipped;
    return out;
}

Vector mvn_sample(const Vector& mean, const PsdFactor& factor, NormalStream& rng) {
    if (factor.factor.rows() != mean.size())
        throw DimensionMismatch("mvn_sample: factor rows != mean size");
    Vector z(factor.factor.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean + factor.factor * z;
}

ConditionalGaussian conditional_gaussian(const Vector& mean, const Matrix& cov,
                                         std::span<const std::size_t> observed_idx,
                                         const Vector& observed_vals) {
    const Eigen::Index n = mean.size();
    if (cov.rows() != n || cov.cols() != n)
        throw DimensionMismatch("conditional_gaussian: cov size != mean size");
    if (static_cast<Eigen::Index>(observed_idx.size()) != observed_vals.size())
        throw DimensionMismatch("conditional_gaussian: observed idx/vals mismatch");

    std::vector<bool> is_obs(n, false);
    for (std::size_t idx : observed_idx) {
        if (idx >= static_cast<std::size_t>(n))
            throw DimensionMismatch("conditional_gaussian: observed index out of range");
        is_obs[idx] = true;
    }
    std::vector<std::size_t> free_idx;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!is_obs[i]) free_idx.push_back(static_cast<std::size_t>(i));

    const Eigen::Index no = static_cast<Eigen::Index>(observed_idx.size());
    const Eigen::Index nf = static_cast<Eigen::Index>(free_idx.size());

    Matrix sigma2(no, no);   // observed block
    Matrix sigma1(nf, no);   // cross block
    Matrix sigma11(nf, nf);  // free block
    Vector mu_o(no), mu_f(nf);
    for (Eigen::Index i = 0; i < no; ++i) {
        mu_o[i] = mean[observed_idx[i]];
        for (Eigen::Index j = 0; j < no; ++j) sigma2(i, j) = cov(observed_idx[i], observed_idx[j]);
    }
    for (Eigen::Index i = 0; i < nf; ++i) {
        mu_f[i] = mean[free_idx[i]];
        for (Eigen::Index j = 0; j < no; ++j) sigma1(i, j) = cov(free_idx[i], observed_idx[j]);
        for (Eigen::Index j = 0; j < nf; ++j) sigma11(i, j) = cov(free_idx[i], free_idx[j]);
    }

    const double ridge = 1e-12 * std::max(sigma2.trace(), 0.0);
    sigma2.diagonal().array() += ridge;

    Eigen::FullPivLU<Matrix> lu(sigma2);
    if (!lu.isInvertible())
        throw SingularObservedBlock("conditional_gaussian: observed block singular after ridge");

    const Matrix gain = sigma1 * lu.inverse();
    ConditionalGaussian out;
    out.mean = mu_f + gain * (observed_vals - mu_o);
    out.cov = sigma11 - gain * sigma1.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
    return out;
}

}  // namespace pooledloss
