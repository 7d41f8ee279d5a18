#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pooledloss/numerics.hpp"

using namespace pooledloss;

TEST(MatrixOde, ZeroGeneratorGivesIdentity) {
    const TimeGrid grid(1.0, 0.05);
    auto a = [](double) { return Matrix::Zero(3, 3); };
    const MatrixPath path = integrate_matrix_ode(a, grid);
    ASSERT_EQ(path.mats.size(), grid.points());
    for (const Matrix& m : path.mats)
        EXPECT_NEAR((m - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.0, 0.0);
}

TEST(MatrixOde, ConstantDiagonalMatchesExponential) {
    const TimeGrid grid(1.0, 0.01);
    Matrix a0 = Matrix::Zero(2, 2);
    a0(0, 0) = 0.8;
    a0(1, 1) = -1.3;
    auto a = [&](double) { return a0; };
    const MatrixPath path = integrate_matrix_ode(a, grid);
    for (std::size_t i = 0; i < path.mats.size(); ++i) {
        const double t = grid.time(i);
        EXPECT_NEAR(path.mats[i](0, 0), std::exp(0.8 * t), 1e-8);
        EXPECT_NEAR(path.mats[i](1, 1), std::exp(-1.3 * t), 1e-8);
        EXPECT_NEAR(path.mats[i](0, 1), 0.0, 1e-12);
    }
}

TEST(MatrixOde, StartsAtIdentity) {
    const TimeGrid grid(0.5, 0.25);
    Matrix a0 = Matrix::Random(4, 4);
    auto a = [&](double) { return a0; };
    const MatrixPath path = integrate_matrix_ode(a, grid);
    EXPECT_EQ((path.mats[0] - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(MatrixOde, FourthOrderConvergence) {
    Matrix a0 = Matrix::Zero(1, 1);
    a0(0, 0) = 1.7;
    auto a = [&](double) { return a0; };
    const double exact = std::exp(1.7);
    const double err_coarse =
        std::abs(integrate_matrix_ode(a, TimeGrid(1.0, 0.02)).mats.back()(0, 0) - exact);
    const double err_fine =
        std::abs(integrate_matrix_ode(a, TimeGrid(1.0, 0.01)).mats.back()(0, 0) - exact);
    EXPECT_GE(err_coarse / err_fine, 8.0);
}

TEST(MatrixOde, RejectsNonFiniteCoefficients) {
    const TimeGrid grid(1.0, 0.5);
    auto a = [](double t) {
        Matrix m = Matrix::Zero(2, 2);
        if (t > 0.2) m(0, 0) = std::numeric_limits<double>::quiet_NaN();
        return m;
    };
    EXPECT_THROW(integrate_matrix_ode(a, grid), NonFiniteCoefficient);
}

TEST(MatrixSde, DegeneratesToOdeWithoutNoise) {
    const TimeGrid grid(1.0, 0.01);
    Matrix a0(2, 2);
    a0 << 0.0, 1.0, -1.0, 0.0;
    auto a_t = [&](double) { return a0; };
    auto a_i = [&](std::size_t) { return a0; };
    const std::vector<double> x(grid.points(), 0.0), s0(grid.points(), 0.0);
    const MatrixPath ode = integrate_matrix_ode(a_t, grid);
    const MatrixPath sde = integrate_matrix_sde(a_i, Matrix::Zero(2, 2), x, s0, grid);
    const double tol = 10.0 * grid.dt();
    for (std::size_t i = 0; i < grid.points(); ++i)
        EXPECT_LE((ode.mats[i] - sde.mats[i]).cwiseAbs().maxCoeff(), tol);
}

TEST(MatrixSde, PureNoiseIsAProductRecursion) {
    const TimeGrid grid(1.0, 0.1);
    const double b = 0.3;
    std::vector<double> x(grid.points()), s0(grid.points(), 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.37 * static_cast<double>(i));
    auto a = [&](std::size_t) { return Matrix::Zero(2, 2); };
    const MatrixPath path = integrate_matrix_sde(a, b * Matrix::Identity(2, 2), x, s0, grid);
    double prod = 1.0;
    for (std::size_t i = 0; i < grid.steps(); ++i) {
        prod *= 1.0 + b * (x[i + 1] - x[i]);
        EXPECT_NEAR(path.mats[i + 1](0, 0), prod, 1e-12);
        EXPECT_NEAR(path.mats[i + 1](1, 1), prod, 1e-12);
        EXPECT_NEAR(path.mats[i + 1](0, 1), 0.0, 1e-15);
    }
}

TEST(MatrixSde, NonCommutingPartsHaveNoExponentialSolution) {
    // Coarse zig-zag path: the ordered product differs from exp(A t + B X_t).
    const TimeGrid grid(1.0, 0.5);
    Matrix a0(2, 2), b0(2, 2);
    a0 << 0.0, 1.0, 0.0, 0.0;
    b0 << 0.0, 0.0, 1.0, 0.0;
    auto a = [&](std::size_t) { return a0; };
    const std::vector<double> x = {0.0, 1.0, 0.0};
    const std::vector<double> s0(3, 1.0);
    const MatrixPath path = integrate_matrix_sde(a, b0, x, s0, grid);
    const Matrix claimed = oracles::mat_exp(a0 * 1.0 + b0 * x.back());
    EXPECT_GT((path.mats.back() - claimed).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(MatrixSde, RejectsMismatchedPaths) {
    const TimeGrid grid(1.0, 0.5);
    auto a = [](std::size_t) { return Matrix::Zero(1, 1); };
    const std::vector<double> bad(2, 0.0), good(3, 0.0);
    EXPECT_THROW(integrate_matrix_sde(a, Matrix::Zero(1, 1), bad, good, grid), GridMismatch);
}

TEST(PsdFactor, IdentityPassesThrough) {
    const PsdFactor f = psd_factor(Matrix::Identity(3, 3));
    EXPECT_DOUBLE_EQ(f.clipped_mass, 0.0);
    EXPECT_NEAR((f.factor * f.factor.transpose() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(),
                0.0, 1e-12);
}

TEST(PsdFactor, RankDeficientReconstruction) {
    Matrix s(2, 2);
    s << 1.0, 1.0, 1.0, 1.0;  // eigenvalues {2, 0}
    const PsdFactor f = psd_factor(s);
    EXPECT_NEAR((f.factor * f.factor.transpose() - s).cwiseAbs().maxCoeff(), 0.0, 1e-10);
}

TEST(PsdFactor, ClipsRoundoffNegativity) {
    Matrix s(2, 2);
    s << 1e-16, 0.0, 0.0, -1e-14;
    const PsdFactor f = psd_factor(s);
    EXPECT_DOUBLE_EQ(f.clipped_mass, 1e-14);
    const Matrix rec = f.factor * f.factor.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(rec);
    EXPECT_GE(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(PsdFactor, RejectsAsymmetricAndBroken) {
    Matrix asym(2, 2);
    asym << 0.0, 1.0, 0.0, 0.0;
    EXPECT_THROW(psd_factor(asym), NotSymmetric);
    Matrix broken(2, 2);
    broken << 1.0, 0.0, 0.0, -0.1;
    EXPECT_THROW(psd_factor(broken), ExcessiveNegativity);
}

TEST(PsdFactor, QuadraticFormStaysNonnegative) {
    NormalStream rng(11);
    Matrix s(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j <= i; ++j) s(i, j) = s(j, i) = rng.normal();
    // make it nearly PSD with a tiny negative tail, then clip
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
    Vector lam = eig.eigenvalues().cwiseMax(0.0);
    lam[0] = -1e-13;
    const Matrix nearly = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
    const PsdFactor f = psd_factor(0.5 * (nearly + nearly.transpose()));
    const Matrix rec = f.factor * f.factor.transpose();
    for (int trial = 0; trial < 100; ++trial) {
        Vector z(4);
        for (int i = 0; i < 4; ++i) z[i] = rng.normal();
        EXPECT_GE(z.dot(rec * z), -1e-12);
    }
}

TEST(MvnSample, ZeroFactorReturnsMean) {
    Vector mean(3);
    mean << 1.0, -2.0, 0.5;
    PsdFactor f{Matrix::Zero(3, 3), 0.0};
    NormalStream rng(1);
    const Vector s = mvn_sample(mean, f, rng);
    EXPECT_EQ((s - mean).cwiseAbs().maxCoeff(), 0.0);
}

TEST(MvnSample, FixedSeedIsDeterministic) {
    const PsdFactor f = psd_factor(Matrix::Identity(2, 2));
    NormalStream a(99), b(99);
    const Vector mean = Vector::Zero(2);
    for (int i = 0; i < 10; ++i) {
        const Vector sa = mvn_sample(mean, f, a);
        const Vector sb = mvn_sample(mean, f, b);
        EXPECT_EQ((sa - sb).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(MvnSample, SampleCovarianceConverges) {
    const int n = 100000;
    Matrix target(2, 2);
    target << 1.0, 0.0, 0.0, 1.0;
    const PsdFactor f = psd_factor(target);
    NormalStream rng(7);
    Matrix acc = Matrix::Zero(2, 2);
    const Vector mean = Vector::Zero(2);
    for (int i = 0; i < n; ++i) {
        const Vector s = mvn_sample(mean, f, rng);
        acc += s * s.transpose();
    }
    acc /= static_cast<double>(n);
    EXPECT_NEAR(acc(0, 0), 1.0, 0.05);
    EXPECT_NEAR(acc(1, 1), 1.0, 0.05);
    EXPECT_NEAR(acc(0, 1), 0.0, 0.05);
}

TEST(MvnSample, CovarianceConvergesToPsdProjection) {
    Matrix s(2, 2);
    s << 1.0, 1.0, 1.0, 1.0;
    const PsdFactor f = psd_factor(s);
    NormalStream rng(5);
    Matrix acc = Matrix::Zero(2, 2);
    const Vector mean = Vector::Zero(2);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Vector v = mvn_sample(mean, f, rng);
        acc += v * v.transpose();
    }
    acc /= static_cast<double>(n);
    EXPECT_NEAR(acc(0, 0), 1.0, 0.05);
    EXPECT_NEAR(acc(0, 1), 1.0, 0.05);
}

TEST(MvnSample, RejectsDimensionMismatch) {
    const PsdFactor f = psd_factor(Matrix::Identity(2, 2));
    NormalStream rng(1);
    EXPECT_THROW(mvn_sample(Vector::Zero(3), f, rng), DimensionMismatch);
}

TEST(ConditionalGaussian, IndependentBlocksKeepPrior) {
    Vector mean(3);
    mean << 1.0, 2.0, 3.0;
    Matrix cov = Matrix::Zero(3, 3);
    cov.diagonal() << 1.0, 2.0, 3.0;
    const std::vector<std::size_t> obs = {2};
    Vector vals(1);
    vals << 10.0;
    const auto cg = conditional_gaussian(mean, cov, obs, vals);
    EXPECT_NEAR(cg.mean[0], 1.0, 1e-12);
    EXPECT_NEAR(cg.mean[1], 2.0, 1e-12);
    EXPECT_NEAR(cg.cov(0, 0), 1.0, 1e-9);
    EXPECT_NEAR(cg.cov(1, 1), 2.0, 1e-9);
}

TEST(ConditionalGaussian, PerfectCorrelationPinsValue) {
    Vector mean = Vector::Zero(2);
    Matrix cov(2, 2);
    cov << 1.0, 1.0, 1.0, 1.0;
    const std::vector<std::size_t> obs = {1};
    Vector vals(1);
    vals << 0.37;
    const auto cg = conditional_gaussian(mean, cov, obs, vals);
    EXPECT_NEAR(cg.mean[0], 0.37, 1e-9);
    EXPECT_NEAR(cg.cov(0, 0), 0.0, 1e-9);
}

TEST(ConditionalGaussian, MatchesRegressionOracle) {
    // Independent route: solve the normal equations with a dense LDLT.
    NormalStream rng(3);
    Matrix g(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g(i, j) = rng.normal();
    const Matrix cov = g * g.transpose() + 0.1 * Matrix::Identity(3, 3);
    Vector mean(3);
    mean << 0.3, -0.1, 0.7;
    const std::vector<std::size_t> obs = {0, 2};
    Vector vals(2);
    vals << 1.0, -0.5;

    const auto cg = conditional_gaussian(mean, cov, obs, vals);

    Matrix s2(2, 2);
    s2 << cov(0, 0), cov(0, 2), cov(2, 0), cov(2, 2);
    Vector s1(2);
    s1 << cov(1, 0), cov(1, 2);
    Vector rhs(2);
    rhs << vals[0] - mean[0], vals[1] - mean[2];
    const Vector beta = s2.ldlt().solve(rhs);
    const double oracle_mean = mean[1] + s1.dot(beta);
    const double oracle_var = cov(1, 1) - s1.dot(s2.ldlt().solve(s1));
    EXPECT_NEAR(cg.mean[0], oracle_mean, 1e-8);
    EXPECT_NEAR(cg.cov(0, 0), oracle_var, 1e-8);
}

TEST(ConditionalGaussian, CovarianceSymmetricPsd) {
    NormalStream rng(17);
    Matrix g(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) g(i, j) = rng.normal();
    const Matrix cov = g * g.transpose();
    const std::vector<std::size_t> obs = {1, 3};
    Vector vals(2);
    vals << 0.0, 1.0;
    const auto cg = conditional_gaussian(Vector::Zero(5), cov, obs, vals);
    EXPECT_LE((cg.cov - cg.cov.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cg.cov);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9);
}

TEST(ConditionalGaussian, SingularObservedBlockThrows) {
    const Matrix cov = Matrix::Zero(2, 2);
    const std::vector<std::size_t> obs = {1};
    Vector vals(1);
    vals << 1.0;
    EXPECT_THROW(conditional_gaussian(Vector::Zero(2), cov, obs, vals), SingularObservedBlock);
}
