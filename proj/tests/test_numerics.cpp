#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "risedge/numerics.hpp"

using namespace risedge;

namespace {

ComplexMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng) { return complex_gaussian(r, c, 1.0, rng); }

Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
    Eigen::MatrixXcd e(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
    return e;
}

double max_unitary_defect(const ComplexMatrix& u) {
    const auto g = u.adjoint() * u;
    double d = 0.0;
    for (std::size_t r = 0; r < g.rows(); ++r)
        for (std::size_t c = 0; c < g.cols(); ++c) d = std::max(d, std::abs(g(r, c) - (r == c ? 1.0 : 0.0)));
    return d;
}

}  // namespace

TEST(HermitianEigh, IdentityHasUnitEigenvalues) {
    const auto e = hermitian_eigh(ComplexMatrix::identity(3));
    ASSERT_EQ(e.values.size(), 3u);
    for (double v : e.values) EXPECT_DOUBLE_EQ(v, 1.0);
    EXPECT_LT(max_unitary_defect(e.vectors), 1e-12);
}

TEST(HermitianEigh, DiagonalSortedDescending) {
    const std::vector<double> d{1.0, 4.0};
    const auto e = hermitian_eigh(ComplexMatrix::diagonal(d));
    EXPECT_DOUBLE_EQ(e.values[0], 4.0);
    EXPECT_DOUBLE_EQ(e.values[1], 1.0);
    // Permutation of the identity up to phase.
    EXPECT_NEAR(std::abs(e.vectors(1, 0)), 1.0, 1e-14);
    EXPECT_NEAR(std::abs(e.vectors(0, 1)), 1.0, 1e-14);
}

TEST(HermitianEigh, ReconstructsGramMatrices) {
    Rng rng(11);
    for (std::size_t n : {1u, 2u, 4u, 7u, 16u}) {
        const auto a = random_matrix(n + 1, n, rng);
        const auto m = a.adjoint() * a;
        const auto e = hermitian_eigh(m);
        const auto back = reconstruct(e.vectors, e.values);
        EXPECT_LT((back - m).frobenius_norm() / m.frobenius_norm(), 1e-8) << "n=" << n;
        EXPECT_LT(max_unitary_defect(e.vectors), 1e-8);
        for (std::size_t i = 1; i < n; ++i) EXPECT_GE(e.values[i - 1], e.values[i]);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(to_eigen(m));
        for (std::size_t i = 0; i < n; ++i)
            EXPECT_NEAR(e.values[i], ref.eigenvalues()(static_cast<Eigen::Index>(n - 1 - i)), 1e-9 * e.values[0]);
    }
}

TEST(HermitianEigh, RejectsBadInput) {
    EXPECT_THROW(hermitian_eigh(ComplexMatrix(2, 3)), std::invalid_argument);
    ComplexMatrix m(2, 2);
    m(0, 1) = cplx{1.0, 1.0};
    m(1, 0) = cplx{1.0, 1.0};  // should be the conjugate
    EXPECT_THROW(hermitian_eigh(m), std::invalid_argument);
}

TEST(LogdetPsd, SimpleCases) {
    EXPECT_DOUBLE_EQ(logdet_psd(ComplexMatrix::identity(4)), 0.0);
    const std::vector<double> d{1.0, 4.0};
    EXPECT_NEAR(logdet_psd(ComplexMatrix::diagonal(d)), std::log(4.0), 1e-15);
}

TEST(LogdetPsd, MatchesEigenvalueSumOfGram) {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_matrix(5, 4, rng);
        const auto g = a.adjoint() * a;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ref(to_eigen(g));
        double expect = 0.0;
        for (Eigen::Index i = 0; i < ref.eigenvalues().size(); ++i) expect += std::log1p(ref.eigenvalues()(i));
        EXPECT_NEAR(logdet_psd(g + ComplexMatrix::identity(4)), expect, 1e-8 * std::max(1.0, std::abs(expect)));
    }
}

TEST(LogdetPsd, MatchesPivotedLuOracle) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_matrix(6, 6, rng);
        const auto m = a.adjoint() * a + ComplexMatrix::identity(6) * cplx{0.5, 0.0};
        const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(to_eigen(m));
        double expect = 0.0;
        for (Eigen::Index i = 0; i < 6; ++i) expect += std::log(std::abs(lu.matrixLU()(i, i)));
        EXPECT_NEAR(logdet_psd(m), expect, 1e-8 * std::abs(expect));
    }
}

TEST(LogdetPsd, IndefiniteIsDomainError) {
    const std::vector<double> d{1.0, -0.5};
    EXPECT_THROW(logdet_psd(ComplexMatrix::diagonal(d)), std::domain_error);
}

TEST(ComplexGaussian, SecondMomentMatchesVariance) {
    Rng rng(1);
    for (double var : {1.0, 4.0}) {
        const auto m = complex_gaussian(1000, 100, var, rng);
        double s = 0.0;
        for (const auto& e : m.entries()) s += std::norm(e);
        EXPECT_NEAR(s / 1e5 / var, 1.0, 0.01) << "variance " << var;
    }
}

TEST(ComplexGaussian, CircularSymmetry) {
    Rng rng(2);
    const auto m = complex_gaussian(1000, 100, 1.0, rng);
    cplx pseudo{0.0, 0.0};
    double re2 = 0.0;
    for (const auto& e : m.entries()) {
        pseudo += e * e;
        re2 += e.real() * e.real();
    }
    EXPECT_LT(std::abs(pseudo) / 1e5, 0.02);
    EXPECT_NEAR(re2 / 1e5, 0.5, 0.01);
}

TEST(ComplexGaussian, SameSeedSameMatrix) {
    Rng a(77), b(77);
    EXPECT_EQ(complex_gaussian(3, 4, 2.0, a), complex_gaussian(3, 4, 2.0, b));
    EXPECT_THROW(complex_gaussian(1, 1, 0.0, a), std::invalid_argument);
}

TEST(ComplexMatrix, ShapeChecks) {
    EXPECT_THROW(ComplexMatrix(2, 2, std::vector<cplx>(3)), std::invalid_argument);
    EXPECT_THROW(ComplexMatrix(2, 3) * ComplexMatrix(2, 3), std::invalid_argument);
    EXPECT_THROW(ComplexMatrix(2, 3) + ComplexMatrix(3, 2), std::invalid_argument);
}
