#pragma once

// Small dense complex linear algebra: the channel model and the covariance
// solver only ever touch matrices of a few dozen rows, so everything here is
// plain row-major storage plus a cyclic Jacobi eigensolver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risedge {

using cplx = std::complex<double>;

/// One generator type for every random draw in the library.
using Rng = std::mt19937_64;

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_) {
            throw std::invalid_argument("ComplexMatrix: entry count " + std::to_string(data_.size()) +
                                        " does not match " + std::to_string(rows_) + "x" +
                                        std::to_string(cols_));
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix diagonal(std::span<const double> d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    cplx& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<cplx> entries() noexcept { return data_; }
    std::span<const cplx> entries() const noexcept { return data_; }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    cplx trace() const {
        require_square("trace");
        cplx t{0.0, 0.0};
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    /// Largest element-wise |M - M^H|.
    double hermitian_defect() const {
        if (!is_square()) return std::numeric_limits<double>::infinity();
        double d = 0.0;
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = r; c < cols_; ++c)
                d = std::max(d, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
        return d;
    }

    bool is_hermitian(double tol = 1e-10) const { return hermitian_defect() < tol; }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o, "+=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o, "-=");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    ComplexMatrix& operator*=(cplx s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) {
            throw std::invalid_argument("ComplexMatrix product: inner dimensions " +
                                        std::to_string(a.cols_) + " and " + std::to_string(b.rows_) +
                                        " differ");
        }
        ComplexMatrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{0.0, 0.0}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    void require_square(const char* what) const {
        if (!is_square()) throw std::invalid_argument(std::string(what) + ": matrix is not square");
    }
    void require_same_shape(const ComplexMatrix& o, const char* what) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument(std::string("ComplexMatrix ") + what + ": shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

struct EigenDecomposition {
    std::vector<double> values;  // descending
    ComplexMatrix vectors;       // column i pairs with values[i]
};

inline constexpr double kHermitianTolerance = 1e-10;

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
/// Stops once the off-diagonal Frobenius mass drops below 1e-12 of the total
/// (or after 100 sweeps).
inline EigenDecomposition hermitian_eigh(const ComplexMatrix& m) {
    if (!m.is_square()) {
        throw std::invalid_argument("hermitian_eigh: expected a square matrix, got " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    const double scale = std::max(1.0, m.max_abs());
    if (m.hermitian_defect() >= kHermitianTolerance * scale) {
        throw std::invalid_argument("hermitian_eigh: matrix is not Hermitian (defect " +
                                    std::to_string(m.hermitian_defect()) + ")");
    }

    const std::size_t n = m.rows();
    ComplexMatrix a = m;
    ComplexMatrix v = ComplexMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();

    const double total = a.frobenius_norm();
    auto off_mass = [&] {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                if (r != c) s += std::norm(a(r, c));
        return std::sqrt(s);
    };

    constexpr int kMaxSweeps = 100;
    constexpr double kOffTolerance = 1e-12;
    for (int sweep = 0; sweep < kMaxSweeps && total > 0.0; ++sweep) {
        if (off_mass() <= kOffTolerance * total) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag == 0.0) continue;
                // Phase rotation makes a(p,q) real, then a real Jacobi rotation
                // annihilates it. J = diag(1, e^{-i theta}) * [[c, s], [-s, c]].
                const cplx phase = std::conj(a(p, q)) / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const cplx j00 = c;
                const cplx j01 = s;
                const cplx j10 = -s * phase;
                const cplx j11 = c * phase;

                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = a(k, p);
                    const cplx akq = a(k, q);
                    a(k, p) = akp * j00 + akq * j10;
                    a(k, q) = akp * j01 + akq * j11;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = a(p, k);
                    const cplx aqk = a(q, k);
                    a(p, k) = std::conj(j00) * apk + std::conj(j10) * aqk;
                    a(q, k) = std::conj(j01) * apk + std::conj(j11) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx vkp = v(k, p);
                    const cplx vkq = v(k, q);
                    v(k, p) = vkp * j00 + vkq * j10;
                    v(k, q) = vkp * j01 + vkq * j11;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x).real() > a(y, y).real(); });

    EigenDecomposition out{std::vector<double>(n), ComplexMatrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = a(order[i], order[i]).real();
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, i) = v(r, order[i]);
    }
    return out;
}

/// U diag(d) U^H.
inline ComplexMatrix reconstruct(const ComplexMatrix& u, std::span<const double> d) {
    ComplexMatrix ud = u;
    for (std::size_t r = 0; r < u.rows(); ++r)
        for (std::size_t c = 0; c < u.cols(); ++c) ud(r, c) *= d[c];
    return ud * u.adjoint();
}

/// ln|m| for a Hermitian positive semidefinite matrix. Eigenvalues in
/// [-1e-10, 0] are clamped to zero (the result is then -inf); anything more
/// negative is a domain error.
inline double logdet_psd(const ComplexMatrix& m) {
    const auto eig = hermitian_eigh(m);
    if (eig.values.empty()) return 0.0;
    if (eig.values.back() < -kHermitianTolerance) {
        throw std::domain_error("logdet_psd: matrix is indefinite (min eigenvalue " +
                                std::to_string(eig.values.back()) + ")");
    }
    double s = 0.0;
    for (double lam : eig.values) s += std::log(std::max(lam, 0.0));
    return s;
}

/// Circularly-symmetric complex Gaussian entries with E|x|^2 = variance.
inline ComplexMatrix complex_gaussian(std::size_t rows, std::size_t cols, double variance, Rng& rng) {
    if (!(variance > 0.0)) throw std::invalid_argument("complex_gaussian: variance must be positive");
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    ComplexMatrix out(rows, cols);
    for (auto& e : out.entries()) {
        const double re = normal(rng);
        const double im = normal(rng);
        e = cplx{re, im};
    }
    return out;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace risedge
