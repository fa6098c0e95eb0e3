// Dense complex linear algebra: square matrices, Kronecker products, and a
// cyclic Jacobi eigensolver for Hermitian matrices. Everything downstream
// (projectors, verification operators, spectral gaps) is built on this.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ghzv/errors.hpp"

namespace ghzv {

using cplx = std::complex<double>;

// Matrices larger than this are refused; keeps everything at desk scale.
// Overridable (e.g. from the CLI via the GHZV_DIM_CAP environment variable).
inline std::atomic<std::int64_t> g_dim_cap{4096};

inline std::int64_t dim_cap() { return g_dim_cap.load(); }
inline void set_dim_cap(std::int64_t cap) { g_dim_cap.store(cap); }

inline void check_dim_cap(std::int64_t dim, const char* what) {
    if (dim > dim_cap()) {
        throw CapExceeded(std::string(what) + ": dimension " + std::to_string(dim) +
                          " exceeds cap " + std::to_string(dim_cap()));
    }
}

// d^n with overflow and cap checks.
inline std::int64_t checked_power(std::int64_t base, int exp, const char* what) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > dim_cap() / base)
            throw CapExceeded(std::string(what) + ": " + std::to_string(base) + "^" +
                              std::to_string(exp) + " exceeds dimension cap " +
                              std::to_string(dim_cap()));
        r *= base;
    }
    check_dim_cap(r, what);
    return r;
}

// Dense square complex matrix, row-major. Immutable by convention once built
// (the library never mutates a matrix it has handed out).
class ComplexMatrix {
  public:
    ComplexMatrix() = default;

    explicit ComplexMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim) {
        check_dim_cap(dim, "ComplexMatrix");
    }

    static ComplexMatrix identity(int dim) {
        ComplexMatrix m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix diagonal(const std::vector<cplx>& entries) {
        ComplexMatrix m(static_cast<int>(entries.size()));
        for (int i = 0; i < m.dim(); ++i) m(i, i) = entries[static_cast<std::size_t>(i)];
        return m;
    }

    static ComplexMatrix diagonal_real(const std::vector<double>& entries) {
        ComplexMatrix m(static_cast<int>(entries.size()));
        for (int i = 0; i < m.dim(); ++i) m(i, i) = entries[static_cast<std::size_t>(i)];
        return m;
    }

    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
        ComplexMatrix m(static_cast<int>(rows.size()));
        int i = 0;
        for (const auto& row : rows) {
            int j = 0;
            for (const auto& v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    // |u><v|
    static ComplexMatrix outer(std::span<const cplx> u, std::span<const cplx> v) {
        ComplexMatrix m(static_cast<int>(u.size()));
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = 0; j < v.size(); ++j)
                m(static_cast<int>(i), static_cast<int>(j)) = u[i] * std::conj(v[j]);
        return m;
    }

    int dim() const { return dim_; }

    cplx& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }

    const std::vector<cplx>& data() const { return a_; }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    ComplexMatrix& operator*=(cplx s) {
        for (auto& v : a_) v *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        a.require_same_dim(b);
        const int n = a.dim_;
        ComplexMatrix c(n);
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < n; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx{}) continue;
                for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
            }
        }
        return c;
    }

    ComplexMatrix dagger() const {
        ComplexMatrix m(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    cplx trace() const {
        cplx t{};
        for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
        return t;
    }

    // max_ij |a_ij - b_ij|
    double max_abs_diff(const ComplexMatrix& o) const {
        require_same_dim(o);
        double m = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i) m = std::max(m, std::abs(a_[i] - o.a_[i]));
        return m;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : a_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (const auto& v : a_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    bool is_hermitian(double tol) const {
        for (int i = 0; i < dim_; ++i)
            for (int j = i; j < dim_; ++j)
                if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
        return true;
    }

    bool is_projector(double tol) const {
        if (!is_hermitian(tol)) return false;
        return ((*this) * (*this)).max_abs_diff(*this) < tol;
    }

    bool is_psd(double tol) const;  // needs the eigensolver, defined below

    // A |v>
    std::vector<cplx> apply(std::span<const cplx> v) const {
        std::vector<cplx> r(static_cast<std::size_t>(dim_));
        for (int i = 0; i < dim_; ++i) {
            cplx s{};
            for (int j = 0; j < dim_; ++j) s += (*this)(i, j) * v[static_cast<std::size_t>(j)];
            r[static_cast<std::size_t>(i)] = s;
        }
        return r;
    }

    // <u| A |v>
    cplx expectation(std::span<const cplx> u, std::span<const cplx> v) const {
        cplx s{};
        for (int i = 0; i < dim_; ++i) {
            cplx row{};
            for (int j = 0; j < dim_; ++j) row += (*this)(i, j) * v[static_cast<std::size_t>(j)];
            s += std::conj(u[static_cast<std::size_t>(i)]) * row;
        }
        return s;
    }

  private:
    void require_same_dim(const ComplexMatrix& o) const {
        if (dim_ != o.dim_)
            throw DimensionMismatch("matrix dimensions differ: " + std::to_string(dim_) + " vs " +
                                    std::to_string(o.dim_));
    }

    int dim_ = 0;
    std::vector<cplx> a_;
};

// Kronecker product; (a⊗b)[(i*db+k),(j*db+l)] = a[i,j] * b[k,l].
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::int64_t dim = static_cast<std::int64_t>(a.dim()) * b.dim();
    check_dim_cap(dim, "kron");
    ComplexMatrix c(static_cast<int>(dim));
    const int da = a.dim(), db = b.dim();
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j) {
            const cplx aij = a(i, j);
            if (aij == cplx{}) continue;
            for (int k = 0; k < db; ++k)
                for (int l = 0; l < db; ++l) c(i * db + k, j * db + l) = aij * b(k, l);
        }
    return c;
}

inline std::vector<cplx> kron_vec(std::span<const cplx> u, std::span<const cplx> v) {
    std::vector<cplx> r(u.size() * v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) r[i * v.size() + j] = u[i] * v[j];
    return r;
}

// Eigenvalues sorted descending, eigenvector columns in matching order.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    ComplexMatrix eigenvectors;
};

namespace detail {

inline double off_diagonal_norm(const ComplexMatrix& m) {
    double s = 0.0;
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
            if (i != j) s += std::norm(m(i, j));
    return std::sqrt(s);
}

}  // namespace detail

// Cyclic Jacobi for Hermitian matrices. Sweeps until the off-diagonal
// Frobenius norm drops below 1e-12, at most 100 sweeps.
inline EigenDecomposition hermitian_eig(const ComplexMatrix& a) {
    constexpr double kHermTol = 1e-12;
    constexpr double kOffTol = 1e-12;
    constexpr int kMaxSweeps = 100;

    const int n = a.dim();
    if (!a.is_hermitian(kHermTol))
        throw NotHermitian("hermitian_eig: input deviates from A = A^dagger beyond 1e-12");

    ComplexMatrix m = a;
    ComplexMatrix v = ComplexMatrix::identity(n);

    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        if (detail::off_diagonal_norm(m) < kOffTol) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cplx g = m(p, q);
                const double gn = std::abs(g);
                if (gn < 1e-300) continue;

                // Eigenbasis of the 2x2 Hermitian block [[alpha, g],[conj(g), beta]].
                const double alpha = m(p, p).real();
                const double beta = m(q, q).real();
                const double h = 0.5 * (alpha - beta);
                const double r = std::sqrt(h * h + gn * gn);
                const double lam_hi = 0.5 * (alpha + beta) + r;

                cplx v1p, v1q;  // eigenvector of the larger block eigenvalue
                if (h >= 0.0) {
                    v1p = cplx{h + r, 0.0};
                    v1q = std::conj(g);
                } else {
                    v1p = g;
                    v1q = cplx{r - h, 0.0};
                }
                const double nrm = std::sqrt(std::norm(v1p) + std::norm(v1q));
                v1p /= nrm;
                v1q /= nrm;
                // Second column orthogonal to the first.
                const cplx v2p = -std::conj(v1q);
                const cplx v2q = std::conj(v1p);

                // m <- J^dagger m J on rows/columns p,q; v <- v J.
                for (int i = 0; i < n; ++i) {
                    const cplx mip = m(i, p), miq = m(i, q);
                    m(i, p) = mip * v1p + miq * v1q;
                    m(i, q) = mip * v2p + miq * v2q;
                }
                for (int j = 0; j < n; ++j) {
                    const cplx mpj = m(p, j), mqj = m(q, j);
                    m(p, j) = std::conj(v1p) * mpj + std::conj(v1q) * mqj;
                    m(q, j) = std::conj(v2p) * mpj + std::conj(v2q) * mqj;
                }
                for (int i = 0; i < n; ++i) {
                    const cplx vip = v(i, p), viq = v(i, q);
                    v(i, p) = vip * v1p + viq * v1q;
                    v(i, q) = vip * v2p + viq * v2q;
                }
                m(p, q) = 0.0;
                m(q, p) = 0.0;
                m(p, p) = lam_hi;
                m(q, q) = cplx{alpha + beta - lam_hi, 0.0};
            }
        }
    }
    if (sweep == kMaxSweeps && detail::off_diagonal_norm(m) >= kOffTol)
        throw NoConvergence("hermitian_eig: Jacobi sweeps exhausted without convergence");

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&m](int i, int j) { return m(i, i).real() > m(j, j).real(); });

    EigenDecomposition out;
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    out.eigenvectors = ComplexMatrix(n);
    for (int c = 0; c < n; ++c) {
        out.eigenvalues[static_cast<std::size_t>(c)] = m(order[c], order[c]).real();
        for (int i = 0; i < n; ++i) out.eigenvectors(i, c) = v(i, order[static_cast<std::size_t>(c)]);
    }
    return out;
}

// max |eigenvalue| of a Hermitian matrix
inline double operator_norm(const ComplexMatrix& a) {
    const auto eig = hermitian_eig(a);
    double m = 0.0;
    for (double lam : eig.eigenvalues) m = std::max(m, std::abs(lam));
    return m;
}

inline bool ComplexMatrix::is_psd(double tol) const {
    if (!is_hermitian(tol)) return false;
    const auto eig = hermitian_eig(*this);
    return eig.eigenvalues.empty() || eig.eigenvalues.back() >= -tol;
}

}  // namespace ghzv
