// Target states and density matrices: GHZ states, GHZ-like states with
// nonuniform Schmidt coefficients, fidelities, and single-party reduced
// states. Party 0 is the most significant base-d digit of a basis index;
// this convention fixes tensor ordering across the whole library.

#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ghzv/errors.hpp"
#include "ghzv/linalg.hpp"

namespace ghzv {

// Normalized amplitude vector on n parties of local dimension d.
struct StateVector {
    int local_dim = 0;
    int parties = 0;
    std::vector<cplx> amplitudes;

    StateVector() = default;

    StateVector(int d, int n, std::vector<cplx> amps)
        : local_dim(d), parties(n), amplitudes(std::move(amps)) {
        if (d < 2 || n < 1) throw InvalidSpec("StateVector: need d >= 2 and n >= 1");
        const std::int64_t dim = checked_power(d, n, "StateVector");
        if (static_cast<std::int64_t>(amplitudes.size()) != dim)
            throw DimensionMismatch("StateVector: amplitude count " +
                                    std::to_string(amplitudes.size()) + " != d^n = " +
                                    std::to_string(dim));
        double norm2 = 0.0;
        for (const auto& a : amplitudes) norm2 += std::norm(a);
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
            throw InvalidSpec("StateVector: norm deviates from 1 beyond 1e-12");
    }

    int dim() const { return static_cast<int>(amplitudes.size()); }

    ComplexMatrix projector() const {
        return ComplexMatrix::outer(amplitudes, amplitudes);
    }
};

// Coefficients (lambda_0, ..., lambda_{d-1}) of a GHZ-like state, stored in
// decreasing order with sum of squares 1 and lambda_0 < 1 strictly.
struct GhzLikeSpec {
    std::vector<double> lambdas;

    explicit GhzLikeSpec(std::vector<double> ls) : lambdas(std::move(ls)) {
        if (lambdas.size() < 2) throw InvalidSpec("GhzLikeSpec: need at least 2 coefficients");
        if (!(lambdas.front() < 1.0))
            throw InvalidSpec("GhzLikeSpec: lambda_0 must be strictly below 1");
        double sum2 = 0.0;
        for (std::size_t j = 0; j < lambdas.size(); ++j) {
            if (lambdas[j] < 0.0) throw InvalidSpec("GhzLikeSpec: coefficients must be nonnegative");
            if (j > 0 && lambdas[j] > lambdas[j - 1] + 1e-15)
                throw InvalidSpec("GhzLikeSpec: coefficients must be in decreasing order");
            sum2 += lambdas[j] * lambdas[j];
        }
        if (std::abs(sum2 - 1.0) > 1e-12)
            throw InvalidSpec("GhzLikeSpec: squared coefficients must sum to 1");
    }

    static GhzLikeSpec uniform(int d) {
        return GhzLikeSpec(std::vector<double>(static_cast<std::size_t>(d),
                                               1.0 / std::sqrt(static_cast<double>(d))));
    }

    int local_dim() const { return static_cast<int>(lambdas.size()); }
};

// Hermitian, PSD, unit-trace matrix (all validated to 1e-10).
struct DensityMatrix {
    ComplexMatrix matrix;

    DensityMatrix() = default;

    explicit DensityMatrix(ComplexMatrix m) : matrix(std::move(m)) {
        constexpr double tol = 1e-10;
        if (!matrix.all_finite()) throw InvalidSpec("DensityMatrix: non-finite entries");
        if (!matrix.is_hermitian(tol)) throw InvalidSpec("DensityMatrix: not Hermitian");
        if (std::abs(matrix.trace() - cplx{1.0, 0.0}) > tol)
            throw InvalidSpec("DensityMatrix: trace differs from 1");
        if (!matrix.is_psd(tol)) throw InvalidSpec("DensityMatrix: not positive semidefinite");
    }

    int dim() const { return matrix.dim(); }
};

// |G_n^d> = (1/sqrt d) sum_j |j>^{otimes n}
inline StateVector ghz_state(int n, int d) {
    if (n < 2 || d < 2) throw InvalidSpec("ghz_state: need n >= 2 and d >= 2");
    const std::int64_t dim = checked_power(d, n, "ghz_state");
    std::vector<cplx> amps(static_cast<std::size_t>(dim));
    // |j>^{otimes n} has index j * (d^n - 1)/(d - 1) = j * sum_k d^k
    std::int64_t rep = 0;
    for (int k = 0; k < n; ++k) rep = rep * d + 1;
    const double a = 1.0 / std::sqrt(static_cast<double>(d));
    for (int j = 0; j < d; ++j) amps[static_cast<std::size_t>(j * rep)] = a;
    return StateVector(d, n, std::move(amps));
}

// |xi> = sum_j lambda_j |j>^{otimes n}
inline StateVector ghz_like_state(const GhzLikeSpec& spec, int n) {
    const int d = spec.local_dim();
    if (n < 2) throw InvalidSpec("ghz_like_state: need n >= 2");
    const std::int64_t dim = checked_power(d, n, "ghz_like_state");
    std::vector<cplx> amps(static_cast<std::size_t>(dim));
    std::int64_t rep = 0;
    for (int k = 0; k < n; ++k) rep = rep * d + 1;
    for (int j = 0; j < d; ++j)
        amps[static_cast<std::size_t>(j * rep)] = spec.lambdas[static_cast<std::size_t>(j)];
    return StateVector(d, n, std::move(amps));
}

// <psi| sigma |psi>
inline double fidelity(const DensityMatrix& sigma, const StateVector& psi) {
    if (sigma.dim() != psi.dim())
        throw DimensionMismatch("fidelity: state dim " + std::to_string(psi.dim()) +
                                " vs density dim " + std::to_string(sigma.dim()));
    return sigma.matrix.expectation(psi.amplitudes, psi.amplitudes).real();
}

// Single-party reduced state of |xi>: diag(lambda_0^2, ..., lambda_{d-1}^2).
inline DensityMatrix reduced_single_party(const GhzLikeSpec& spec) {
    std::vector<double> diag(spec.lambdas.size());
    for (std::size_t j = 0; j < spec.lambdas.size(); ++j)
        diag[j] = spec.lambdas[j] * spec.lambdas[j];
    return DensityMatrix(ComplexMatrix::diagonal_real(diag));
}

}  // namespace ghzv
