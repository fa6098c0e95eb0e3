// Test operators and measurement bases: qubit and qudit Pauli operators,
// phase-shifted 2-design bases, canonical test projectors, their adapted
// (one-way LOCC) variants, the unbiased-basis second test, the probabilistic
// standard-basis tests, and the brute-force admissibility enumeration.
//
// Every TestOperator carries both the effect matrix and a declarative
// sampling plan; the simulator executes the plan and an independent oracle
// (analytic_effect) recovers the matrix from the plan.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ghzv/errors.hpp"
#include "ghzv/linalg.hpp"
#include "ghzv/states.hpp"

namespace ghzv {

inline bool is_odd_prime(int d) {
    if (d < 3 || d % 2 == 0) return false;
    for (int k = 3; k * k <= d; k += 2)
        if (d % k == 0) return false;
    return true;
}

// j(j-1)/2
inline std::int64_t binom2(std::int64_t j) { return j * (j - 1) / 2; }

inline int mod_nonneg(std::int64_t x, int m) {
    const std::int64_t r = x % m;
    return static_cast<int>(r < 0 ? r + m : r);
}

inline cplx unit_phase(double turns) {
    const double a = 2.0 * std::numbers::pi * turns;
    return {std::cos(a), std::sin(a)};
}

// --- Pauli operators -------------------------------------------------------

// Shift X|j> = |j+1 mod d> and phase Z|j> = w^j |j>, w = exp(2 pi i / d).
inline std::pair<ComplexMatrix, ComplexMatrix> pauli_ops(int d) {
    if (d < 2) throw InvalidSpec("pauli_ops: need d >= 2");
    ComplexMatrix x(d), z(d);
    for (int j = 0; j < d; ++j) {
        x((j + 1) % d, j) = 1.0;
        z(j, j) = unit_phase(static_cast<double>(j) / d);
    }
    return {std::move(x), std::move(z)};
}

// Qubit Y = i X Z.
inline ComplexMatrix pauli_y() {
    return ComplexMatrix::from_rows({{0.0, cplx{0.0, -1.0}}, {cplx{0.0, 1.0}, 0.0}});
}

// Eigenbasis of X Z^r for odd d: column s is the eigenvector with eigenvalue
// w^s, components w^(r*binom(j,2) - s*j) / sqrt(d).
inline ComplexMatrix xz_eigenbasis(int d, int r) {
    if (d < 3 || d % 2 == 0) throw NotOddPrime("xz_eigenbasis: requires odd d");
    ComplexMatrix b(d);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (int s = 0; s < d; ++s)
        for (int j = 0; j < d; ++j) {
            const std::int64_t e = r * binom2(j) - static_cast<std::int64_t>(s) * j;
            b(j, s) = inv_sqrt_d * unit_phase(static_cast<double>(mod_nonneg(e, d)) / d);
        }
    return b;
}

// Qubit X/Y eigenbases; column o holds the eigenvector with eigenvalue (-1)^o.
inline ComplexMatrix x_eigenbasis() {
    const double s = 1.0 / std::sqrt(2.0);
    return ComplexMatrix::from_rows({{s, s}, {s, -s}});
}
inline ComplexMatrix y_eigenbasis() {
    const double s = 1.0 / std::sqrt(2.0);
    return ComplexMatrix::from_rows({{s, s}, {cplx{0.0, s}, cplx{0.0, -s}}});
}

// Fourier basis, the eigenbasis of X; unbiased with the standard basis.
inline ComplexMatrix fourier_basis(int d) {
    ComplexMatrix b(d);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (int g = 0; g < d; ++g)
        for (int j = 0; j < d; ++j)
            b(j, g) = inv_sqrt_d * unit_phase(static_cast<double>(g) * j / d);
    return b;
}

// --- Phase-shifted bases forming a weighted 2-design ------------------------

// Smallest m for which the m+1 weighted bases form a 2-design.
inline int min_design_m(int d) { return (3 * (d - 1) * (d - 1) + 3) / 4; }

// diag(mu^0, ..., mu^(d-2), mu^(-(d-1)(d-2)/2)) with mu = exp(2 pi i / m).
inline ComplexMatrix w_operator(int d, int m) {
    if (d < 3) throw InvalidSpec("w_operator: need d >= 3");
    if (m < 1) throw InvalidSpec("w_operator: need m >= 1");
    ComplexMatrix w(d);
    for (int j = 0; j < d - 1; ++j) w(j, j) = unit_phase(static_cast<double>(j % m) / m);
    w(d - 1, d - 1) =
        unit_phase(static_cast<double>(mod_nonneg(-binom2(d - 1), m)) / m);
    return w;
}

// Basis h (1-based) of the design; column t has components
// exp(2 pi i [t j / d + h binom(j,2) / m]) / sqrt(d).
inline ComplexMatrix design_basis_matrix(int d, int m, int h) {
    ComplexMatrix b(d);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    for (int t = 0; t < d; ++t)
        for (int j = 0; j < d; ++j) {
            const double turns = static_cast<double>(t) * j / d +
                                 static_cast<double>(h) * static_cast<double>(binom2(j) % m) / m;
            b(j, t) = inv_sqrt_d * unit_phase(turns);
        }
    return b;
}

// Standard basis plus m phase-shifted bases with weights w0 = 1/(d+1) and
// wh = d/[m(d+1)]; a 2-design whenever m >= min_design_m(d).
struct DesignBasisSet {
    int d = 0;
    int m = 0;
    double w0 = 0.0;
    double wh = 0.0;
    std::vector<ComplexMatrix> bases;  // index h-1 for h = 1..m
    bool two_design = false;

    const ComplexMatrix& basis(int h) const { return bases[static_cast<std::size_t>(h - 1)]; }
};

inline DesignBasisSet design_basis(int d, int m) {
    if (d < 3) throw InvalidSpec("design_basis: need d >= 3");
    if (m < 1) throw InvalidSpec("design_basis: need m >= 1");
    DesignBasisSet set;
    set.d = d;
    set.m = m;
    set.w0 = 1.0 / (d + 1);
    set.wh = static_cast<double>(d) / (static_cast<double>(m) * (d + 1));
    set.two_design = m >= min_design_m(d);
    set.bases.reserve(static_cast<std::size_t>(m));
    for (int h = 1; h <= m; ++h) set.bases.push_back(design_basis_matrix(d, m, h));
    return set;
}

// Per-ket second moment of the weighted basis set (each ket in basis h has
// probability wh/d; the total is 1). Equals 2 Psym / [d(d+1)] for a 2-design.
inline ComplexMatrix two_design_moment(const DesignBasisSet& set) {
    const int d = set.d;
    ComplexMatrix acc(d * d);
    auto add_basis = [&](const ComplexMatrix& b, double ket_weight) {
        for (int t = 0; t < d; ++t) {
            std::vector<cplx> ket(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j) ket[static_cast<std::size_t>(j)] = b(j, t);
            const auto ket2 = kron_vec(ket, ket);
            auto term = ComplexMatrix::outer(ket2, ket2);
            term *= cplx{ket_weight, 0.0};
            acc += term;
        }
    };
    add_basis(ComplexMatrix::identity(d), set.w0 / d);
    for (const auto& b : set.bases) add_basis(b, set.wh / d);
    return acc;
}

// Projector onto the symmetric subspace of C^d x C^d.
inline ComplexMatrix symmetric_projector(int d) {
    ComplexMatrix swap(d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) swap(i * d + j, j * d + i) = 1.0;
    auto p = ComplexMatrix::identity(d * d);
    p += swap;
    p *= cplx{0.5, 0.0};
    return p;
}

// --- Sampling plans and test operators --------------------------------------

enum class PassRule {
    always,        // no measurement; every run passes
    all_equal,     // standard-basis outcomes of all parties coincide
    parity,        // sum of binary outcomes mod 2 equals parity_target
    residue,       // sum of outcomes mod modulus equals 0
    outcome_set,   // explicit accepted set of flattened outcome tuples
    adaptive_ket,  // last stage: binary rank-1 effect selected by the other outcomes
    prob_coeff,    // standard-basis outcomes; pass with outcome-dependent probability
};

// Declarative staged local-measurement description of a test.
struct SamplingPlan {
    int parties = 0;
    int local_dim = 0;
    PassRule rule = PassRule::always;
    std::vector<int> measured;                     // parties measured with `bases`, stage order
    std::vector<ComplexMatrix> bases;              // per measured party; columns = outcome kets
    int parity_target = 0;                         // parity rule
    int modulus = 0;                               // residue rule
    std::vector<std::int64_t> accepted;            // outcome_set rule (sorted)
    int adaptive_party = -1;                       // adaptive_ket rule
    std::vector<std::vector<cplx>> adaptive_kets;  // indexed by flattened measured outcomes
    std::vector<double> pass_coeff;                // prob_coeff rule, indexed by basis index

    std::int64_t flatten(const std::vector<int>& outcomes) const {
        std::int64_t idx = 0;
        for (std::size_t s = 0; s < measured.size(); ++s)
            idx = idx * local_dim + outcomes[s];
        return idx;
    }

    // Deterministic pass predicate; prob_coeff tests return the coefficient
    // through pass_probability instead.
    bool passes(const std::vector<int>& outcomes) const {
        switch (rule) {
            case PassRule::always:
                return true;
            case PassRule::all_equal: {
                for (std::size_t s = 1; s < outcomes.size(); ++s)
                    if (outcomes[s] != outcomes[0]) return false;
                return true;
            }
            case PassRule::parity: {
                int sum = 0;
                for (int o : outcomes) sum += o;
                return sum % 2 == parity_target % 2;
            }
            case PassRule::residue: {
                std::int64_t sum = 0;
                for (int o : outcomes) sum += o;
                return mod_nonneg(sum, modulus) == 0;
            }
            case PassRule::outcome_set:
                return std::binary_search(accepted.begin(), accepted.end(), flatten(outcomes));
            default:
                throw Error("SamplingPlan::passes: rule is not outcome-deterministic");
        }
    }

    double pass_probability(const std::vector<int>& outcomes) const {
        if (rule == PassRule::prob_coeff)
            return pass_coeff[static_cast<std::size_t>(flatten(outcomes))];
        return passes(outcomes) ? 1.0 : 0.0;
    }
};

// Effect 0 <= E <= 1 passing the target with certainty, together with the
// local measurement plan realizing it.
struct TestOperator {
    std::string label;
    ComplexMatrix matrix;
    SamplingPlan plan;
};

// Checks 0 <= E <= 1 and E|target> = |target> to `tol`.
inline bool validate_test_operator(const TestOperator& t, const StateVector& target,
                                   double tol = 1e-10) {
    if (t.matrix.dim() != target.dim()) return false;
    if (!t.matrix.is_hermitian(tol)) return false;
    const auto eig = hermitian_eig(t.matrix);
    if (eig.eigenvalues.front() > 1.0 + tol || eig.eigenvalues.back() < -tol) return false;
    const auto image = t.matrix.apply(target.amplitudes);
    for (std::size_t i = 0; i < image.size(); ++i)
        if (std::abs(image[i] - target.amplitudes[i]) > tol) return false;
    return true;
}

// op acting on `party`, identity elsewhere.
inline ComplexMatrix embed_single(const ComplexMatrix& op, int party, int n, int d) {
    ComplexMatrix out = ComplexMatrix::identity(1);
    for (int k = 0; k < n; ++k)
        out = kron(out, k == party ? op : ComplexMatrix::identity(d));
    return out;
}

// --- Canonical test projectors ----------------------------------------------

// P0 = sum_j (|j><j|)^{otimes n}: all parties measure the standard basis and
// the outcomes must coincide.
inline TestOperator canonical_projector_z(int n, int d) {
    if (n < 2 || d < 2) throw InvalidSpec("canonical_projector_z: need n >= 2, d >= 2");
    const std::int64_t dim = checked_power(d, n, "canonical_projector_z");
    ComplexMatrix p(static_cast<int>(dim));
    std::int64_t rep = 0;
    for (int k = 0; k < n; ++k) rep = rep * d + 1;
    for (int j = 0; j < d; ++j) p(static_cast<int>(j * rep), static_cast<int>(j * rep)) = 1.0;

    TestOperator t;
    t.label = "P0";
    t.matrix = std::move(p);
    t.plan.parties = n;
    t.plan.local_dim = d;
    t.plan.rule = PassRule::all_equal;
    for (int k = 0; k < n; ++k) {
        t.plan.measured.push_back(k);
        t.plan.bases.push_back(ComplexMatrix::identity(d));
    }
    return t;
}

// P_Y = (1/2)[1 + (-1)^t prod_{k in Y} Y_k prod_{k not in Y} X_k] with
// |Y| = 2t; the test passes iff the number of -1 outcomes has parity t.
inline TestOperator canonical_projector_xy(const std::vector<int>& yset, int n) {
    if (n < 2) throw InvalidSpec("canonical_projector_xy: need n >= 2");
    if (yset.size() % 2 != 0) throw OddYSet("canonical_projector_xy: |Y| must be even");
    std::vector<bool> in_y(static_cast<std::size_t>(n), false);
    for (int k : yset) {
        if (k < 0 || k >= n) throw InvalidSpec("canonical_projector_xy: party out of range");
        if (in_y[static_cast<std::size_t>(k)])
            throw InvalidSpec("canonical_projector_xy: duplicate party");
        in_y[static_cast<std::size_t>(k)] = true;
    }
    const int t_half = static_cast<int>(yset.size()) / 2;

    const auto x = pauli_ops(2).first;
    const auto y = pauli_y();
    ComplexMatrix stab = ComplexMatrix::identity(1);
    for (int k = 0; k < n; ++k) stab = kron(stab, in_y[static_cast<std::size_t>(k)] ? y : x);
    stab *= cplx{(t_half % 2 == 0) ? 1.0 : -1.0, 0.0};
    auto p = ComplexMatrix::identity(stab.dim());
    p += stab;
    p *= cplx{0.5, 0.0};

    TestOperator t;
    t.label = "P_Y{";
    for (std::size_t i = 0; i < yset.size(); ++i)
        t.label += (i ? "," : "") + std::to_string(yset[i]);
    t.label += "}";
    t.matrix = std::move(p);
    t.plan.parties = n;
    t.plan.local_dim = 2;
    t.plan.rule = PassRule::parity;
    t.plan.parity_target = t_half % 2;
    for (int k = 0; k < n; ++k) {
        t.plan.measured.push_back(k);
        t.plan.bases.push_back(in_y[static_cast<std::size_t>(k)] ? y_eigenbasis() : x_eigenbasis());
    }
    return t;
}

// P_r = (1/d) sum_l (prod_k X_k Z_k^{r_k})^l for odd prime d and
// sum_k r_k = 0 mod d; party k measures the eigenbasis of X Z^{r_k} and the
// outcome sum must vanish mod d.
inline TestOperator canonical_projector_r(const std::vector<int>& r, int n, int d) {
    if (!is_odd_prime(d)) throw NotOddPrime("canonical_projector_r: d must be an odd prime");
    if (static_cast<int>(r.size()) != n)
        throw InvalidSpec("canonical_projector_r: residue string length must equal n");
    std::int64_t rsum = 0;
    for (int rk : r) rsum += rk;
    if (mod_nonneg(rsum, d) != 0)
        throw BadResidue("canonical_projector_r: residues must sum to 0 mod d");

    const auto [x, z] = pauli_ops(d);
    ComplexMatrix stab = ComplexMatrix::identity(1);
    for (int k = 0; k < n; ++k) {
        ComplexMatrix local = x;
        for (int i = 0; i < mod_nonneg(r[static_cast<std::size_t>(k)], d); ++i) local = local * z;
        stab = kron(stab, local);
    }
    ComplexMatrix p(stab.dim());
    ComplexMatrix power = ComplexMatrix::identity(stab.dim());
    for (int l = 0; l < d; ++l) {
        p += power;
        power = power * stab;
    }
    p *= cplx{1.0 / d, 0.0};

    TestOperator t;
    t.label = "P_r(";
    for (std::size_t i = 0; i < r.size(); ++i) t.label += (i ? "," : "") + std::to_string(r[i]);
    t.label += ")";
    t.matrix = std::move(p);
    t.plan.parties = n;
    t.plan.local_dim = d;
    t.plan.rule = PassRule::residue;
    t.plan.modulus = d;
    for (int k = 0; k < n; ++k) {
        t.plan.measured.push_back(k);
        t.plan.bases.push_back(xz_eigenbasis(d, mod_nonneg(r[static_cast<std::size_t>(k)], d)));
    }
    return t;
}

// P_h = (1/d) sum_l (prod_k X_k W_k^{h_k})^l for h in {1..m}^n with
// sum_k h_k = 0 mod m; party k measures basis h_k of the design and the
// outcome sum must vanish mod d.
inline TestOperator design_projector_h(const std::vector<int>& h, int n, int d, int m) {
    if (d < 3) throw InvalidSpec("design_projector_h: need d >= 3");
    if (static_cast<int>(h.size()) != n)
        throw InvalidSpec("design_projector_h: string length must equal n");
    std::int64_t hsum = 0;
    for (int hk : h) {
        if (hk < 1 || hk > m) throw InvalidSpec("design_projector_h: entries must lie in 1..m");
        hsum += hk;
    }
    if (mod_nonneg(hsum, m) != 0)
        throw BadResidue("design_projector_h: string must sum to 0 mod m");

    const auto x = pauli_ops(d).first;
    const auto w = w_operator(d, m);
    ComplexMatrix stab = ComplexMatrix::identity(1);
    for (int k = 0; k < n; ++k) {
        ComplexMatrix local = x;
        ComplexMatrix wpow = ComplexMatrix::identity(d);
        for (int i = 0; i < h[static_cast<std::size_t>(k)]; ++i) wpow = wpow * w;
        stab = kron(stab, local * wpow);
    }
    ComplexMatrix p(stab.dim());
    ComplexMatrix power = ComplexMatrix::identity(stab.dim());
    for (int l = 0; l < d; ++l) {
        p += power;
        power = power * stab;
    }
    p *= cplx{1.0 / d, 0.0};

    TestOperator t;
    t.label = "P_h(";
    for (std::size_t i = 0; i < h.size(); ++i) t.label += (i ? "," : "") + std::to_string(h[i]);
    t.label += ")";
    t.matrix = std::move(p);
    t.plan.parties = n;
    t.plan.local_dim = d;
    t.plan.rule = PassRule::residue;
    t.plan.modulus = d;
    for (int k = 0; k < n; ++k) {
        t.plan.measured.push_back(k);
        t.plan.bases.push_back(design_basis_matrix(d, m, h[static_cast<std::size_t>(k)]));
    }
    return t;
}

// --- Adapted projectors and GHZ-like tests ----------------------------------

// sqrt(d) diag(lambda_0, ..., lambda_{d-1})
inline ComplexMatrix m_operator(const GhzLikeSpec& spec) {
    const double root_d = std::sqrt(static_cast<double>(spec.local_dim()));
    std::vector<double> diag(spec.lambdas.size());
    for (std::size_t j = 0; j < spec.lambdas.size(); ++j) diag[j] = root_d * spec.lambdas[j];
    return ComplexMatrix::diagonal_real(diag);
}

// (1 x ... x M at `party`) base (1 x ... x M at `party`): the first n-1
// parties measure as in the base plan; the adapted party applies the binary
// measurement {|w><w|, 1 - |w><w|} with the ket chosen from the broadcast
// outcomes.
inline TestOperator adapted_projector(const TestOperator& base, const GhzLikeSpec& spec,
                                      std::optional<int> adapted = std::nullopt) {
    const int n = base.plan.parties;
    const int d = base.plan.local_dim;
    if (spec.local_dim() != d)
        throw InvalidSpec("adapted_projector: coefficient count must match local dimension");
    if (base.plan.rule != PassRule::parity && base.plan.rule != PassRule::residue)
        throw InvalidSpec("adapted_projector: base must be a parity or residue projector");
    const int party = adapted.value_or(n - 1);
    if (party < 0 || party >= n) throw InvalidSpec("adapted_projector: party out of range");

    const auto m_op = m_operator(spec);
    const auto embedded = embed_single(m_op, party, n, d);

    TestOperator t;
    t.label = base.label + "'@" + std::to_string(party);
    t.matrix = embedded * base.matrix * embedded;
    t.plan.parties = n;
    t.plan.local_dim = d;
    t.plan.rule = PassRule::adaptive_ket;
    t.plan.adaptive_party = party;

    const ComplexMatrix* party_basis = nullptr;
    for (std::size_t s = 0; s < base.plan.measured.size(); ++s) {
        if (base.plan.measured[s] == party) {
            party_basis = &base.plan.bases[s];
        } else {
            t.plan.measured.push_back(base.plan.measured[s]);
            t.plan.bases.push_back(base.plan.bases[s]);
        }
    }
    if (party_basis == nullptr)
        throw InvalidSpec("adapted_projector: base plan does not measure the adapted party");

    // Forced outcome for the adapted party: completes the parity/residue rule.
    const int mod = base.plan.rule == PassRule::parity ? 2 : base.plan.modulus;
    const int target = base.plan.rule == PassRule::parity ? base.plan.parity_target : 0;
    const std::int64_t branches = checked_power(d, n - 1, "adapted_projector");
    t.plan.adaptive_kets.resize(static_cast<std::size_t>(branches));
    std::vector<int> outcomes(static_cast<std::size_t>(n - 1), 0);
    for (std::int64_t g = 0; g < branches; ++g) {
        std::int64_t rest = g;
        int sum = 0;
        for (int s = n - 2; s >= 0; --s) {
            outcomes[static_cast<std::size_t>(s)] = static_cast<int>(rest % d);
            sum += outcomes[static_cast<std::size_t>(s)];
            rest /= d;
        }
        const int forced = mod_nonneg(target - sum, mod);
        std::vector<cplx> ket(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) ket[static_cast<std::size_t>(j)] = (*party_basis)(j, forced);
        t.plan.adaptive_kets[static_cast<std::size_t>(g)] = m_op.apply(ket);
    }
    return t;
}

// Second test of the two-test protocol: the first n-1 parties measure an
// unbiased basis; party n measures {M|v_g><v_g|M, 1 - ...} with |v_g> the
// normalized conditional state of the GHZ target.
inline TestOperator mub_second_test(const GhzLikeSpec& spec, int n, const ComplexMatrix& basis) {
    const int d = spec.local_dim();
    if (basis.dim() != d) throw DimensionMismatch("mub_second_test: basis dimension mismatch");
    // Basis must be orthonormal and unbiased with the standard basis.
    if ((basis.dagger() * basis).max_abs_diff(ComplexMatrix::identity(d)) > 1e-10)
        throw NotUnbiased("mub_second_test: basis is not orthonormal");
    for (int g = 0; g < d; ++g)
        for (int j = 0; j < d; ++j)
            if (std::abs(std::norm(basis(j, g)) - 1.0 / d) > 1e-10)
                throw NotUnbiased("mub_second_test: basis is not unbiased with the standard basis");

    const auto m_op = m_operator(spec);
    const std::int64_t dim = checked_power(d, n, "mub_second_test");
    const std::int64_t branches = dim / d;

    TestOperator t;
    t.label = "P1";
    t.matrix = ComplexMatrix(static_cast<int>(dim));
    t.plan.parties = n;
    t.plan.local_dim = d;
    t.plan.rule = PassRule::adaptive_ket;
    t.plan.adaptive_party = n - 1;
    for (int k = 0; k + 1 < n; ++k) {
        t.plan.measured.push_back(k);
        t.plan.bases.push_back(basis);
    }
    t.plan.adaptive_kets.resize(static_cast<std::size_t>(branches));

    const double scale = std::pow(static_cast<double>(d), 0.5 * (n - 1)) /
                         std::sqrt(static_cast<double>(d));
    std::vector<int> g_digits(static_cast<std::size_t>(n - 1), 0);
    for (std::int64_t g = 0; g < branches; ++g) {
        std::int64_t rest = g;
        for (int s = n - 2; s >= 0; --s) {
            g_digits[static_cast<std::size_t>(s)] = static_cast<int>(rest % d);
            rest /= d;
        }
        // v_g[j] = scale * prod_k conj(<j|u_{g_k}>)
        std::vector<cplx> v(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) {
            cplx prod{scale, 0.0};
            for (int s = 0; s < n - 1; ++s)
                prod *= std::conj(basis(j, g_digits[static_cast<std::size_t>(s)]));
            v[static_cast<std::size_t>(j)] = prod;
        }
        const auto w = m_op.apply(v);
        t.plan.adaptive_kets[static_cast<std::size_t>(g)] = w;

        // Branch contribution (x_k |u_{g_k}><u_{g_k}|) x |w><w|.
        std::vector<cplx> full{1.0};
        for (int s = 0; s < n - 1; ++s) {
            std::vector<cplx> u(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j)
                u[static_cast<std::size_t>(j)] = basis(j, g_digits[static_cast<std::size_t>(s)]);
            full = kron_vec(full, u);
        }
        full = kron_vec(full, w);
        t.matrix += ComplexMatrix::outer(full, full);
    }
    return t;
}

// Probabilistic standard-basis test: passes with certainty on coinciding
// outcomes, otherwise with probability 1 - (1/p - 1) lambda_{j_n}^2 (one-way)
// or 1 - (1/p - 1)(1/n) sum_k lambda_{j_k}^2 (two-way).
inline TestOperator q0_operator(const GhzLikeSpec& spec, int n, double p, bool two_way) {
    const int d = spec.local_dim();
    const double l0sq = spec.lambdas[0] * spec.lambdas[0];
    const double l1sq = spec.lambdas[1] * spec.lambdas[1];
    const double bound = two_way
                             ? ((n - 1) * l0sq + l1sq) / (n + (n - 1) * l0sq + l1sq)
                             : l0sq / (1.0 + l0sq);
    if (!(p < 1.0) || p < bound - 1e-12)
        throw POutOfRange("q0_operator: p must satisfy " + std::to_string(bound) + " <= p < 1");

    const std::int64_t dim = checked_power(d, n, "q0_operator");
    std::vector<double> coeff(static_cast<std::size_t>(dim));
    const double slope = 1.0 / p - 1.0;
    for (std::int64_t idx = 0; idx < dim; ++idx) {
        std::int64_t rest = idx;
        const int last_digit = static_cast<int>(rest % d);
        bool all_equal = true;
        double sum_sq = 0.0;
        for (int k = 0; k < n; ++k) {
            const int digit = static_cast<int>(rest % d);
            rest /= d;
            if (digit != last_digit) all_equal = false;
            sum_sq += spec.lambdas[static_cast<std::size_t>(digit)] *
                      spec.lambdas[static_cast<std::size_t>(digit)];
        }
        if (all_equal) {
            coeff[static_cast<std::size_t>(idx)] = 1.0;
            continue;
        }
        const double penalty =
            two_way ? slope * sum_sq / n
                    : slope * spec.lambdas[static_cast<std::size_t>(last_digit)] *
                          spec.lambdas[static_cast<std::size_t>(last_digit)];
        const double c = 1.0 - penalty;
        if (c < -1e-12 || c > 1.0 + 1e-12)
            throw POutOfRange("q0_operator: coefficient escapes [0,1]");
        coeff[static_cast<std::size_t>(idx)] = std::clamp(c, 0.0, 1.0);
    }

    TestOperator t;
    t.label = two_way ? "Q0~" : "Q0";
    t.matrix = ComplexMatrix::diagonal_real(coeff);
    t.plan.parties = n;
    t.plan.local_dim = d;
    t.plan.rule = PassRule::prob_coeff;
    for (int k = 0; k < n; ++k) {
        t.plan.measured.push_back(k);
        t.plan.bases.push_back(ComplexMatrix::identity(d));
    }
    t.plan.pass_coeff = std::move(coeff);
    return t;
}

// The trivial test: no measurement, always passes.
inline TestOperator trivial_test(int n, int d) {
    const std::int64_t dim = checked_power(d, n, "trivial_test");
    TestOperator t;
    t.label = "1";
    t.matrix = ComplexMatrix::identity(static_cast<int>(dim));
    t.plan.parties = n;
    t.plan.local_dim = d;
    t.plan.rule = PassRule::always;
    return t;
}

// --- Brute-force admissibility enumeration -----------------------------------

namespace detail {

struct CanonicalCandidate {
    std::string label;
    ComplexMatrix matrix;
    double trace = 0.0;
    SamplingPlan plan;
};

// Canonical test projector of a product measurement: the sum of outcome
// projectors with nonzero target overlap. `party_bases` holds an orthonormal
// basis per measured party.
inline CanonicalCandidate canonical_from_bases(const std::vector<int>& measured,
                                               const std::vector<ComplexMatrix>& party_bases,
                                               const StateVector& target) {
    const int n = target.parties;
    const int d = target.local_dim;
    CanonicalCandidate cand;
    cand.matrix = ComplexMatrix(target.dim());
    cand.plan.parties = n;
    cand.plan.local_dim = d;
    cand.plan.rule = PassRule::outcome_set;
    cand.plan.measured = measured;
    cand.plan.bases = party_bases;

    const std::size_t stages = measured.size();
    std::int64_t tuples = 1;
    for (std::size_t s = 0; s < stages; ++s) tuples *= d;

    std::vector<int> outcome(stages, 0);
    for (std::int64_t tup = 0; tup < tuples; ++tup) {
        std::int64_t rest = tup;
        for (int s = static_cast<int>(stages) - 1; s >= 0; --s) {
            outcome[static_cast<std::size_t>(s)] = static_cast<int>(rest % d);
            rest /= d;
        }
        // Outcome projector as a product over parties (identity if unmeasured).
        std::vector<cplx> full{1.0};
        ComplexMatrix proj = ComplexMatrix::identity(1);
        for (int k = 0; k < n; ++k) {
            auto it = std::find(measured.begin(), measured.end(), k);
            if (it == measured.end()) {
                proj = kron(proj, ComplexMatrix::identity(d));
            } else {
                const std::size_t s = static_cast<std::size_t>(it - measured.begin());
                std::vector<cplx> ket(static_cast<std::size_t>(d));
                for (int j = 0; j < d; ++j)
                    ket[static_cast<std::size_t>(j)] =
                        party_bases[s](j, outcome[s]);
                proj = kron(proj, ComplexMatrix::outer(ket, ket));
            }
        }
        const double overlap = proj.expectation(target.amplitudes, target.amplitudes).real();
        if (overlap > 1e-12) {
            cand.matrix += proj;
            cand.plan.accepted.push_back(cand.plan.flatten(outcome));
        }
    }
    std::sort(cand.plan.accepted.begin(), cand.plan.accepted.end());
    cand.trace = cand.matrix.trace().real();
    return cand;
}

// Keeps candidates whose projector is not dominated by a strictly smaller one.
inline std::vector<TestOperator> filter_admissible(std::vector<CanonicalCandidate> cands) {
    // Deduplicate identical projectors, preferring the representative with the
    // most measured parties (complete measurements).
    std::vector<CanonicalCandidate> unique;
    for (auto& c : cands) {
        bool found = false;
        for (auto& u : unique) {
            if (u.matrix.dim() == c.matrix.dim() && u.matrix.max_abs_diff(c.matrix) < 1e-10) {
                if (c.plan.measured.size() > u.plan.measured.size()) u = c;
                found = true;
                break;
            }
        }
        if (!found) unique.push_back(std::move(c));
    }

    std::vector<TestOperator> admissible;
    for (const auto& e : unique) {
        bool dominated = false;
        for (const auto& other : unique) {
            if (&other == &e || other.trace >= e.trace - 1e-9) continue;
            // other <= e iff min eig(e - other) >= -1e-10; cheap diagonal screen first
            bool diag_ok = true;
            for (int i = 0; i < e.matrix.dim() && diag_ok; ++i)
                if ((e.matrix(i, i) - other.matrix(i, i)).real() < -1e-10) diag_ok = false;
            if (!diag_ok) continue;
            const auto eig = hermitian_eig(e.matrix - other.matrix);
            if (eig.eigenvalues.back() >= -1e-10) {
                dominated = true;
                break;
            }
        }
        if (!dominated) {
            TestOperator t;
            t.label = e.label;
            t.matrix = e.matrix;
            t.plan = e.plan;
            admissible.push_back(std::move(t));
        }
    }
    return admissible;
}

}  // namespace detail

// All admissible canonical test projectors of the n-qubit GHZ state, found by
// brute force over the 4^n Pauli strings (identity = party not measured).
inline std::vector<TestOperator> enumerate_admissible_qubit(int n) {
    if (n < 2 || n > 4)
        throw CapExceeded("enumerate_admissible_qubit: brute force supported for 2 <= n <= 4");
    const auto target = ghz_state(n, 2);
    const ComplexMatrix party_basis[3] = {x_eigenbasis(), y_eigenbasis(),
                                          ComplexMatrix::identity(2)};
    const char letter[4] = {'I', 'X', 'Y', 'Z'};

    std::vector<detail::CanonicalCandidate> cands;
    std::int64_t strings = 1;
    for (int k = 0; k < n; ++k) strings *= 4;
    std::vector<int> s(static_cast<std::size_t>(n), 0);
    for (std::int64_t code = 0; code < strings; ++code) {
        std::int64_t rest = code;
        for (int k = n - 1; k >= 0; --k) {
            s[static_cast<std::size_t>(k)] = static_cast<int>(rest % 4);
            rest /= 4;
        }
        std::vector<int> measured;
        std::vector<ComplexMatrix> bases;
        std::string label;
        for (int k = 0; k < n; ++k) {
            label += letter[s[static_cast<std::size_t>(k)]];
            if (s[static_cast<std::size_t>(k)] == 0) continue;
            measured.push_back(k);
            bases.push_back(party_basis[s[static_cast<std::size_t>(k)] - 1]);
        }
        auto cand = detail::canonical_from_bases(measured, bases, target);
        cand.label = label;
        cands.push_back(std::move(cand));
    }
    return detail::filter_admissible(std::move(cands));
}

// Admissible tests of the n-qudit GHZ state over complete Pauli-basis
// measurements (standard basis or an eigenbasis of X Z^a per party).
inline std::vector<TestOperator> enumerate_admissible_qudit(int n, int d) {
    if (!is_odd_prime(d)) throw NotOddPrime("enumerate_admissible_qudit: d must be an odd prime");
    if (n < 2 || checked_power(d + 1, n, "enumerate_admissible_qudit") > 512)
        throw CapExceeded("enumerate_admissible_qudit: instance too large for brute force");
    const auto target = ghz_state(n, d);

    std::vector<ComplexMatrix> party_basis;  // 0 = standard, 1+a = eigenbasis of X Z^a
    party_basis.push_back(ComplexMatrix::identity(d));
    for (int a = 0; a < d; ++a) party_basis.push_back(xz_eigenbasis(d, a));

    std::vector<detail::CanonicalCandidate> cands;
    std::int64_t strings = 1;
    for (int k = 0; k < n; ++k) strings *= d + 1;
    std::vector<int> s(static_cast<std::size_t>(n), 0);
    std::vector<int> all_parties(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) all_parties[static_cast<std::size_t>(k)] = k;
    for (std::int64_t code = 0; code < strings; ++code) {
        std::int64_t rest = code;
        for (int k = n - 1; k >= 0; --k) {
            s[static_cast<std::size_t>(k)] = static_cast<int>(rest % (d + 1));
            rest /= d + 1;
        }
        std::vector<ComplexMatrix> bases;
        std::string label;
        for (int k = 0; k < n; ++k) {
            const int b = s[static_cast<std::size_t>(k)];
            label += (k ? "," : "") + (b == 0 ? std::string("Z") : "XZ^" + std::to_string(b - 1));
            bases.push_back(party_basis[static_cast<std::size_t>(b)]);
        }
        auto cand = detail::canonical_from_bases(all_parties, bases, target);
        cand.label = label;
        cands.push_back(std::move(cand));
    }
    return detail::filter_admissible(std::move(cands));
}

// --- Injectivity of the residue maps ----------------------------------------

// g(j,l,d) = (jhat - j)(jhat + j - 1)/2 with jhat = j + l reduced into
// {0,...,d-1}; returns whether j -> g(j,l,d) mod m is injective.
inline bool gm_injectivity(int d, int m, int l) {
    if (d < 3 || l < 1 || l > d - 1 || m < 1)
        throw InvalidSpec("gm_injectivity: need d >= 3 and 1 <= l <= d-1");
    std::vector<int> seen;
    for (int j = 0; j < d; ++j) {
        const std::int64_t jhat = (j + l <= d - 1) ? j + l : j + l - d;
        const std::int64_t g = (jhat - j) * (jhat + j - 1) / 2;
        const int gm = mod_nonneg(g, m);
        if (std::find(seen.begin(), seen.end(), gm) != seen.end()) return false;
        seen.push_back(gm);
    }
    return true;
}

// Whether j -> l(l-1)/2 + j*l mod d is injective; fails for composite d when
// l divides d, which is why the Pauli construction needs an odd prime.
inline bool pauli_residue_injective(int d, int l) {
    if (d < 2 || l < 1 || l > d - 1)
        throw InvalidSpec("pauli_residue_injective: need d >= 2 and 1 <= l <= d-1");
    std::vector<int> seen;
    for (int j = 0; j < d; ++j) {
        const int v = mod_nonneg(binom2(l) + static_cast<std::int64_t>(j) * l, d);
        if (std::find(seen.begin(), seen.end(), v) != seen.end()) return false;
        seen.push_back(v);
    }
    return true;
}

}  // namespace ghzv
