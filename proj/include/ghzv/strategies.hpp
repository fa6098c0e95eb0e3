// Verification strategies: probability-weighted collections of tests whose
// weighted sum is the verification operator. Houses the named constructions
// for GHZ targets (Pauli, qudit Pauli, 2-design), the GHZ-like protocols
// (two-test, one-way adaptive, role-swapped), and their adversarial variants.

#pragma once

#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ghzv/errors.hpp"
#include "ghzv/linalg.hpp"
#include "ghzv/measurements.hpp"
#include "ghzv/states.hpp"

namespace ghzv {

// Exact rational used for the closed-form test weights; conversion to double
// happens only at matrix assembly and sampling.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Fraction() = default;
    Fraction(std::int64_t n, std::int64_t d) : num(n), den(d) {
        if (den == 0) throw Error("Fraction: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    friend Fraction operator+(const Fraction& a, const Fraction& b) {
        return {a.num * b.den + b.num * a.den, a.den * b.den};
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct WeightedTest {
    double p = 0.0;
    std::optional<Fraction> exact;  // set when the weight is an exact rational
    TestOperator test;
};

struct Strategy {
    std::string name;
    StateVector target;
    std::vector<WeightedTest> tests;
    std::map<std::string, double> params;
};

inline ComplexMatrix omega_matrix(const Strategy& s) {
    ComplexMatrix omega(s.target.dim());
    for (const auto& wt : s.tests) {
        auto term = wt.test.matrix;
        term *= cplx{wt.p, 0.0};
        omega += term;
    }
    return omega;
}

// Validates weights and the target-fixing property before handing out the
// strategy.
inline Strategy make_strategy(std::string name, StateVector target,
                              std::vector<WeightedTest> tests,
                              std::map<std::string, double> params = {}) {
    Strategy s{std::move(name), std::move(target), std::move(tests), std::move(params)};
    bool all_exact = true;
    Fraction exact_sum{0, 1};
    double sum = 0.0;
    for (const auto& wt : s.tests) {
        if (wt.p < 0.0) throw InvalidSpec(s.name + ": negative test probability");
        sum += wt.p;
        if (wt.exact)
            exact_sum = exact_sum + *wt.exact;
        else
            all_exact = false;
    }
    if (all_exact ? (exact_sum.num != exact_sum.den) : (std::abs(sum - 1.0) > 1e-12))
        throw InvalidSpec(s.name + ": test probabilities must sum to 1");

    const auto omega = omega_matrix(s);
    const auto image = omega.apply(s.target.amplitudes);
    for (std::size_t i = 0; i < image.size(); ++i)
        if (std::abs(image[i] - s.target.amplitudes[i]) > 1e-10)
            throw InvalidSpec(s.name + ": verification operator does not fix the target");
    return s;
}

struct SpectralData {
    double beta = 0.0;  // second-largest eigenvalue
    double nu = 0.0;    // spectral gap 1 - beta
    double tau = 0.0;   // smallest eigenvalue
};

inline SpectralData spectral_data(const Strategy& s) {
    const auto eig = hermitian_eig(omega_matrix(s));
    SpectralData out;
    out.beta = eig.eigenvalues.size() > 1 ? eig.eigenvalues[1] : eig.eigenvalues[0];
    out.nu = 1.0 - out.beta;
    out.tau = eig.eigenvalues.back();
    return out;
}

// Omega = |psi><psi| + beta (1 - |psi><psi|) within tol.
inline bool is_homogeneous(const Strategy& s, double tol = 1e-10) {
    const auto sd = spectral_data(s);
    if (sd.beta > 1.0 - 1e-12) return false;
    auto form = s.target.projector();
    auto rest = ComplexMatrix::identity(form.dim());
    rest -= form;
    rest *= cplx{sd.beta, 0.0};
    form += rest;
    return omega_matrix(s).max_abs_diff(form) < tol;
}

// --- Test families -----------------------------------------------------------

// All canonical X/Y projectors with evenly many Y parties; 2^{n-1} tests.
inline std::vector<TestOperator> xy_family(int n) {
    std::vector<TestOperator> out;
    for (int mask = 0; mask < (1 << n); ++mask) {
        if (std::popcount(static_cast<unsigned>(mask)) % 2) continue;
        std::vector<int> yset;
        for (int k = 0; k < n; ++k)
            if (mask & (1 << k)) yset.push_back(k);
        out.push_back(canonical_projector_xy(yset, n));
    }
    return out;
}

// All residue-string projectors P_r with sum r = 0 mod d; d^{n-1} tests.
inline std::vector<TestOperator> pauli_r_family(int n, int d) {
    std::vector<TestOperator> out;
    std::int64_t combos = 1;
    for (int k = 0; k + 1 < n; ++k) combos *= d;
    for (std::int64_t flat = 0; flat < combos; ++flat) {
        std::vector<int> r(static_cast<std::size_t>(n));
        std::int64_t rest = flat, sum = 0;
        for (int k = 0; k < n - 1; ++k) {
            r[static_cast<std::size_t>(k)] = static_cast<int>(rest % d);
            sum += r[static_cast<std::size_t>(k)];
            rest /= d;
        }
        r[static_cast<std::size_t>(n - 1)] = mod_nonneg(-sum, d);
        out.push_back(canonical_projector_r(r, n, d));
    }
    return out;
}

// All design-string projectors P_h with sum h = 0 mod m; m^{n-1} tests.
inline std::vector<TestOperator> design_h_family(int n, int d, int m) {
    std::vector<TestOperator> out;
    std::int64_t combos = 1;
    for (int k = 0; k + 1 < n; ++k) combos *= m;
    for (std::int64_t flat = 0; flat < combos; ++flat) {
        std::vector<int> h(static_cast<std::size_t>(n));
        std::int64_t rest = flat, sum = 0;
        for (int k = 0; k < n - 1; ++k) {
            h[static_cast<std::size_t>(k)] = 1 + static_cast<int>(rest % m);
            sum += h[static_cast<std::size_t>(k)];
            rest /= m;
        }
        const int last = mod_nonneg(-sum, m);
        h[static_cast<std::size_t>(n - 1)] = last == 0 ? m : last;
        out.push_back(design_projector_h(h, n, d, m));
    }
    return out;
}

// One-way family for a GHZ-like target: the base projectors adapted at
// `party`. Qubits use the X/Y family, d >= 3 the design family.
inline std::vector<TestOperator> adapted_family(const GhzLikeSpec& spec, int n, int m, int party) {
    const int d = spec.local_dim();
    std::vector<TestOperator> base =
        d == 2 ? xy_family(n) : design_h_family(n, d, m);
    std::vector<TestOperator> out;
    out.reserve(base.size());
    for (const auto& b : base) out.push_back(adapted_projector(b, spec, party));
    return out;
}

// --- Optimal-probability helpers ---------------------------------------------

// lambda_0^2 / (1 + lambda_0^2): optimal standard-test weight one-way.
inline double one_way_optimal_p(const GhzLikeSpec& spec) {
    const double l0sq = spec.lambdas[0] * spec.lambdas[0];
    return l0sq / (1.0 + l0sq);
}

// [(n-1) l0^2 + l1^2] / [n + (n-1) l0^2 + l1^2]: optimal weight with the
// adaptive role distributed over all parties.
inline double role_swapped_optimal_p(const GhzLikeSpec& spec, int n) {
    const double l0sq = spec.lambdas[0] * spec.lambdas[0];
    const double l1sq = spec.lambdas[1] * spec.lambdas[1];
    return ((n - 1) * l0sq + l1sq) / (n + (n - 1) * l0sq + l1sq);
}

// --- Strategy builders --------------------------------------------------------

// Qubit GHZ strategy: P0 with probability 1/3, each X/Y projector with
// probability 1/(3 * 2^{n-2}); homogeneous with spectral gap 2/3.
inline Strategy build_omega_I(int n) {
    if (n < 2) throw InvalidSpec("omega1: need n >= 2");
    const auto target = ghz_state(n, 2);
    std::vector<WeightedTest> tests;
    const Fraction p0{1, 3};
    tests.push_back({p0.value(), p0, canonical_projector_z(n, 2)});
    const Fraction each{1, 3 * (std::int64_t{1} << (n - 2))};
    for (auto& t : xy_family(n)) tests.push_back({each.value(), each, std::move(t)});
    return make_strategy("omega1", target, std::move(tests),
                         {{"n", static_cast<double>(n)}, {"d", 2.0}});
}

// Qudit GHZ strategy for odd prime d: P0 with probability 1/(d+1), each P_r
// with probability 1/[(d+1) d^{n-2}]; spectral gap d/(d+1).
inline Strategy build_omega_II(int n, int d) {
    if (n < 2) throw InvalidSpec("omega2: need n >= 2");
    if (!is_odd_prime(d))
        throw NotOddPrime("omega2: requires an odd prime local dimension; "
                          "use omega3 for composite or even d >= 3");
    const auto target = ghz_state(n, d);
    std::vector<WeightedTest> tests;
    const Fraction p0{1, d + 1};
    tests.push_back({p0.value(), p0, canonical_projector_z(n, d)});
    std::int64_t dpow = 1;  // d^{n-2}
    for (int k = 0; k < n - 2; ++k) dpow *= d;
    const Fraction each{1, (d + 1) * dpow};
    for (auto& t : pauli_r_family(n, d)) tests.push_back({each.value(), each, std::move(t)});
    return make_strategy("omega2", target, std::move(tests),
                         {{"n", static_cast<double>(n)}, {"d", static_cast<double>(d)}});
}

// 2-design GHZ strategy for any d >= 3: P0 with probability 1/(d+1), each P_h
// with probability d/[(d+1) m^{n-1}]; spectral gap d/(d+1).
inline Strategy build_omega_III(int n, int d, int m = 0) {
    if (n < 2 || d < 3) throw InvalidSpec("omega3: need n >= 2 and d >= 3");
    if (m == 0) m = min_design_m(d);
    if (m < min_design_m(d))
        throw MTooSmall("omega3: need m >= " + std::to_string(min_design_m(d)));
    const auto target = ghz_state(n, d);
    std::vector<WeightedTest> tests;
    const Fraction p0{1, d + 1};
    tests.push_back({p0.value(), p0, canonical_projector_z(n, d)});
    std::int64_t mpow = 1;  // m^{n-1}
    for (int k = 0; k < n - 1; ++k) mpow *= m;
    const Fraction each{d, (d + 1) * mpow};
    for (auto& t : design_h_family(n, d, m)) tests.push_back({each.value(), each, std::move(t)});
    return make_strategy("omega3", target, std::move(tests),
                         {{"n", static_cast<double>(n)},
                          {"d", static_cast<double>(d)},
                          {"m", static_cast<double>(m)}});
}

// Two-test GHZ-like strategy: P0 with probability p, the unbiased-basis test
// with probability 1-p; spectral gap 1 - max{p, 1-p}.
inline Strategy build_omega_IV(const GhzLikeSpec& spec, int n, double p = 0.5) {
    if (!(p > 0.0 && p < 1.0)) throw POutOfRange("omega4: need 0 < p < 1");
    const int d = spec.local_dim();
    const auto target = ghz_like_state(spec, n);
    std::vector<WeightedTest> tests;
    tests.push_back({p, std::nullopt, canonical_projector_z(n, d)});
    tests.push_back({1.0 - p, std::nullopt, mub_second_test(spec, n, fourier_basis(d))});
    return make_strategy("omega4", target, std::move(tests),
                         {{"n", static_cast<double>(n)},
                          {"d", static_cast<double>(d)},
                          {"p", p}});
}

// One-way optimal GHZ-like strategy, design family (d >= 3): P0 with
// probability p, each adapted P'_h with probability (1-p)/m^{n-1}.
inline Strategy build_omega_V(const GhzLikeSpec& spec, int n, int m = 0,
                              std::optional<double> p_opt = std::nullopt) {
    const int d = spec.local_dim();
    if (d < 3) throw InvalidSpec("omega5: need d >= 3 (use omega5prime for qubits)");
    if (m == 0) m = min_design_m(d);
    if (m < min_design_m(d))
        throw MTooSmall("omega5: need m >= " + std::to_string(min_design_m(d)));
    const double p = p_opt.value_or(one_way_optimal_p(spec));
    if (!(p > 0.0 && p < 1.0)) throw POutOfRange("omega5: need 0 < p < 1");
    const auto target = ghz_like_state(spec, n);
    std::vector<WeightedTest> tests;
    tests.push_back({p, std::nullopt, canonical_projector_z(n, d)});
    auto adapted = adapted_family(spec, n, m, n - 1);
    const double each = (1.0 - p) / static_cast<double>(adapted.size());
    for (auto& t : adapted) tests.push_back({each, std::nullopt, std::move(t)});
    return make_strategy("omega5", target, std::move(tests),
                         {{"n", static_cast<double>(n)},
                          {"d", static_cast<double>(d)},
                          {"m", static_cast<double>(m)},
                          {"p", p}});
}

// One-way optimal GHZ-like strategy with the Pauli-family measurement count:
// X/Y projectors for qubits, P'_r projectors for odd prime d.
inline Strategy build_omega_V_prime(const GhzLikeSpec& spec, int n,
                                    std::optional<double> p_opt = std::nullopt) {
    const int d = spec.local_dim();
    if (d != 2 && !is_odd_prime(d))
        throw NotOddPrime("omega5prime: requires d = 2 or an odd prime d");
    const double p = p_opt.value_or(one_way_optimal_p(spec));
    if (!(p > 0.0 && p < 1.0)) throw POutOfRange("omega5prime: need 0 < p < 1");
    const auto target = ghz_like_state(spec, n);
    std::vector<WeightedTest> tests;
    tests.push_back({p, std::nullopt, canonical_projector_z(n, d)});
    std::vector<TestOperator> base = d == 2 ? xy_family(n) : pauli_r_family(n, d);
    const double each = (1.0 - p) / static_cast<double>(base.size());
    for (auto& b : base)
        tests.push_back({each, std::nullopt, adapted_projector(b, spec, n - 1)});
    return make_strategy("omega5prime", target, std::move(tests),
                         {{"n", static_cast<double>(n)},
                          {"d", static_cast<double>(d)},
                          {"p", p}});
}

// Role-swapped mixture: the adaptive party cycles over all n positions; the
// flat mixture over all n * (family size) adapted tests plus P0.
inline Strategy build_omega_VI(const GhzLikeSpec& spec, int n,
                               std::optional<double> p_opt = std::nullopt) {
    const int d = spec.local_dim();
    const int m = d == 2 ? 0 : min_design_m(d);
    const double p = p_opt.value_or(role_swapped_optimal_p(spec, n));
    if (!(p > 0.0 && p < 1.0)) throw POutOfRange("omega6: need 0 < p < 1");
    const auto target = ghz_like_state(spec, n);
    std::vector<WeightedTest> tests;
    tests.push_back({p, std::nullopt, canonical_projector_z(n, d)});
    for (int k = 0; k < n; ++k) {
        auto adapted = adapted_family(spec, n, m, k);
        const double each = (1.0 - p) / static_cast<double>(n * adapted.size());
        for (auto& t : adapted) tests.push_back({each, std::nullopt, std::move(t)});
    }
    return make_strategy("omega6", target, std::move(tests),
                         {{"n", static_cast<double>(n)},
                          {"d", static_cast<double>(d)},
                          {"p", p}});
}

// Homogeneous GHZ strategy with configurable beta: mixes the optimal GHZ
// strategy with the trivial test at probability p = [(d+1) beta - 1]/d.
inline Strategy build_omega_VII(int n, int d, double beta) {
    if (!(beta >= 1.0 / (d + 1) - 1e-12 && beta < 1.0))
        throw BetaOutOfRange("omega7: need 1/(d+1) <= beta < 1");
    const double p = ((d + 1) * beta - 1.0) / d;
    Strategy base = d == 2 ? build_omega_I(n)
                    : is_odd_prime(d) ? build_omega_II(n, d)
                                      : build_omega_III(n, d);
    std::vector<WeightedTest> tests;
    tests.push_back({p, std::nullopt, trivial_test(n, d)});
    for (auto& wt : base.tests)
        tests.push_back({(1.0 - p) * wt.p, std::nullopt, std::move(wt.test)});
    return make_strategy("omega7", base.target, std::move(tests),
                         {{"n", static_cast<double>(n)},
                          {"d", static_cast<double>(d)},
                          {"beta", beta},
                          {"p", p}});
}

// Adversarial one-way GHZ-like strategy: Q0 with probability p, the adapted
// family sharing 1-p; homogeneous with beta = p.
inline Strategy build_omega_VIII(const GhzLikeSpec& spec, int n,
                                 std::optional<double> p_opt = std::nullopt, int m = 0) {
    const int d = spec.local_dim();
    if (d >= 3) {
        if (m == 0) m = min_design_m(d);
        if (m < min_design_m(d))
            throw MTooSmall("omega8: need m >= " + std::to_string(min_design_m(d)));
    }
    const double p = p_opt.value_or(std::max(std::exp(-1.0), one_way_optimal_p(spec)));
    const auto target = ghz_like_state(spec, n);
    std::vector<WeightedTest> tests;
    tests.push_back({p, std::nullopt, q0_operator(spec, n, p, false)});
    auto adapted = adapted_family(spec, n, m, n - 1);
    const double each = (1.0 - p) / static_cast<double>(adapted.size());
    for (auto& t : adapted) tests.push_back({each, std::nullopt, std::move(t)});
    return make_strategy("omega8", target, std::move(tests),
                         {{"n", static_cast<double>(n)},
                          {"d", static_cast<double>(d)},
                          {"p", p}});
}

// Adversarial role-swapped GHZ-like strategy: the averaged probabilistic test
// with probability p, role-swapped adapted tests sharing 1-p; homogeneous
// with beta = p.
inline Strategy build_omega_IX(const GhzLikeSpec& spec, int n,
                               std::optional<double> p_opt = std::nullopt) {
    const int d = spec.local_dim();
    const int m = d == 2 ? 0 : min_design_m(d);
    const double p =
        p_opt.value_or(std::max(std::exp(-1.0), role_swapped_optimal_p(spec, n)));
    const auto target = ghz_like_state(spec, n);
    std::vector<WeightedTest> tests;
    tests.push_back({p, std::nullopt, q0_operator(spec, n, p, true)});
    for (int k = 0; k < n; ++k) {
        auto adapted = adapted_family(spec, n, m, k);
        const double each = (1.0 - p) / static_cast<double>(n * adapted.size());
        for (auto& t : adapted) tests.push_back({each, std::nullopt, std::move(t)});
    }
    return make_strategy("omega9", target, std::move(tests),
                         {{"n", static_cast<double>(n)},
                          {"d", static_cast<double>(d)},
                          {"p", p}});
}

}  // namespace ghzv
