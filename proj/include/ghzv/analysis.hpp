// Scalar analysis: number-of-tests formulas, fidelity estimation from pass
// rates, infidelity bounds, entanglement-certification thresholds, and the
// CSV emitters for the comparison table and figure data.

#pragma once

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ghzv/errors.hpp"

namespace ghzv {

struct VerificationPlan {
    double epsilon = 0.0;  // infidelity threshold, in (0,1)
    double delta = 0.0;    // significance level, in (0,1)
    double nu = 0.0;       // spectral gap, in (0,1]

    VerificationPlan(double eps, double del, double gap) : epsilon(eps), delta(del), nu(gap) {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw InvalidSpec("VerificationPlan: epsilon must lie in (0,1)");
        if (!(delta > 0.0 && delta < 1.0))
            throw InvalidSpec("VerificationPlan: delta must lie in (0,1)");
        if (!(nu > 0.0 && nu <= 1.0))
            throw InvalidSpec("VerificationPlan: nu must lie in (0,1]");
    }
};

namespace detail {

// Ceiling on an extended-precision value with a guard band, so results that
// sit exactly on integers do not get pushed up by rounding noise.
inline long long guarded_ceil(long double x) {
    return static_cast<long long>(std::ceil(x - 1e-12L));
}

inline bool odd_prime(int d) {
    if (d < 3 || d % 2 == 0) return false;
    for (int k = 3; k * k <= d; k += 2)
        if (d % k == 0) return false;
    return true;
}

}  // namespace detail

// N = ceil(ln delta / ln(1 - nu epsilon)); returns 1 when nu epsilon >= 1
// (a single test already decides).
inline long long num_tests(const VerificationPlan& plan) {
    const long double prod = static_cast<long double>(plan.nu) * plan.epsilon;
    if (prod >= 1.0L) return 1;
    const long double ratio =
        std::log(static_cast<long double>(plan.delta)) / std::log1p(-prod);
    return detail::guarded_ceil(ratio);
}

inline long long num_tests(double epsilon, double delta, double nu) {
    return num_tests(VerificationPlan(epsilon, delta, nu));
}

// Tests needed to certify genuine multipartite entanglement (fidelity above
// 1/d) with the optimal strategy: ceil(ln delta / (ln 2 - ln(d+1))).
inline long long gme_tests_optimal(int d, double delta) {
    if (d < 2) throw InvalidSpec("gme_tests_optimal: need d >= 2");
    if (!(delta > 0.0 && delta < 1.0))
        throw InvalidSpec("gme_tests_optimal: delta must lie in (0,1)");
    const long double ratio = std::log(static_cast<long double>(delta)) /
                              (std::log(2.0L) - std::log(static_cast<long double>(d) + 1.0L));
    return detail::guarded_ceil(ratio);
}

// Single-test certification is possible exactly when d >= 2/delta - 1.
inline bool gme_single_test_region(int d, double delta, bool adversarial) {
    if (d < 2) throw InvalidSpec("gme_single_test_region: need d >= 2");
    const double threshold = adversarial
                                 ? 4.0 * d / ((d + 1.0) * (d + 1.0))
                                 : 2.0 / (d + 1.0);
    return delta >= threshold - 1e-12;
}

// Reference strategy from the literature for qubit GHZ states (spectral gap
// 2^{n-1}/(2^n - 1)); the commonly quoted certification counts use n = 3.
inline long long gme_tests_plm(double delta, int n = 3) {
    if (n < 2) throw InvalidSpec("gme_tests_plm: need n >= 2");
    const long double pw = std::pow(2.0L, static_cast<long double>(n));
    const long double nu_eps = (pw / 4.0L) / (pw - 1.0L);  // nu * 1/2
    return detail::guarded_ceil(std::log(static_cast<long double>(delta)) /
                                std::log1p(-nu_eps));
}

// Reference two-setting coloring strategy (spectral gap 1/2) for qudit GHZ
// states; d = 0 requests the large-d limiting count ceil(log2(1/delta)).
inline long long gme_tests_zh(double delta, int d = 0) {
    const long double num = std::log(static_cast<long double>(delta));
    if (d == 0) return detail::guarded_ceil(num / -std::log(2.0L));
    if (d < 2) throw InvalidSpec("gme_tests_zh: need d >= 2");
    const long double den = std::log(static_cast<long double>(d) + 1.0L) -
                            std::log(2.0L * static_cast<long double>(d));
    return detail::guarded_ceil(num / den);
}

// F = (passrate - beta) / nu, valid for homogeneous strategies. `tol` widens
// the admissible range for statistically estimated pass rates.
inline double fidelity_from_passrate(double passrate, double beta, double nu,
                                     double tol = 1e-9) {
    if (!(nu > 0.0)) throw InvalidSpec("fidelity_from_passrate: need nu > 0");
    const double f = (passrate - beta) / nu;
    if (f < -tol || f > 1.0 + tol)
        throw ResultOutOfRange("fidelity_from_passrate: estimate " + std::to_string(f) +
                               " escapes [0,1]; model mismatch");
    return f;
}

// Standard deviation of the fidelity estimate after N tests; bounded above
// by 1/(2 nu sqrt(N)).
inline double fidelity_std(double f, double nu, long long n_tests) {
    if (!(nu > 0.0) || n_tests < 1) throw InvalidSpec("fidelity_std: need nu > 0 and N >= 1");
    const double prod = std::max(0.0, (1.0 - f) * (f + 1.0 / nu - 1.0));
    return std::sqrt(prod / static_cast<double>(n_tests));
}

// [(1 - passrate)/(1 - tau), (1 - passrate)/nu]
inline std::pair<double, double> infidelity_bounds(double passrate, double nu, double tau) {
    if (!(nu > 0.0) || !(tau < 1.0)) throw InvalidSpec("infidelity_bounds: need nu > 0, tau < 1");
    return {(1.0 - passrate) / (1.0 - tau), (1.0 - passrate) / nu};
}

// High-precision adversarial count: ceil([beta eps ln(1/beta)]^{-1} ln(1/delta));
// minimized at beta = 1/e.
inline long long adversarial_num_tests(double beta, double epsilon, double delta) {
    if (!(beta > 0.0 && beta < 1.0))
        throw BetaOutOfRange("adversarial_num_tests: need 0 < beta < 1");
    if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0))
        throw InvalidSpec("adversarial_num_tests: epsilon, delta must lie in (0,1)");
    const long double b = static_cast<long double>(beta);
    const long double value = -std::log(static_cast<long double>(delta)) /
                              (b * static_cast<long double>(epsilon) * (-std::log(b)));
    return detail::guarded_ceil(value);
}

// --- CSV emitters -------------------------------------------------------------

struct Table1Row {
    std::string strategy;
    double nu = 0.0;
    bool homogeneous = false;
    long long n_tests = 0;
    long long settings = 0;
};

// Strategy comparison for the n-party GHZ state of local dimension d. Rows
// for the reference strategies carry their published spectral gaps.
inline std::vector<Table1Row> table1_rows(int n, int d, double epsilon, double delta) {
    if (n < 2 || d < 2) throw InvalidSpec("table1_rows: need n >= 2, d >= 2");
    std::vector<Table1Row> rows;
    auto pow_ll = [](std::int64_t base, int e) {
        std::int64_t r = 1;
        for (int i = 0; i < e; ++i) r *= base;
        return r;
    };
    if (d == 2) {
        const double nu_plm =
            std::pow(2.0, n - 1) / (std::pow(2.0, n) - 1.0);
        rows.push_back({"omega_plm", nu_plm, true, num_tests(epsilon, delta, nu_plm),
                        pow_ll(2, n) - 1});
    }
    rows.push_back({"omega_zh", 0.5, false, num_tests(epsilon, delta, 0.5), 2});
    if (d == 2) {
        rows.push_back({"omega1", 2.0 / 3.0, true, num_tests(epsilon, delta, 2.0 / 3.0),
                        pow_ll(2, n - 1) + 1});
    } else {
        const double nu = static_cast<double>(d) / (d + 1);
        if (detail::odd_prime(d))
            rows.push_back({"omega2", nu, true, num_tests(epsilon, delta, nu),
                            pow_ll(d, n - 1) + 1});
        rows.push_back({"omega3", nu, true, num_tests(epsilon, delta, nu),
                        pow_ll((3 * (d - 1) * (d - 1) + 3) / 4, n - 1) + 1});
    }
    return rows;
}

inline void write_table1_csv(std::ostream& os, int n, int d, double epsilon, double delta) {
    os << std::setprecision(12);
    os << "strategy,nu,homogeneous,N,settings\n";
    for (const auto& row : table1_rows(n, d, epsilon, delta))
        os << row.strategy << ',' << row.nu << ',' << (row.homogeneous ? "yes" : "no") << ','
           << row.n_tests << ',' << row.settings << '\n';
}

// Single-test certification thresholds as a function of the local dimension.
inline void write_fig1_csv(std::ostream& os, int d_max = 200) {
    os << std::setprecision(12);
    os << "d,delta_nonadversarial,delta_adversarial\n";
    for (int d = 2; d <= d_max; ++d)
        os << d << ',' << 2.0 / (d + 1.0) << ','
           << 4.0 * d / ((d + 1.0) * (d + 1.0)) << '\n';
}

// Test counts for the qubit GHZ-like family cos(theta)|0..0> + sin(theta)|1..1>
// over theta in (0, pi/4], from the closed-form spectral gaps.
inline void write_fig2_csv(std::ostream& os, int n = 3, double epsilon = 0.01,
                           double delta = 0.01, int points = 60) {
    if (n < 2 || points < 1) throw InvalidSpec("write_fig2_csv: need n >= 2, points >= 1");
    os << std::setprecision(12);
    os << "theta,N_omega4,N_omega5prime,N_omega6,N_omega8_adv,N_omega9_adv\n";
    const double quarter_pi = std::atan(1.0);
    for (int i = 1; i <= points; ++i) {
        const double theta = quarter_pi * i / points;
        const double c2 = std::cos(theta) * std::cos(theta);
        const double s2 = 1.0 - c2;
        const double nu5 = 1.0 / (1.0 + c2);
        const double nu6 = n / (n + (n - 1) * c2 + s2);
        const double beta8 = std::max(std::exp(-1.0), c2 / (1.0 + c2));
        const double beta9 =
            std::max(std::exp(-1.0), ((n - 1) * c2 + s2) / (n + (n - 1) * c2 + s2));
        os << theta << ',' << num_tests(epsilon, delta, 0.5) << ','
           << num_tests(epsilon, delta, nu5) << ',' << num_tests(epsilon, delta, nu6) << ','
           << adversarial_num_tests(beta8, epsilon, delta) << ','
           << adversarial_num_tests(beta9, epsilon, delta) << '\n';
    }
}

}  // namespace ghzv
