#include "ghzv/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ghzv/strategies.hpp"

using namespace ghzv;

TEST(NumTests, SimpleAndReferenceValues) {
    EXPECT_EQ(num_tests(0.5, 0.5, 1.0), 1);
    EXPECT_EQ(num_tests(0.01, 0.01, 2.0 / 3.0), 689);
}

TEST(NumTests, EntanglementThresholdMatchesClosedForm) {
    // epsilon = (d-1)/d with nu = d/(d+1) collapses to the certification count.
    for (int d : {2, 3, 7, 199}) {
        const double eps = (d - 1.0) / d;
        const double nu = static_cast<double>(d) / (d + 1);
        EXPECT_EQ(num_tests(eps, 0.01, nu), gme_tests_optimal(d, 0.01)) << "d=" << d;
    }
}

TEST(NumTests, DegenerateProductReturnsOne) {
    EXPECT_EQ(num_tests(VerificationPlan(0.999999999, 0.5, 1.0)), 1);
}

TEST(NumTests, Monotonicity) {
    long long prev = num_tests(0.01, 0.01, 0.1);
    for (double nu : {0.3, 0.5, 0.9}) {
        const long long cur = num_tests(0.01, 0.01, nu);
        EXPECT_LE(cur, prev);
        prev = cur;
    }
    prev = num_tests(0.001, 0.01, 0.5);
    for (double eps : {0.01, 0.1, 0.5}) {
        const long long cur = num_tests(eps, 0.01, 0.5);
        EXPECT_LE(cur, prev);
        prev = cur;
    }
    prev = num_tests(0.01, 0.5, 0.5);
    for (double delta : {0.1, 0.01, 0.001}) {
        const long long cur = num_tests(0.01, delta, 0.5);
        EXPECT_GE(cur, prev);
        prev = cur;
    }
}

TEST(NumTests, RejectsInvalidPlans) {
    EXPECT_THROW(VerificationPlan(0.0, 0.5, 0.5), InvalidSpec);
    EXPECT_THROW(VerificationPlan(0.5, 1.0, 0.5), InvalidSpec);
    EXPECT_THROW(VerificationPlan(0.5, 0.5, 0.0), InvalidSpec);
}

TEST(GmeTests, OptimalSingleTestBoundary) {
    EXPECT_EQ(gme_tests_optimal(199, 0.01), 1);
    EXPECT_EQ(gme_tests_optimal(198, 0.01), 2);
    for (int d : {2, 50, 199, 500}) {
        const bool single = gme_tests_optimal(d, 0.01) == 1;
        EXPECT_EQ(single, d >= 2.0 / 0.01 - 1.0) << "d=" << d;
        EXPECT_EQ(single, gme_single_test_region(d, 0.01, false)) << "d=" << d;
    }
}

TEST(GmeTests, ReferenceStrategyCounts) {
    EXPECT_EQ(gme_tests_plm(0.01), 14);
    EXPECT_EQ(gme_tests_plm(0.001), 21);
    EXPECT_EQ(gme_tests_zh(0.01), 7);
    EXPECT_EQ(gme_tests_zh(0.001), 10);
    // finite-dimension coloring count is larger
    EXPECT_EQ(gme_tests_zh(0.01, 3), 12);
}

TEST(GmeRegion, AdversarialThresholds) {
    EXPECT_TRUE(gme_single_test_region(3, 0.75, true));     // 4*3/16 = 0.75
    EXPECT_FALSE(gme_single_test_region(3, 0.74, true));
    EXPECT_FALSE(gme_single_test_region(2, 0.5, false));    // 2/3 > 0.5
    EXPECT_TRUE(gme_single_test_region(199, 0.01, false));  // 2/200 = 0.01
}

TEST(FidelityFromPassrate, AnchorsAndRoundTrip) {
    EXPECT_NEAR(fidelity_from_passrate(1.0, 1.0 / 3.0, 2.0 / 3.0), 1.0, 1e-12);
    EXPECT_NEAR(fidelity_from_passrate(1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0), 0.0, 1e-12);
    EXPECT_NEAR(fidelity_from_passrate(0.9, 1.0 / 3.0, 2.0 / 3.0), 0.85, 1e-12);
    for (double f : {0.0, 0.25, 0.77, 1.0}) {
        const double beta = 0.4, nu = 0.6;
        const double pass = (1.0 - beta) * f + beta;
        EXPECT_NEAR(fidelity_from_passrate(pass, beta, nu), f, 1e-12);
    }
    EXPECT_THROW(fidelity_from_passrate(1.1, 1.0 / 3.0, 2.0 / 3.0), ResultOutOfRange);
}

TEST(FidelityStd, AnchorsAndUpperBound) {
    EXPECT_NEAR(fidelity_std(1.0, 0.5, 100), 0.0, 1e-12);
    for (double f : {0.0, 0.3, 0.9}) {
        for (double nu : {0.2, 0.5, 1.0}) {
            const double bound = 1.0 / (2.0 * nu * std::sqrt(1000.0));
            EXPECT_LE(fidelity_std(f, nu, 1000), bound + 1e-12);
        }
    }
}

TEST(InfidelityBounds, HomogeneousCollapsesToPoint) {
    const auto [lo, hi] = infidelity_bounds(0.9, 2.0 / 3.0, 1.0 / 3.0);
    EXPECT_NEAR(lo, hi, 1e-12);
    EXPECT_NEAR(hi, 0.1 / (2.0 / 3.0), 1e-12);
}

TEST(InfidelityBounds, SingularOperatorGap) {
    const auto [lo, hi] = infidelity_bounds(0.99, 0.1, 0.0);
    EXPECT_NEAR(lo, 0.01, 1e-12);
    EXPECT_NEAR(hi, 0.1, 1e-12);
    const auto [zl, zh] = infidelity_bounds(1.0, 0.1, 0.0);
    EXPECT_NEAR(zl, 0.0, 1e-15);
    EXPECT_NEAR(zh, 0.0, 1e-15);
}

TEST(InfidelityBounds, LowerBoundAttainedOnExtremeSupport) {
    // A state on the span of the top and bottom eigenvectors of an
    // inhomogeneous operator attains the lower bound exactly.
    const GhzLikeSpec spec({std::sqrt(0.7), std::sqrt(0.3)});
    const auto s = build_omega_IV(spec, 3);
    const auto omega = omega_matrix(s);
    const auto eig = hermitian_eig(omega);
    const int dim = omega.dim();
    std::vector<cplx> bottom(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i)
        bottom[static_cast<std::size_t>(i)] = eig.eigenvectors(i, dim - 1);

    const double eps = 0.2;
    auto sigma = s.target.projector();
    sigma *= cplx{1.0 - eps, 0.0};
    auto tail = ComplexMatrix::outer(bottom, bottom);
    tail *= cplx{eps, 0.0};
    sigma += tail;

    const double pass = (omega * sigma).trace().real();
    const auto sd = spectral_data(s);
    const auto [lo, hi] = infidelity_bounds(pass, sd.nu, sd.tau);
    const double true_infidelity = 1.0 - fidelity(DensityMatrix(sigma), s.target);
    EXPECT_NEAR(lo, true_infidelity, 1e-10);
    EXPECT_LE(lo, hi);
}

TEST(AdversarialNumTests, MinimizedAtInverseE) {
    const double inv_e = std::exp(-1.0);
    const long long n_star = adversarial_num_tests(inv_e, 0.01, 0.01);
    const long long want = static_cast<long long>(
        std::ceil(std::exp(1.0) * 100.0 * std::log(100.0) - 1e-12));
    EXPECT_EQ(n_star, want);
    EXPECT_GT(adversarial_num_tests(0.2, 0.01, 0.01), n_star);
    EXPECT_GT(adversarial_num_tests(0.6, 0.01, 0.01), n_star);
    EXPECT_GT(adversarial_num_tests(0.9, 0.01, 0.01),
              adversarial_num_tests(0.6, 0.01, 0.01));
}

TEST(AdversarialNumTests, HalfBetaOverheadIsAboutSixPercent) {
    const double ratio = static_cast<double>(adversarial_num_tests(0.5, 1e-4, 1e-6)) /
                         static_cast<double>(adversarial_num_tests(std::exp(-1.0), 1e-4, 1e-6));
    EXPECT_NEAR(ratio, 2.0 / (std::log(2.0) * std::exp(1.0)), 1e-3);
    EXPECT_GT(ratio, 1.05);
    EXPECT_LT(ratio, 1.07);
}

TEST(Table1, QubitAndQuditRows) {
    const auto rows2 = table1_rows(3, 2, 0.01, 0.01);
    ASSERT_EQ(rows2.size(), 3u);
    EXPECT_EQ(rows2[0].strategy, "omega_plm");
    EXPECT_NEAR(rows2[0].nu, 4.0 / 7.0, 1e-12);
    EXPECT_EQ(rows2[0].settings, 7);
    EXPECT_EQ(rows2[1].strategy, "omega_zh");
    EXPECT_FALSE(rows2[1].homogeneous);
    EXPECT_EQ(rows2[2].strategy, "omega1");
    EXPECT_EQ(rows2[2].settings, 5);
    EXPECT_EQ(rows2[2].n_tests, 689);

    const auto rows3 = table1_rows(2, 3, 0.01, 0.01);
    ASSERT_EQ(rows3.size(), 3u);  // zh, omega2, omega3
    EXPECT_EQ(rows3[1].strategy, "omega2");
    EXPECT_EQ(rows3[1].settings, 4);
    EXPECT_NEAR(rows3[1].nu, 0.75, 1e-12);
    EXPECT_EQ(rows3[2].strategy, "omega3");
    EXPECT_EQ(rows3[2].settings, 4);

    const auto rows4 = table1_rows(2, 4, 0.01, 0.01);
    ASSERT_EQ(rows4.size(), 2u);  // zh, omega3 (no Pauli row for composite d)
    EXPECT_EQ(rows4[1].strategy, "omega3");
    EXPECT_EQ(rows4[1].settings, 8);
}

TEST(CsvEmitters, HeadersAndShape) {
    std::ostringstream t1;
    write_table1_csv(t1, 3, 2, 0.01, 0.01);
    EXPECT_EQ(t1.str().substr(0, 35), "strategy,nu,homogeneous,N,settings\n");

    std::ostringstream f1;
    write_fig1_csv(f1, 5);
    int lines = 0;
    for (char c : f1.str())
        if (c == '\n') ++lines;
    EXPECT_EQ(lines, 5);  // header + d = 2..5

    std::ostringstream f2;
    write_fig2_csv(f2, 3, 0.01, 0.01, 10);
    lines = 0;
    for (char c : f2.str())
        if (c == '\n') ++lines;
    EXPECT_EQ(lines, 11);
}

TEST(Fig2, MonotoneStructureAndEndpoint) {
    // N(omega6) <= N(omega5prime), equal at theta = pi/4; the one-way count
    // decreases as the state approaches the GHZ point.
    const int n = 3;
    const double eps = 0.01, delta = 0.01;
    long long prev5 = -1;
    for (int i = 1; i <= 40; ++i) {
        const double theta = std::atan(1.0) * i / 40;
        const double c2 = std::cos(theta) * std::cos(theta);
        const double s2 = 1.0 - c2;
        const long long n5 = num_tests(eps, delta, 1.0 / (1.0 + c2));
        const long long n6 = num_tests(eps, delta, n / (n + (n - 1) * c2 + s2));
        EXPECT_LE(n6, n5);
        if (prev5 >= 0) {
            EXPECT_LE(n5, prev5);
        }
        prev5 = n5;
    }
    const double c2_end = 0.5, s2_end = 0.5;
    EXPECT_EQ(num_tests(eps, delta, 1.0 / 1.5),
              num_tests(eps, delta, n / (n + (n - 1) * c2_end + s2_end)));
}
