#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

using namespace phidro;

namespace {

constexpr double kE = 2.718281828459045;

void expect_kind(ErrorKind kind, const std::function<void()>& fn) {
    try {
        fn();
        ADD_FAILURE() << "no error thrown";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

}  // namespace

TEST(DivergenceSpec, FactoriesValidateParameters) {
    expect_kind(ErrorKind::Validation, [] { DivergenceSpec::cvar(0.0); });
    expect_kind(ErrorKind::Validation, [] { DivergenceSpec::cvar(1.0); });
    expect_kind(ErrorKind::Validation, [] { DivergenceSpec::cressie_read(1.0); });
    expect_kind(ErrorKind::Validation, [] { DivergenceSpec::cressie_read(0.0); });
    expect_kind(ErrorKind::Validation, [] { DivergenceSpec::cressie_read(-1.0); });
    EXPECT_DOUBLE_EQ(DivergenceSpec::cvar(0.25).domain_upper(), 4.0);
    EXPECT_TRUE(DivergenceSpec::cvar(0.25).is_indicator());
    EXPECT_TRUE(DivergenceSpec::ess_sup().is_indicator());
    EXPECT_EQ(DivergenceSpec::ess_sup().growth_class(), GrowthClass::Sublinear);
}

TEST(DivergenceSpec, GrowthClassification) {
    EXPECT_EQ(classify_growth(DivergenceSpec::kl()), GrowthClass::Superlinear);
    EXPECT_EQ(classify_growth(DivergenceSpec::cressie_read(1.5)), GrowthClass::Superlinear);
    EXPECT_EQ(classify_growth(DivergenceSpec::cressie_read(0.5)), GrowthClass::Sublinear);
    EXPECT_EQ(classify_growth(DivergenceSpec::cressie_read(-2)), GrowthClass::Sublinear);
    EXPECT_EQ(classify_growth(DivergenceSpec::variation()), GrowthClass::Sublinear);
    EXPECT_EQ(classify_growth(DivergenceSpec::burg()), GrowthClass::Sublinear);
    EXPECT_EQ(classify_growth(DivergenceSpec::neyman_chi2()), GrowthClass::Sublinear);
    EXPECT_EQ(classify_growth(DivergenceSpec::hellinger()), GrowthClass::Sublinear);
    EXPECT_EQ(classify_growth(DivergenceSpec::cvar(0.1)), GrowthClass::Indicator);
    EXPECT_EQ(classify_growth(DivergenceSpec::ess_sup()), GrowthClass::Sublinear);
}

TEST(DivergenceSpec, GrowthClassMatchesRatioProbe) {
    for (const auto& s : oracle::catalog()) {
        const double far = oracle::phi(s, 1e9) / 1e9;
        const double mid = oracle::phi(s, 1e6) / 1e6;
        switch (s.growth_class()) {
            case GrowthClass::Superlinear: EXPECT_GT(far, mid + 1.0) << oracle::label(s); break;
            case GrowthClass::Sublinear: EXPECT_LT(std::abs(far - mid), 1e-2) << oracle::label(s); break;
            case GrowthClass::Indicator: EXPECT_TRUE(std::isinf(far)) << oracle::label(s); break;
        }
    }
}

TEST(Phi, FixedValues) {
    EXPECT_EQ(phi_value(DivergenceSpec::kl(), 1.0), ExtendedReal(0.0));
    EXPECT_DOUBLE_EQ(phi_value(DivergenceSpec::variation(), 3.0).value(), 2.0);
    EXPECT_NEAR(phi_value(DivergenceSpec::kl(), kE).value(), 1.0, 1e-15);
    EXPECT_TRUE(phi_value(DivergenceSpec::cvar(0.1), 11.0).is_infinite());
    EXPECT_DOUBLE_EQ(phi_value(DivergenceSpec::kl(), 0.0).value(), 1.0);
    EXPECT_NEAR(phi_value(DivergenceSpec::cressie_read(2), 3.0).value(), 2.0, 1e-14);
    EXPECT_DOUBLE_EQ(phi_value(DivergenceSpec::hellinger(), 4.0).value(), 1.0);
}

TEST(Phi, VanishesAtOneAndIsInfiniteBelowZero) {
    for (const auto& s : oracle::catalog()) {
        EXPECT_EQ(phi_value(s, 1.0).value(), 0.0) << oracle::label(s);
        EXPECT_TRUE(phi_value(s, -1e-9).is_infinite()) << oracle::label(s);
        EXPECT_TRUE(phi_value(s, -5.0).is_infinite()) << oracle::label(s);
    }
}

TEST(Phi, ConvexOnRandomTriples) {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(0.0, 20.0), t(0.0, 1.0);
    for (const auto& s : oracle::catalog()) {
        for (int i = 0; i < 2000; ++i) {
            const double a = u(g), b = u(g), w = t(g);
            const double lhs = oracle::phi(s, w * a + (1 - w) * b);
            const double rhs = w * oracle::phi(s, a) + (1 - w) * oracle::phi(s, b);
            if (std::isinf(rhs)) continue;
            EXPECT_LE(lhs, rhs + 1e-12 * (1 + std::abs(rhs))) << oracle::label(s) << " a=" << a << " b=" << b;
        }
    }
}

TEST(Conjugate, FixedValues) {
    EXPECT_EQ(conjugate(DivergenceSpec::kl(), 1.0, 0.0), ExtendedReal(0.0));
    EXPECT_DOUBLE_EQ(conjugate(DivergenceSpec::cvar(0.5), 1.0, 2.0).value(), 4.0);
    EXPECT_DOUBLE_EQ(conjugate(DivergenceSpec::variation(), 1.0, -2.0).value(), -1.0);
    EXPECT_TRUE(conjugate(DivergenceSpec::variation(), 1.0, 2.0).is_infinite());
    EXPECT_NEAR(conjugate(DivergenceSpec::kl(), 1.0, 1.0).value(), kE - 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(conjugate(DivergenceSpec::hellinger(), 1.0, 0.5).value(), 1.0);
}

TEST(Conjugate, MatchesGridOracle) {
    // (lambda phi)^*(y) = 4 for CVaR(0.5) at y = 2, Hellinger at y = 0.5 gives 1.
    EXPECT_NEAR(oracle::grid_conjugate(DivergenceSpec::cvar(0.5), 1.0, 2.0, 10.0, 100000), 4.0, 1e-9);
    EXPECT_NEAR(oracle::grid_conjugate(DivergenceSpec::hellinger(), 1.0, 0.5, 20.0, 1000000), 1.0, 1e-6);
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> lam(0.2, 5.0), y(-3.0, 0.9);
    for (const auto& s : oracle::catalog()) {
        for (int i = 0; i < 20; ++i) {
            const double l = lam(g), yy = y(g) * l * 0.5;
            const auto c = conjugate(s, l, yy);
            if (c.is_infinite()) continue;
            const double x = std::min(s.domain_upper(), 40.0);
            const double grid = oracle::grid_conjugate(s, l, yy, x, 400000);
            EXPECT_GE(c.value(), grid - 1e-9) << oracle::label(s);
            EXPECT_NEAR(c.value(), grid, 1e-5 * (1 + std::abs(grid))) << oracle::label(s) << " l=" << l << " y=" << yy;
        }
    }
}

TEST(Conjugate, ZeroLambdaIsSupportFunction) {
    EXPECT_DOUBLE_EQ(conjugate(DivergenceSpec::cvar(0.2), 0.0, 3.0).value(), 15.0);
    EXPECT_DOUBLE_EQ(conjugate(DivergenceSpec::cvar(0.2), 0.0, -3.0).value(), 0.0);
    EXPECT_TRUE(conjugate(DivergenceSpec::kl(), 0.0, 1e-3).is_infinite());
    EXPECT_DOUBLE_EQ(conjugate(DivergenceSpec::kl(), 0.0, -1.0).value(), 0.0);
}

TEST(Conjugate, DominatesIdentityAndIsConvexInY) {
    // x = 1 is feasible, so the conjugate is at least y; convexity in y at midpoints.
    std::mt19937_64 g(17);
    std::uniform_real_distribution<double> lam(1e-3, 10.0), y(-10.0, 10.0);
    for (const auto& s : oracle::catalog()) {
        for (int i = 0; i < 500; ++i) {
            const double l = lam(g), a = y(g), b = y(g);
            const auto ca = conjugate(s, l, a), cb = conjugate(s, l, b), cm = conjugate(s, l, 0.5 * (a + b));
            EXPECT_GE(ca.value(), a - 1e-12 * std::abs(a)) << oracle::label(s);
            if (ca.is_finite() && cb.is_finite()) {
                ASSERT_TRUE(cm.is_finite()) << oracle::label(s);
                EXPECT_LE(cm.value(), 0.5 * (ca.value() + cb.value()) + 1e-9 * (1 + std::abs(cm.value())))
                    << oracle::label(s);
            }
        }
    }
}

TEST(Conjugate, AgreesWithNumericOracle) {
    std::mt19937_64 g(23);
    std::uniform_real_distribution<double> lam(1e-3, 10.0), y(-10.0, 10.0);
    for (const auto& s : oracle::catalog()) {
        for (int i = 0; i < 200; ++i) {
            const double l = lam(g), yy = y(g);
            const auto closed = conjugate(s, l, yy);
            const auto numeric = conjugate_numeric(s, l, yy, 1e-12);
            ASSERT_EQ(closed.is_finite(), numeric.is_finite()) << oracle::label(s) << " l=" << l << " y=" << yy;
            if (closed.is_finite()) {
                EXPECT_LE(std::abs(closed.value() - numeric.value()), 1e-6 * std::max(1.0, std::abs(closed.value())))
                    << oracle::label(s) << " l=" << l << " y=" << yy;
            }
        }
    }
}

TEST(ConjugateNumeric, FixedValues) {
    EXPECT_NEAR(conjugate_numeric(DivergenceSpec::kl(), 2.0, 0.0, 1e-10).value(), 0.0, 1e-9);
    EXPECT_NEAR(conjugate_numeric(DivergenceSpec::kl(), 1.0, 1.0, 1e-10).value(), kE - 1.0, 1e-8);
    const double grid = oracle::grid_conjugate(DivergenceSpec::hellinger(), 1.0, 0.5, 20.0, 1000000);
    EXPECT_NEAR(conjugate_numeric(DivergenceSpec::hellinger(), 1.0, 0.5, 1e-10).value(), grid, 1e-6);
}

TEST(ConjugateNumeric, ReportsNonConvergence) {
    expect_kind(ErrorKind::NonConvergence, [] { conjugate_numeric(DivergenceSpec::kl(), 1.0, 1.0, 1e-300); });
}

TEST(TruncatedConjugate, FixedValues) {
    EXPECT_NEAR(truncated_conjugate(DivergenceSpec::kl(), 1.0, 10.0, 2.0), 19.613705638880109, 1e-12);
    EXPECT_NEAR(truncated_conjugate(DivergenceSpec::kl(), 1.0, 0.0, 5.0), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(truncated_conjugate(DivergenceSpec::variation(), 1.0, 2.0, 3.0), 4.0);
    EXPECT_THROW(truncated_conjugate(DivergenceSpec::kl(), 1.0, 0.0, 0.5), Error);
    // lambda = 0: support function of the closed domain cut at L, even where phi(0) = inf.
    EXPECT_EQ(truncated_conjugate(DivergenceSpec::burg(), 0.0, -1.0, 3.0), 0.0);
    EXPECT_EQ(truncated_conjugate(DivergenceSpec::burg(), 0.0, 2.0, 3.0), 6.0);
    EXPECT_EQ(truncated_conjugate(DivergenceSpec::neyman_chi2(), 0.0, -0.5, 2.0), 0.0);
    EXPECT_EQ(truncated_conjugate(DivergenceSpec::ess_sup(), 1.0, 0.5, 4.0), 2.0);
}

TEST(TruncatedConjugate, MonotoneInLevelAndConvergesToConjugate) {
    std::mt19937_64 g(29);
    std::uniform_real_distribution<double> lam(0.1, 5.0), y(-5.0, 5.0);
    for (const auto& s : oracle::catalog()) {
        for (int i = 0; i < 100; ++i) {
            const double l = lam(g), yy = y(g);
            double prev = -detail::inf();
            for (double L : {1.0, 1.5, 3.0, 10.0, 1e3, 1e6}) {
                const double v = truncated_conjugate(s, l, yy, L);
                EXPECT_GE(v, prev - 1e-12 * (1 + std::abs(v))) << oracle::label(s);
                prev = v;
            }
            const auto full = conjugate(s, l, yy);
            EXPECT_LE(prev, full.value() + 1e-9 * (1 + std::abs(prev))) << oracle::label(s);
            const double x = detail::smallest_maximizer(s, l, yy);
            if (full.is_finite() && x <= 1e6) {
                EXPECT_NEAR(prev, full.value(), 1e-9 * (1 + std::abs(prev))) << oracle::label(s);
            }
        }
    }
}

TEST(Growth, FixedValues) {
    EXPECT_EQ(growth_value(DivergenceSpec::kl(), 1.0).value(), 0.0);
    EXPECT_NEAR(growth_value(DivergenceSpec::kl(), kE * kE).value(), 1.1353352832366127, 1e-12);
    EXPECT_EQ(growth_value(DivergenceSpec::cvar(0.1), 5.0).value(), 0.0);
    EXPECT_TRUE(growth_value(DivergenceSpec::cvar(0.1), 20.0).is_infinite());
    EXPECT_THROW(growth_value(DivergenceSpec::kl(), 0.5), Error);
}

TEST(Growth, InverseFixedValues) {
    EXPECT_DOUBLE_EQ(growth_inverse(DivergenceSpec::cvar(0.1), 5.0), 10.0);
    EXPECT_NEAR(growth_inverse(DivergenceSpec::kl(), 1.0 + std::exp(-2.0)) / (kE * kE), 1.0, 1e-6);
    EXPECT_NEAR(growth_inverse(DivergenceSpec::kl(), 5.0) / 402.42755000329055, 1.0, 1e-9);
    EXPECT_NEAR(growth_inverse(DivergenceSpec::kl(), 20.0) / 1318815733.4832147, 1.0, 1e-9);
    expect_kind(ErrorKind::GrowthUnbounded, [] { growth_inverse(DivergenceSpec::variation(), 2.0); });
    expect_kind(ErrorKind::GrowthUnbounded, [] { growth_inverse(DivergenceSpec::kl(), 40.0); });
}

TEST(Growth, MonotoneAndInverseIsLeastPreimage) {
    std::mt19937_64 g(31);
    std::uniform_real_distribution<double> lx(0.0, 20.0);
    for (const auto& s : oracle::catalog()) {
        if (s.growth_class() != GrowthClass::Superlinear) continue;
        for (int i = 0; i < 300; ++i) {
            const double a = std::exp(lx(g)), b = std::exp(lx(g));
            const double lo = std::min(a, b), hi = std::max(a, b);
            EXPECT_LE(growth_value(s, lo).value(), growth_value(s, hi).value()) << oracle::label(s);
            const double y = growth_value(s, hi).value();
            if (y <= 0.0) continue;
            const double inv = growth_inverse(s, y);
            EXPECT_LE(inv, hi * (1 + 1e-9)) << oracle::label(s);
            EXPECT_GE(growth_value(s, inv).value(), y) << oracle::label(s);
        }
    }
}

TEST(Divergence, NontrivialRadius) {
    EXPECT_DOUBLE_EQ(nontrivial_radius(DivergenceSpec::kl()), 0.5);
    EXPECT_DOUBLE_EQ(nontrivial_radius(DivergenceSpec::cvar(0.8)), 0.125);
    EXPECT_DOUBLE_EQ(nontrivial_radius(DivergenceSpec::cvar(0.5)), 0.5);
}
