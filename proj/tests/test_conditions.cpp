#include "droopstab/conditions.hpp"
#include "droopstab/errors.hpp"
#include "droopstab/ieee13.hpp"

#include "random_grid.hpp"

#include <gtest/gtest.h>

using namespace droopstab;
using namespace droopstab::testing;

TEST(Hurwitz, ClassifiesSpectra) {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = -1.0;
    a(1, 1) = -2.0;
    EXPECT_TRUE(hurwitz(a).stable);
    EXPECT_DOUBLE_EQ(hurwitz(a).abscissa, -1.0);
    a(0, 0) = -1e-12;
    EXPECT_FALSE(hurwitz(a).stable);
    EXPECT_TRUE(hurwitz(a).marginal);
    a(0, 0) = 0.5;
    EXPECT_FALSE(hurwitz(a).stable);
    EXPECT_FALSE(hurwitz(a).marginal);
    EXPECT_THROW(hurwitz(a, -1.0), StructuralError);
}

TEST(GainBounds, BoundsFromDiagonalDominance) {
    NuTable nu;
    nu.nu_diag = Vector(2);
    nu.nu_diag << -3.0, -1.0;
    nu.nu_offdiag = Matrix::Zero(2, 2);
    nu.nu_offdiag(0, 1) = 1.0;
    nu.nu_offdiag(1, 0) = 2.0;
    nu.neighbors = {{1}, {0}};
    const auto b = lemma3_gain_bounds(nu);
    EXPECT_EQ(b[0].kind, GainBound::Kind::UnboundedPositive);
    EXPECT_FALSE(b[0].upper.has_value());
    EXPECT_EQ(b[1].kind, GainBound::Kind::UpperBounded);
    EXPECT_DOUBLE_EQ(*b[1].upper, 1.0);

    nu.nu_diag(1) = 0.1;
    try {
        lemma3_gain_bounds(nu);
        FAIL();
    } catch (const AssumptionViolation& e) {
        EXPECT_NE(std::string(e.what()).find("nu_1"), std::string::npos);
    }
}

TEST(Analyze, ExitCodesFollowVerdicts) {
    std::mt19937_64 rng(61);
    for (int g = 0; g < 20; ++g) {
        GridSpec spec = random_grid(rng);
        if (g % 2 == 0) place_timescales(spec, 0.5, 0.5);
        const auto r = analyze(spec);
        const int code = exit_code(r);
        if (!r.hurwitz_full.stable) {
            EXPECT_EQ(code, 3);
        } else {
            EXPECT_EQ(code, r.verdict_full ? 0 : 2);
        }
        EXPECT_EQ(r.conditions_conservative, !r.verdict_full && r.hurwitz_full.stable);
        if (r.verdict_full) EXPECT_TRUE(r.hurwitz_full.stable);
        EXPECT_LE(r.e_closed_form_gap, 1e-8);
    }
}

TEST(Analyze, Ieee13Qualitative) {
    const auto r = analyze(build_ieee13(0.05, 0.6));
    EXPECT_TRUE(r.hurwitz_e.stable);
    EXPECT_TRUE(r.hurwitz_slow.stable);
    EXPECT_TRUE(r.hurwitz_full.stable);
    EXPECT_FALSE(r.eps1 < r.eps1_star);
    EXPECT_FALSE(r.eps3 < r.eps3_star);
    EXPECT_TRUE(r.conditions_conservative);
    EXPECT_EQ(exit_code(r), 2);
}

TEST(Analyze, HeterogeneousFiltersNeedRelaxedTolerance) {
    GridSpec spec = build_ieee13(0.05, 0.6);
    spec.inverters[0].tp = 0.0319;
    try {
        analyze(spec);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "filters");
    }
    AnalysisOptions o;
    o.filter_rel_tol = 0.1;
    const auto r = analyze(spec, o);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Analyze, EquilibriumFailureIsLabelled) {
    GridSpec spec = build_ieee13(0.05, 0.6);
    AnalysisOptions o;
    o.equilibrium.max_iter = 0;
    try {
        analyze(spec, o);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "equilibrium");
    }
}
