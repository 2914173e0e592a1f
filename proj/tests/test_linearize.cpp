#include "droopstab/equilibrium.hpp"
#include "droopstab/errors.hpp"
#include "droopstab/ieee13.hpp"
#include "droopstab/linearize.hpp"

#include "oracles.hpp"
#include "random_grid.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace droopstab;
using namespace droopstab::testing;

TEST(Linearize, AnalyticJacobianMatchesExtendedPrecisionDifferences) {
    ASSERT_GE(std::numeric_limits<long double>::digits, 64);
    std::mt19937_64 rng(31);
    for (int g = 0; g < 15; ++g) {
        const GridSpec spec = random_grid(rng);
        for (int k = 0; k < 5; ++k) {
            const Vector w = random_state(spec, rng);
            const Matrix a = jacobian(spec, OperatingPoint::from_vector(w, spec.n_inverters(),
                                                                        spec.n_lines()));
            const Matrix fd = extended_precision_jacobian(spec, w);
            EXPECT_LE((a - fd).cwiseAbs().maxCoeff(), 1e-6);
        }
    }
}

TEST(Linearize, AnalyticJacobianMatchesDoubleDifferencesRelatively) {
    std::mt19937_64 rng(32);
    const GridSpec spec = random_grid(rng);
    const GridModel model(spec);
    const Vector w = random_state(spec, rng);
    const Matrix a = jacobian(model, OperatingPoint::from_vector(w, spec.n_inverters(),
                                                                 spec.n_lines()));
    const Matrix fd =
        central_difference([&](const Vector& v) { return model.vector_field(v); }, w, 1e-6);
    EXPECT_LE((a - fd).norm(), 1e-6 * a.norm());
}

TEST(Linearize, BlocksReassembleToJacobian) {
    std::mt19937_64 rng(33);
    for (int g = 0; g < 20; ++g) {
        const GridSpec spec = random_grid(rng);
        const auto eq = find_equilibrium(spec, flat_start(spec));
        ASSERT_TRUE(eq.converged);
        const Matrix a = jacobian(spec, eq.point);
        const BlockSystem raw = extract_blocks(a, spec);
        const BlockSystem b = to_standard_form(raw);
        EXPECT_LE((assemble(raw) - a).cwiseAbs().maxCoeff(), 1e-9 * a.cwiseAbs().maxCoeff());
        EXPECT_LE((assemble(b) - a).cwiseAbs().maxCoeff(), 1e-9 * a.cwiseAbs().maxCoeff());
        const int n = spec.n_inverters();
        EXPECT_EQ(b.a_xz.leftCols(n), Matrix::Identity(n, n));
        EXPECT_TRUE(b.a_xz.rightCols(n).isZero());
        // Standard form: eps2 is the geometric mean and D2 = eps2 E2^-1.
        EXPECT_NEAR(std::log(b.eps2), b.eps2_list.array().log().mean(), 1e-12);
        for (int k = 0; k < spec.n_lines(); ++k) {
            EXPECT_NEAR(b.d2(k, k), b.eps2 / b.eps2_list(k), 1e-12);
            EXPECT_NEAR(b.d2(spec.n_lines() + k, spec.n_lines() + k), b.eps2 / b.eps2_list(k),
                        1e-12);
        }
        EXPECT_DOUBLE_EQ(b.eps1, spec.inverters[0].tp);
    }
}

TEST(Linearize, HeterogeneousFiltersRejected) {
    GridSpec spec = build_ieee13(0.05, 0.6);
    EXPECT_DOUBLE_EQ(check_homogeneous_filters(spec), 0.0318);
    spec.inverters[3].tq = 0.05;
    try {
        check_homogeneous_filters(spec);
        FAIL() << "expected AssumptionViolation";
    } catch (const AssumptionViolation& e) {
        EXPECT_NE(std::string(e.what()).find(spec.inverters[3].bus), std::string::npos);
    }
    const double mean = check_homogeneous_filters(spec, 1.0);
    EXPECT_GT(mean, 0.0318);
    EXPECT_LT(mean, 0.05);
    const GridSpec h = homogenize_filters(spec, mean);
    for (const auto& inv : h.inverters) {
        EXPECT_EQ(inv.tp, mean);
        EXPECT_EQ(inv.tq, mean);
    }
}

TEST(Linearize, ExtractRejectsCorruptDeltaRows) {
    std::mt19937_64 rng(34);
    const GridSpec spec = random_grid(rng);
    const auto eq = find_equilibrium(spec, flat_start(spec));
    Matrix a = jacobian(spec, eq.point);
    a(0, 0) = 0.3;
    EXPECT_THROW(extract_blocks(a, spec), InternalConsistencyError);
}
