#include "droopstab/conditions.hpp"
#include "droopstab/equilibrium.hpp"
#include "droopstab/errors.hpp"
#include "droopstab/linalg.hpp"
#include "droopstab/timescale.hpp"

#include "random_grid.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace droopstab;
using namespace droopstab::testing;

namespace {

struct Prepared {
    GridSpec spec;
    OperatingPoint w0;
    BlockSystem b;
};

Prepared prepare(const GridSpec& spec) {
    const auto eq = find_equilibrium(spec, flat_start(spec));
    EXPECT_TRUE(eq.converged);
    return {spec, eq.point, to_standard_form(extract_blocks(jacobian(spec, eq.point), spec))};
}

// Greedy nearest matching of two spectra; returns the worst scaled distance.
double spectrum_gap(Eigen::VectorXcd a, Eigen::VectorXcd b) {
    double worst = 0.0;
    std::vector<bool> used(static_cast<size_t>(b.size()), false);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = 1e300;
        Eigen::Index arg = -1;
        for (Eigen::Index j = 0; j < b.size(); ++j) {
            if (used[static_cast<size_t>(j)]) continue;
            const double d = std::abs(a(i) - b(j));
            if (d < best) {
                best = d;
                arg = j;
            }
        }
        used[static_cast<size_t>(arg)] = true;
        worst = std::max(worst, best / std::max(1.0, std::abs(a(i))));
    }
    return worst;
}

}  // namespace

TEST(Timescale, ManifoldsAnnihilateFastRows) {
    std::mt19937_64 rng(41);
    for (int g = 0; g < 20; ++g) {
        const auto p = prepare(random_grid(rng));
        const ReducedModel r = reduce(p.b);
        EXPECT_LE((p.b.a_yz + p.b.a_yy * r.a0z).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((p.b.a_yx + p.b.a_yy * r.a0x).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((r.azz_tilde * r.gamma0 + r.azx_tilde).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((r.a_slow - p.b.a_xz * r.gamma0).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((r.ayy_tilde - p.b.d2 * p.b.a_yy).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Timescale, ClosedFormEMatchesExtraction) {
    std::mt19937_64 rng(42);
    for (int g = 0; g < 50; ++g) {
        const auto p = prepare(random_grid(rng));
        const ReducedModel r = reduce(p.b);
        const Matrix closed = e_matrix_closed_form(p.spec, p.w0);
        EXPECT_LE((closed - r.e_matrix).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Timescale, ReducedNetworkSpectrumIsMinusOneAndE) {
    std::mt19937_64 rng(43);
    for (int g = 0; g < 50; ++g) {
        const auto p = prepare(random_grid(rng));
        const ReducedModel r = reduce(p.b);
        const int n = p.b.n;
        Eigen::VectorXcd expected(2 * n);
        expected.head(n).setConstant(-1.0);
        expected.tail(n) = eigenvalues(r.e_matrix);
        EXPECT_LE(spectrum_gap(eigenvalues(r.azz_tilde), expected), 1e-8);
        EXPECT_LE(spectrum_gap(expected, eigenvalues(r.azz_tilde)), 1e-8);
    }
}

TEST(Timescale, EIsMetzlerAndMatchesNuTable) {
    std::mt19937_64 rng(44);
    for (int g = 0; g < 30; ++g) {
        const auto p = prepare(random_grid(rng));
        const NuTable nu = nu_table(p.spec, p.w0);
        const Matrix e = e_matrix_from_nu(p.spec, nu);
        const int n = p.b.n;
        for (int i = 0; i < n; ++i) {
            const double kq = p.spec.inverters[static_cast<size_t>(i)].kq;
            EXPECT_NEAR(e(i, i), kq * nu.nu_diag(i) - 1.0, 1e-12);
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                EXPECT_NEAR(e(i, j), kq * nu.nu_offdiag(i, j), 1e-12);
                EXPECT_GE(e(i, j), -1e-12);
            }
        }
    }
}

TEST(Timescale, GainsInsideDecentralizedBoundsGiveHurwitzE) {
    std::mt19937_64 rng(45);
    for (int g = 0; g < 50; ++g) {
        const auto p = prepare(random_grid(rng));
        const NuTable nu = nu_table(p.spec, p.w0);
        std::vector<GainBound> bounds;
        try {
            bounds = lemma3_gain_bounds(nu);
        } catch (const AssumptionViolation&) {
            continue;
        }
        bool inside = true;
        for (int i = 0; i < p.b.n; ++i) {
            const auto& bd = bounds[static_cast<size_t>(i)];
            if (bd.upper && !(p.spec.inverters[static_cast<size_t>(i)].kq < *bd.upper)) {
                inside = false;
            }
        }
        if (inside) EXPECT_TRUE(hurwitz(reduce(p.b).e_matrix).stable);
    }
}

TEST(Timescale, SlowMatrixInvariantUnderTimescaleScaling) {
    std::mt19937_64 rng(46);
    GridSpec spec = random_grid(rng);
    const ReducedModel a = reduce(prepare(spec).b);
    for (auto& inv : spec.inverters) inv.tp = inv.tq = 0.2;
    for (auto& l : spec.lines) l.l *= 7.0;
    const ReducedModel b = reduce(prepare(spec).b);
    EXPECT_LE((a.e_matrix - b.e_matrix).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((a.a_slow - b.a_slow).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Timescale, IllConditionedReductionRefused) {
    std::mt19937_64 rng(47);
    const auto p = prepare(random_grid(rng));
    EXPECT_THROW(reduce(p.b, 1.0), SingularityError);
}
