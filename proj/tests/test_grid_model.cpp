#include "droopstab/errors.hpp"
#include "droopstab/grid_model.hpp"

#include "oracles.hpp"
#include "random_grid.hpp"

#include <gtest/gtest.h>

using namespace droopstab;
using namespace droopstab::testing;

namespace {

GridSpec two_bus() {
    GridSpec s;
    s.bases = {1.0, 1.0, 100.0};
    s.feeder = {"f", 1.0, 0.0};
    s.inverters.push_back({"a", 0.5, 0.1, 0.01, 0.01, 100.0, 1.0, 0.2, 0.05});
    s.lines.push_back({"a", "f", 0.02, 0.05, 0.05});
    s.loads.push_back({"a", 2.0, 0.5});
    return s;
}

}  // namespace

TEST(GridModel, VectorFieldMatchesLoopOracle) {
    std::mt19937_64 rng(11);
    for (int g = 0; g < 40; ++g) {
        const GridSpec spec = random_grid(rng);
        const GridModel model(spec);
        for (int k = 0; k < 5; ++k) {
            const Vector w = random_state(spec, rng);
            const Vector f = model.vector_field(w);
            const Vector ref = scalar_vector_field(spec, w);
            ASSERT_EQ(f.size(), spec.state_size());
            EXPECT_LE((f - ref).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
        }
    }
}

TEST(GridModel, PowerInjectionsMatchComplexPhasors) {
    std::mt19937_64 rng(12);
    for (int g = 0; g < 40; ++g) {
        const GridSpec spec = random_grid(rng);
        const Vector w = random_state(spec, rng);
        Vector p, q;
        phasor_injections(spec, w, p, q);
        const auto pq = power_injections(
            spec, OperatingPoint::from_vector(w, spec.n_inverters(), spec.n_lines()));
        EXPECT_LE((pq.p - p).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((pq.q - q).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(GridModel, IncidenceShapeAndSigns) {
    GridSpec s = two_bus();
    const Matrix c = build_incidence_extended(s);
    ASSERT_EQ(c.rows(), 1);
    ASSERT_EQ(c.cols(), 2);
    EXPECT_EQ(c(0, 0), 1.0);
    EXPECT_EQ(c(0, 1), -1.0);
    const Matrix ci = build_incidence_inverter(s);
    ASSERT_EQ(ci.rows(), 1);
    EXPECT_EQ(ci(0, 0), 1.0);
}

TEST(GridModel, StateRoundTrip) {
    Vector w = Vector::LinSpaced(5, 1.0, 5.0);
    const auto op = OperatingPoint::from_vector(w, 1, 1);
    EXPECT_EQ(op.voltage(0), 3.0);
    EXPECT_EQ(op.i_q(0), 5.0);
    EXPECT_EQ(op.to_vector(), w);
}

TEST(GridModel, SingleLineSteadyState) {
    // With delta = 0 and V = 1 at both ends there is no current, so the line
    // rows vanish and P is the load draw at V = 1.
    const GridSpec s = two_bus();
    OperatingPoint x = OperatingPoint::zeros(1, 1);
    x.omega(0) = 100.0;
    x.voltage(0) = 1.0;
    const auto pq = power_injections(s, x);
    EXPECT_NEAR(pq.p(0), 2.0 / (4.0 + 0.25), 1e-14);
    EXPECT_NEAR(pq.q(0), 0.5 / (4.0 + 0.25), 1e-14);
    const Vector f = vector_field(s, x);
    EXPECT_NEAR(f(3), 0.0, 1e-14);
    EXPECT_NEAR(f(4), 0.0, 1e-14);
}

TEST(GridModel, ValidationRejectsBadSpecs) {
    GridSpec s = two_bus();
    s.lines[0].to_bus = "nowhere";
    EXPECT_THROW(validate(s), StructuralError);

    s = two_bus();
    s.loads[0].r = 0.0;
    s.loads[0].x = 0.0;
    EXPECT_THROW(validate(s), SingularityError);

    s = two_bus();
    s.inverters.push_back(s.inverters[0]);
    s.inverters[1].bus = "b";  // no line reaches bus b
    EXPECT_THROW(validate(s), StructuralError);

    s = two_bus();
    s.lines[0].l = -1.0;
    EXPECT_THROW(validate(s), Error);

    EXPECT_NO_THROW(validate(two_bus()));
}
