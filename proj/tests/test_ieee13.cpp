#include "droopstab/conditions.hpp"
#include "droopstab/ieee13.hpp"
#include "droopstab/spec_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace droopstab;

TEST(Ieee13, Topology) {
    const GridSpec s = build_ieee13(0.05, 0.6);
    EXPECT_EQ(s.n_inverters(), 10);
    EXPECT_EQ(s.feeder.bus, "650");
    EXPECT_NO_THROW(validate(s));
    // Radial: one line per non-feeder bus.
    EXPECT_EQ(s.n_lines(), 10);
    std::set<std::string> buses;
    for (const auto& inv : s.inverters) {
        buses.insert(inv.bus);
        EXPECT_DOUBLE_EQ(inv.kq, 0.05);
        EXPECT_DOUBLE_EQ(inv.kp, 0.6);
        EXPECT_DOUBLE_EQ(inv.tp, inv.tq);
        EXPECT_DOUBLE_EQ(inv.omega_d, s.bases.omega_b);
    }
    EXPECT_EQ(buses.size(), 10u);
    EXPECT_NEAR(s.bases.omega_b, 2.0 * M_PI * 60.0, 1e-12);
    for (const auto& l : s.lines) {
        EXPECT_GT(l.r, 0.0);
        EXPECT_DOUBLE_EQ(l.l, l.x);
    }
}

TEST(Ieee13, LineTimescaleNearPublishedValue) {
    const auto r = analyze(build_ieee13(0.05, 0.6));
    // Published eps3 = 6.8705e-4.
    EXPECT_NEAR(r.eps3, 6.8705e-4, 0.01 * 6.8705e-4);
}

TEST(Ieee13, BundledDatasetMatchesBuilder) {
    const GridSpec file = load_spec(std::string(DROOPSTAB_DATA_DIR) + "/ieee13.json");
    EXPECT_EQ(spec_to_json(file).dump(), spec_to_json(build_ieee13(0.05, 0.6)).dump());
}

TEST(Ieee13, GainSweepExitCodes) {
    EXPECT_EQ(exit_code(analyze(build_ieee13(0.05, 0.6))), 2);
    EXPECT_EQ(exit_code(analyze(build_ieee13(0.01, 0.06))), 2);
    EXPECT_EQ(exit_code(analyze(build_ieee13(0.2, 0.6))), 3);
}
