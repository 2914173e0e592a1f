#include "droopstab/conditions.hpp"
#include "droopstab/equilibrium.hpp"
#include "droopstab/errors.hpp"
#include "droopstab/ieee13.hpp"
#include "droopstab/matrix_io.hpp"
#include "droopstab/report.hpp"
#include "droopstab/simulator.hpp"
#include "droopstab/spec_io.hpp"

#include "random_grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace droopstab;
using namespace droopstab::testing;

TEST(MatrixIo, RoundTripIsBitExact) {
    std::mt19937_64 rng(81);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(4, 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng) * std::pow(10.0, 20 * u(rng));
    m(0, 0) = 0.1;
    m(1, 1) = -0.0;
    std::stringstream ss;
    write_matrix_csv(ss, m);
    const Matrix back = read_matrix_csv(ss);
    ASSERT_EQ(back.rows(), 4);
    ASSERT_EQ(back.cols(), 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) EXPECT_EQ(back.data()[i], m.data()[i]);
    EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(MatrixIo, MalformedInputRejected) {
    std::istringstream ragged("1,2\n3\n");
    EXPECT_THROW(read_matrix_csv(ragged), ParseError);
    std::istringstream junk("1,abc\n");
    EXPECT_THROW(read_matrix_csv(junk), ParseError);
}

TEST(MatrixIo, EigenvaluesSortedDescending) {
    Eigen::VectorXcd e(3);
    e << std::complex<double>(-2, 0), std::complex<double>(-1, -3), std::complex<double>(-1, 3);
    const auto s = sorted_eigenvalues(e);
    EXPECT_EQ(s(0), std::complex<double>(-1, 3));
    EXPECT_EQ(s(1), std::complex<double>(-1, -3));
    EXPECT_EQ(s(2), std::complex<double>(-2, 0));
    std::ostringstream os;
    write_eigenvalues_csv(os, e);
    EXPECT_EQ(os.str().substr(0, 6), "re,im\n");
}

TEST(SpecIo, RoundTrip) {
    std::mt19937_64 rng(82);
    for (int g = 0; g < 20; ++g) {
        const GridSpec s = random_grid(rng);
        const GridSpec back = parse_spec(spec_to_json(s).dump());
        EXPECT_EQ(spec_to_json(back).dump(), spec_to_json(s).dump());
        EXPECT_EQ(spec_hash(back), spec_hash(s));
    }
}

TEST(SpecIo, StrictKeysAndTypes) {
    Json j = spec_to_json(build_ieee13(0.05, 0.6));
    Json extra = j;
    extra["inverters"][0]["gain"] = 1.0;
    try {
        spec_from_json(extra);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("gain"), std::string::npos);
    }
    Json missing = j;
    missing["lines"][2].erase("R_pu");
    EXPECT_THROW(spec_from_json(missing), ParseError);
    Json wrong = j;
    wrong["bases"]["S_b"] = "big";
    EXPECT_THROW(spec_from_json(wrong), ParseError);
    EXPECT_THROW(parse_spec("{not json"), ParseError);
    Json bad_bus = j;
    bad_bus["lines"][0]["to_bus"] = "999";
    EXPECT_THROW(spec_from_json(bad_bus), StructuralError);
}

TEST(SpecIo, EquilibriumRoundTrip) {
    const GridSpec s = build_ieee13(0.05, 0.6);
    const auto eq = find_equilibrium(s, flat_start(s));
    const Json j = equilibrium_to_json(eq, spec_hash(s));
    const OperatingPoint back = equilibrium_from_json(Json::parse(j.dump()), 10, 10);
    EXPECT_EQ(back.to_vector(), eq.point.to_vector());
    EXPECT_THROW(equilibrium_from_json(j, 9, 10), Error);
}

TEST(Report, JsonFieldsAndNullForNonFinite) {
    const auto r = analyze(build_ieee13(0.05, 0.6));
    const Json j = report_to_json(r);
    EXPECT_EQ(j["seed"], 42);
    EXPECT_TRUE(j["hurwitz_full"]["hurwitz"].get<bool>());
    EXPECT_FALSE(j["verdict_full"].get<bool>());
    EXPECT_TRUE(j.contains("lyapunov_residuals"));

    StabilityReport blank;
    blank.eps1_star = std::numeric_limits<double>::infinity();
    const Json b = report_to_json(blank);
    EXPECT_TRUE(b.dump().find("Infinity") == std::string::npos);
    EXPECT_FALSE(report_table(r).empty());
}
