#pragma once

#include "droopstab/certificates.hpp"
#include "droopstab/equilibrium.hpp"
#include "droopstab/grid_model.hpp"
#include "droopstab/linearize.hpp"
#include "droopstab/timescale.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace droopstab {

struct HurwitzResult {
    bool stable = false;
    bool marginal = false;  // |abscissa| <= tol
    double abscissa = 0.0;
};

HurwitzResult hurwitz(const Matrix& a, double tol = 1e-9);

struct GainBound {
    enum class Kind { UnboundedPositive, UpperBounded };
    Kind kind = Kind::UnboundedPositive;
    std::optional<double> upper;  // k_q must stay strictly below this
};

/// Decentralized voltage-droop bounds from diagonal dominance of E. Throws
/// AssumptionViolation naming the first inverter with nu_i >= 0.
std::vector<GainBound> lemma3_gain_bounds(const NuTable& nu);

struct AnalysisOptions {
    double filter_rel_tol = 1e-9;
    double hurwitz_tol = 1e-9;
    double max_condition = 1e12;
    EquilibriumOptions equilibrium;
    std::optional<OperatingPoint> initial_guess;  // flat start when empty
    CertificateOptions certificates;
    std::uint64_t seed = 42;
};

struct StabilityReport {
    HurwitzResult hurwitz_e;
    HurwitzResult hurwitz_slow;
    HurwitzResult hurwitz_full;
    bool lemma3_applicable = false;
    std::vector<GainBound> lemma3_bounds;
    bool lemma3_satisfied = false;  // every k_q inside its bound
    double eps1 = 0.0, eps1_star = 0.0, eps3 = 0.0, eps3_star = 0.0;
    double eps1_used = 0.0;
    double eps3_star_at_eps1 = 0.0;
    bool verdict_reduced = false;
    bool verdict_full = false;
    bool conditions_conservative = false;
    std::vector<std::string> warnings;

    // Diagnostics carried into the serialized report.
    EquilibriumResult equilibrium;
    CertificateSet certificates;
    NuTable nu;
    double e_closed_form_gap = 0.0;  // max |E_closed - E_extracted|
    Eigen::VectorXcd eig_e, eig_slow, eig_full;
    std::uint64_t seed = 42;
};

/// Everything computed on the way to the report.
struct Analysis {
    GridSpec spec;  // after filter homogenization
    StabilityReport report;
    Matrix jacobian;
    BlockSystem blocks;
    ReducedModel reduced;
};

/// Full pipeline: equilibrium, Jacobian, blocks, reduction, certificates,
/// conditions, plus the direct eigenvalue check of the full Jacobian.
/// Failures are rethrown as StageError labelled with the stage.
Analysis analyze_detailed(const GridSpec& spec, const AnalysisOptions& opts = {});
StabilityReport analyze(const GridSpec& spec, const AnalysisOptions& opts = {});

/// 0 = certified, 2 = sufficient conditions fail but A is Hurwitz,
/// 3 = A is not Hurwitz.
int exit_code(const StabilityReport& r);

}  // namespace droopstab
