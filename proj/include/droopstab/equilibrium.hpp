#pragma once

#include "droopstab/grid_model.hpp"

#include <string>
#include <vector>

namespace droopstab {

struct EquilibriumOptions {
    double tol = 1e-10;
    int max_iter = 50;
    int max_halvings = 30;
};

struct EquilibriumResult {
    OperatingPoint point;
    /// Infinity norm of the balance residual: the omega and V rows scaled by
    /// their filter constants and the line rows by L/omega_b, i.e. the
    /// vector field without its time-constant prefactors.
    double residual_norm = 0.0;
    /// Infinity norm of the unscaled vector field at `point`.
    double field_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Reciprocal condition estimate of the last Newton matrix.
    double rcond = 0.0;
    std::vector<double> residual_history;
    std::string message;
};

/// delta = 0, omega = omega_b, V = V_d and the line currents that hold the
/// network in steady state at those voltages.
OperatingPoint flat_start(const GridSpec& spec);

/// Damped Newton on (delta, V, I_D, I_Q) with omega pinned to omega_b.
/// Never throws on non-convergence; inspect `converged` and `message`.
EquilibriumResult find_equilibrium(const GridSpec& spec, const OperatingPoint& guess,
                                   const EquilibriumOptions& opts = {});

/// Balance residual used by find_equilibrium (length 2N + 2M).
Vector balance_residual(const GridModel& model, const OperatingPoint& x);

}  // namespace droopstab
