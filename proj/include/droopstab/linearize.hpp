#pragma once

#include "droopstab/grid_model.hpp"

#include <string>

namespace droopstab {

/// Analytic Jacobian of the vector field at `w0`, in the global state order
/// (delta, omega, V, I_D, I_Q).
Matrix jacobian(const GridModel& model, const OperatingPoint& w0);
Matrix jacobian(const GridSpec& spec, const OperatingPoint& w0);

/// Returns the common filter time constant when all T_p and T_q agree to
/// within `rel_tol` (spread relative to the mean). With a relaxed tolerance
/// the mean is returned. Throws AssumptionViolation naming the inverter that
/// deviates most from the mean.
double check_homogeneous_filters(const GridSpec& spec, double rel_tol = 1e-9);

/// Copy of `spec` with every T_p and T_q set to `eps1`.
GridSpec homogenize_filters(GridSpec spec, double eps1);

/// Singularly perturbed block structure of the linearized grid
///
///     dx/dt       = A_xz z
///     eps1 dz/dt  = A_zz z + A_zx x + A_zy y
///     E2 dy/dt    = A_yz z + A_yx x + A_yy y
///
/// with x = delta, z = (omega, V), y = (I_D, I_Q). After to_standard_form
/// the last row reads eps2 dy/dt = D2 (A_yz z + A_yx x + A_yy y).
struct BlockSystem {
    int n = 0;
    int m = 0;
    Matrix a_xz, a_zz, a_zx, a_zy, a_yz, a_yx, a_yy;
    double eps1 = 0.0;
    Vector eps2_list;  // L_k / omega_b
    double eps2 = 0.0;
    Matrix d2;
};

/// Slices a full Jacobian into blocks and scales the z rows by eps1 and the
/// y rows by E2. Throws InternalConsistencyError if the delta rows carry
/// anything besides the identity on omega.
BlockSystem extract_blocks(const Matrix& a, const GridSpec& spec, double rel_tol = 1e-9);

/// Sets eps2 to the geometric mean of eps2_list and fills D2.
BlockSystem to_standard_form(BlockSystem b);

/// Rebuilds the monolithic Jacobian from the blocks (standard form when D2
/// is populated, otherwise through E2).
Matrix assemble(const BlockSystem& b);

}  // namespace droopstab
