#pragma once

#include "droopstab/grid_model.hpp"
#include "droopstab/linearize.hpp"

#include <vector>

namespace droopstab {

/// Zeroth-order very-fast manifold y0 = A_0z z + A_0x x.
struct Manifold {
    Matrix a0z;  // 2M x 2N
    Matrix a0x;  // 2M x N
};

struct ReducedNetwork {
    Matrix azz_tilde;  // 2N x 2N, ordered (omega, V)
    Matrix azx_tilde;  // 2N x N
};

struct SlowSystem {
    Matrix a_slow;  // N x N
    Matrix gamma0;  // 2N x N, fast manifold z0 = gamma0 x
    double condition = 0.0;  // 2-norm condition number of azz_tilde
};

struct ReducedModel {
    Matrix a0z, a0x;
    Matrix azz_tilde, azx_tilde;
    Matrix gamma0;
    Matrix e_matrix;
    Matrix a_slow;
    Matrix ayy_tilde;  // D2 A_yy
    double azz_condition = 0.0;
};

Manifold very_fast_manifold(const BlockSystem& b);
ReducedNetwork reduce_network(const BlockSystem& b, const Manifold& mf);

/// A^(s) = -A_xz Azz~^-1 Azx~ together with gamma0. Refuses (SingularityError)
/// when cond(Azz~) exceeds `max_condition`; the message names the eigenvalue
/// of E closest to zero and the inverter dominating its eigenvector.
SlowSystem slow_matrix(const ReducedNetwork& r, const BlockSystem& b,
                       double max_condition = 1e12);

/// Lower-right N x N block of Azz~. Throws InternalConsistencyError unless
/// the top-left block is -I and the bottom-left block vanishes.
Matrix e_matrix_extracted(const Matrix& azz_tilde, int n, double tol = 1e-9);

/// Per-inverter sensitivities of reactive power to bus voltage magnitudes
/// once the line currents sit on their quasi-steady state. E = K_Q nu - I
/// on the diagonal and K_Q nu_ij off it.
struct NuTable {
    Vector nu_diag;                       // nu_i
    Matrix nu_offdiag;                    // nu_ij, zero for non-adjacent pairs
    std::vector<std::vector<int>> neighbors;  // inverter-to-inverter adjacency
};

NuTable nu_table(const GridSpec& spec, const OperatingPoint& w0);
Matrix e_matrix_closed_form(const GridSpec& spec, const OperatingPoint& w0);
Matrix e_matrix_from_nu(const GridSpec& spec, const NuTable& nu);

/// Runs the whole reduction chain.
ReducedModel reduce(const BlockSystem& standard_form, double max_condition = 1e12);

}  // namespace droopstab
