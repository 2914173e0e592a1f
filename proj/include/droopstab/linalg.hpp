#pragma once

#include "droopstab/grid_model.hpp"

#include <Eigen/Eigenvalues>

namespace droopstab {

inline Matrix sym(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Smallest eigenvalue of the symmetric part of `a`.
double lambda_min_sym(const Matrix& a);

/// Largest singular value; 0 for empty matrices.
double sigma_max(const Matrix& a);

Eigen::VectorXcd eigenvalues(const Matrix& a);

/// Maximum real part over the spectrum. Throws Error if the eigen-solver
/// does not converge.
double spectral_abscissa(const Matrix& a);

bool is_positive_definite(const Matrix& a);

}  // namespace droopstab
