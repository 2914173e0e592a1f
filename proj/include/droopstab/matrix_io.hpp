#pragma once

#include "droopstab/grid_model.hpp"

#include <iosfwd>
#include <string>

namespace droopstab {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

void write_matrix_csv(std::ostream& os, const Matrix& m);
void write_matrix_csv(const std::string& path, const Matrix& m);
/// Reads a headerless comma-separated matrix. Throws ParseError on ragged
/// rows or malformed numbers.
Matrix read_matrix_csv(std::istream& is);
Matrix read_matrix_csv(const std::string& path);

/// Two columns "re,im", one row per eigenvalue, sorted by descending real
/// part then imaginary part.
void write_eigenvalues_csv(std::ostream& os, const Eigen::VectorXcd& eig);
Eigen::VectorXcd sorted_eigenvalues(const Eigen::VectorXcd& eig);

}  // namespace droopstab
