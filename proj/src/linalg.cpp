#include "droopstab/linalg.hpp"

#include "droopstab/errors.hpp"

#include <Eigen/SVD>

#include <sstream>

namespace droopstab {

double lambda_min_sym(const Matrix& a) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym(a), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("symmetric eigen-solver failed");
    return es.eigenvalues()(0);
}

double sigma_max(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

Eigen::VectorXcd eigenvalues(const Matrix& a) {
    if (a.rows() != a.cols()) throw StructuralError("eigenvalues of a non-square matrix");
    if (a.size() == 0) return {};
    Eigen::EigenSolver<Matrix> es(a, false);
    if (es.info() != Eigen::Success) {
        Eigen::JacobiSVD<Matrix> svd(a);
        const auto& sv = svd.singularValues();
        std::ostringstream msg;
        msg << "eigen-solver did not converge on a " << a.rows() << "x" << a.cols()
            << " matrix (condition " << sv(0) / sv(sv.size() - 1) << ")";
        throw Error(msg.str());
    }
    return es.eigenvalues();
}

double spectral_abscissa(const Matrix& a) {
    return eigenvalues(a).real().maxCoeff();
}

bool is_positive_definite(const Matrix& a) {
    if (a.rows() != a.cols() || a.size() == 0) return false;
    Eigen::LLT<Matrix> llt(sym(a));
    return llt.info() == Eigen::Success && lambda_min_sym(a) > 0.0;
}

}  // namespace droopstab
