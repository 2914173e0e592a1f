#include "droopstab/timescale.hpp"

#include "droopstab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

namespace droopstab {

Manifold very_fast_manifold(const BlockSystem& b) {
    Eigen::FullPivLU<Matrix> lu(b.a_yy);
    if (!lu.isInvertible()) {
        throw SingularityError("A_yy is singular; some line has R = X = 0");
    }
    return {-lu.solve(b.a_yz), -lu.solve(b.a_yx)};
}

ReducedNetwork reduce_network(const BlockSystem& b, const Manifold& mf) {
    return {b.a_zz + b.a_zy * mf.a0z, b.a_zx + b.a_zy * mf.a0x};
}

SlowSystem slow_matrix(const ReducedNetwork& r, const BlockSystem& b, double max_condition) {
    const int n = b.n;
    Eigen::JacobiSVD<Matrix> svd(r.azz_tilde);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();

    if (!(cond <= max_condition)) {
        // The omega block is -I, so the singular direction lives in E.
        const Matrix e = r.azz_tilde.bottomRightCorner(n, n);
        Eigen::EigenSolver<Matrix> es(e);
        int idx = 0;
        for (int k = 1; k < n; ++k) {
            if (std::abs(es.eigenvalues()(k)) < std::abs(es.eigenvalues()(idx))) idx = k;
        }
        const Eigen::VectorXcd vec = es.eigenvectors().col(idx);
        int bus = 0;
        for (int k = 1; k < n; ++k) {
            if (std::abs(vec(k)) > std::abs(vec(bus))) bus = k;
        }
        std::ostringstream msg;
        msg << "reduced fast matrix is near singular (cond " << cond << " > " << max_condition
            << "): eigenvalue " << es.eigenvalues()(idx).real() << " of E, mode dominated by inverter "
            << bus << " (k_q * nu close to 1)";
        throw SingularityError(msg.str());
    }

    SlowSystem out;
    out.condition = cond;
    out.gamma0 = -r.azz_tilde.partialPivLu().solve(r.azx_tilde);
    out.a_slow = b.a_xz * out.gamma0;
    return out;
}

Matrix e_matrix_extracted(const Matrix& azz_tilde, int n, double tol) {
    if (azz_tilde.rows() != 2 * n || azz_tilde.cols() != 2 * n) {
        throw StructuralError("reduced fast matrix has the wrong size");
    }
    const double scale = std::max(1.0, azz_tilde.lpNorm<Eigen::Infinity>());
    const double tl = (azz_tilde.topLeftCorner(n, n) + Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    const double bl = azz_tilde.bottomLeftCorner(n, n).cwiseAbs().maxCoeff();
    if (tl > tol * scale || bl > tol * scale) {
        std::ostringstream msg;
        msg << "reduced fast matrix lost its block-triangular form (top-left off -I by " << tl
            << ", bottom-left magnitude " << bl << ")";
        throw InternalConsistencyError(msg.str());
    }
    return azz_tilde.bottomRightCorner(n, n);
}

NuTable nu_table(const GridSpec& spec, const OperatingPoint& w0) {
    const GridModel model(spec);
    const int n = spec.n_inverters();
    const InjectionPartials d = model.injection_partials(w0);

    NuTable nu;
    nu.nu_diag = -d.dq_dv;
    nu.nu_offdiag = Matrix::Zero(n, n);
    nu.neighbors.assign(static_cast<size_t>(n), {});

    for (int k = 0; k < spec.n_lines(); ++k) {
        const auto& line = spec.lines[static_cast<size_t>(k)];
        const int a = spec.bus_index(line.from_bus);
        const int b = spec.bus_index(line.to_bus);
        const double z2 = line.r * line.r + line.x * line.x;

        for (const auto& [i, j, theta] : {std::tuple{a, b, -1.0}, std::tuple{b, a, 1.0}}) {
            if (i >= n) continue;
            const double ci = std::cos(w0.delta(i));
            const double si = std::sin(w0.delta(i));
            nu.nu_diag(i) += theta * (d.dq_did(i, k) * (line.r * ci + line.x * si) / z2 -
                                      d.dq_diq(i, k) * (line.x * ci - line.r * si) / z2);
            if (j >= n) continue;
            const double cj = std::cos(w0.delta(j));
            const double sj = std::sin(w0.delta(j));
            nu.nu_offdiag(i, j) += theta * (-d.dq_did(i, k) * (line.r * cj + line.x * sj) / z2 +
                                            d.dq_diq(i, k) * (line.x * cj - line.r * sj) / z2);
            auto& nb = nu.neighbors[static_cast<size_t>(i)];
            if (std::find(nb.begin(), nb.end(), j) == nb.end()) nb.push_back(j);
        }
    }
    return nu;
}

Matrix e_matrix_from_nu(const GridSpec& spec, const NuTable& nu) {
    const int n = spec.n_inverters();
    Matrix e = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double kq = spec.inverters[static_cast<size_t>(i)].kq;
        e(i, i) = kq * nu.nu_diag(i) - 1.0;
        for (int j : nu.neighbors[static_cast<size_t>(i)]) e(i, j) = kq * nu.nu_offdiag(i, j);
    }
    return e;
}

Matrix e_matrix_closed_form(const GridSpec& spec, const OperatingPoint& w0) {
    return e_matrix_from_nu(spec, nu_table(spec, w0));
}

ReducedModel reduce(const BlockSystem& b, double max_condition) {
    if (b.d2.size() == 0) throw StructuralError("block system is not in standard form");
    ReducedModel r;
    const Manifold mf = very_fast_manifold(b);
    r.a0z = mf.a0z;
    r.a0x = mf.a0x;
    const ReducedNetwork rn = reduce_network(b, mf);
    r.azz_tilde = rn.azz_tilde;
    r.azx_tilde = rn.azx_tilde;
    r.e_matrix = e_matrix_extracted(r.azz_tilde, b.n);
    const SlowSystem slow = slow_matrix(rn, b, max_condition);
    r.gamma0 = slow.gamma0;
    r.a_slow = slow.a_slow;
    r.azz_condition = slow.condition;
    r.ayy_tilde = b.d2 * b.a_yy;
    return r;
}

}  // namespace droopstab
