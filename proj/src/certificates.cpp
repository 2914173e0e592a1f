#include "droopstab/certificates.hpp"

#include "droopstab/errors.hpp"
#include "droopstab/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace droopstab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix or_identity(const Matrix& q, Eigen::Index n) {
    if (q.size() == 0) return Matrix::Identity(n, n);
    if (q.rows() != n || q.cols() != n) {
        std::ostringstream msg;
        msg << "weight matrix is " << q.rows() << "x" << q.cols() << ", expected " << n << "x" << n;
        throw StructuralError(msg.str());
    }
    return q;
}

}  // namespace

const char* to_string(Eps1Policy p) {
    return p == Eps1Policy::Actual ? "actual" : "half-star";
}

LyapunovSolution solve_lyapunov(const Matrix& a, const Matrix& q) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || q.rows() != n || q.cols() != n) {
        throw StructuralError("Lyapunov equation with mismatched dimensions");
    }
    const double qscale = std::max(1.0, q.cwiseAbs().maxCoeff());
    if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * qscale || !is_positive_definite(q)) {
        throw AssumptionViolation("Lyapunov weight Q must be symmetric positive definite");
    }
    const double abscissa = spectral_abscissa(a);
    if (!(abscissa < 0.0)) {
        std::ostringstream msg;
        msg << "matrix is not Hurwitz (spectral abscissa " << abscissa << ")";
        throw CertificateInfeasible(msg.str());
    }

    // vec(A^T P + P A) = (I kron A^T + A^T kron I) vec(P), column-major vec.
    const Matrix at = a.transpose();
    const Matrix id = Matrix::Identity(n, n);
    Matrix k = Matrix::Zero(n * n, n * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            k.block(j * n, i * n, n, n) += id(j, i) * at + at(j, i) * id;
        }
    }
    const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
    const Vector vp = k.partialPivLu().solve(rhs);

    LyapunovSolution sol;
    sol.p = sym(Eigen::Map<const Matrix>(vp.data(), n, n));
    sol.residual = (at * sol.p + sol.p * a + q).norm() / q.norm();
    sol.positive_definite = is_positive_definite(sol.p);
    if (sol.residual > 1e-8) {
        std::ostringstream msg;
        msg << "Lyapunov solve is ill-conditioned: relative residual " << sol.residual;
        sol.warning = msg.str();
    }
    return sol;
}

SlowConstants slow_constants(const Matrix& a_slow, const Matrix& a_xz, const Matrix& p_slow) {
    const Matrix q = -(a_slow.transpose() * p_slow + p_slow * a_slow);
    return {lambda_min_sym(q), sigma_max((p_slow + p_slow.transpose()) * a_xz)};
}

FastConstants fast_constants(const Matrix& azz_tilde, const Matrix& gamma0, const Matrix& a_xz,
                             const Matrix& h_fast) {
    FastConstants f;
    const Matrix lambda = -(azz_tilde.transpose() * h_fast + h_fast * azz_tilde);
    f.alpha2 = lambda_min_sym(lambda);
    f.z = h_fast * gamma0 * a_xz + h_fast.transpose() * gamma0 * a_xz;
    f.theta = f.z * gamma0;
    f.gamma1_raw = -lambda_min_sym(f.z);
    f.gamma1 = std::max(0.0, f.gamma1_raw);
    f.beta2 = sigma_max(f.theta);
    return f;
}

ReducedBound theorem1_bound(double alpha1, double alpha2, double gamma1, double beta1,
                            double beta2) {
    ReducedBound out;
    const double bsum = beta1 + beta2;
    if (bsum > 0.0) {
        out.d1 = beta1 / bsum;
        out.eps1_star = alpha1 * alpha2 / (alpha1 * gamma1 + beta1 * beta2);
    } else {
        out.d1 = 0.5;
        out.eps1_star = gamma1 > 0.0 ? alpha2 / gamma1 : kInf;
    }
    out.eps1_d = [=](double d) {
        const double mix = (1.0 - d) * beta1 + d * beta2;
        return alpha1 * alpha2 / (alpha1 * gamma1 + mix * mix / (4.0 * d * (1.0 - d)));
    };
    return out;
}

Matrix reduced_qv(const SlowConstants& s, const FastConstants& f, double d1, double eps1) {
    const double off = -0.5 * (1.0 - d1) * s.beta1 - 0.5 * d1 * f.beta2;
    Matrix qv(2, 2);
    qv << (1.0 - d1) * s.alpha1, off, off, d1 * (f.alpha2 / eps1 - f.gamma1);
    return qv;
}

CompositeConstants composite_reduced_constants(const Matrix& q_v, const Matrix& h_fast,
                                               const Matrix& a_zy, double d1, double eps1) {
    const double lmin = lambda_min_sym(q_v);
    if (!(lmin > 0.0)) {
        std::ostringstream msg;
        msg << "Q_v is not positive definite (lambda_min " << lmin
            << "); eps1 is not below the reduced-order bound";
        throw CertificateInfeasible(msg.str());
    }
    const Matrix hb = d1 * h_fast;
    return {eps1 * lmin, sigma_max((hb + hb.transpose()) * a_zy)};
}

VeryFastConstants veryfast_constants(const BlockSystem& b, const ReducedModel& r,
                                     const Matrix& p_xi, double eps1) {
    VeryFastConstants v;
    const Matrix q_xi = -(r.ayy_tilde.transpose() * p_xi + p_xi * r.ayy_tilde);
    v.alpha4 = lambda_min_sym(q_xi);

    const Matrix ps = p_xi + p_xi.transpose();
    const Matrix& g0 = r.gamma0;
    const Matrix m1 = r.a0x + r.a0z * g0;

    v.theta_xix = ps * (m1 * b.a_xz * eps1 * g0 +
                        r.a0z * (b.a_zz * g0 + b.a_zx - g0 * b.a_xz * eps1 * g0) +
                        r.a0z * b.a_zy * m1);
    v.theta_xieta =
        ps * (m1 * b.a_xz * eps1 + r.a0z * (b.a_zz - g0 * b.a_xz * eps1 + b.a_zy * r.a0z));
    v.theta_xixi = ps * r.a0z * b.a_zy;

    v.beta4 = std::sqrt(2.0) * std::max(sigma_max(v.theta_xix), sigma_max(v.theta_xieta));
    v.gamma2_raw = -lambda_min_sym(v.theta_xixi);
    v.gamma2 = std::max(0.0, v.gamma2_raw);
    return v;
}

FullBound theorem2_bound(double alpha3, double alpha4, double gamma2, double beta3, double beta4,
                         double eps2, double eps1) {
    FullBound out;
    const double bsum = beta3 + beta4;
    if (!(alpha3 * alpha4 > 0.0)) {
        out.d2 = bsum > 0.0 ? beta3 / bsum : 0.5;
        out.eps3_star = 0.0;
    } else if (bsum > 0.0) {
        out.d2 = beta3 / bsum;
        out.eps3_star = alpha3 * alpha4 / (alpha3 * gamma2 + beta3 * beta4);
    } else {
        out.d2 = 0.5;
        out.eps3_star = gamma2 > 0.0 ? alpha4 / gamma2 : kInf;
    }
    out.eps3_actual = eps2 / eps1;
    out.verdict = out.eps3_actual < out.eps3_star;
    return out;
}

CertificateSet build_certificates(const BlockSystem& b, const ReducedModel& r,
                                  const CertificateOptions& opts) {
    CertificateSet c;
    c.eps1 = b.eps1;
    c.eps2 = b.eps2;
    c.eps3 = b.eps2 / b.eps1;
    c.eps1_policy = opts.eps1_policy;
    c.q_slow = or_identity(opts.q_slow, b.n);
    c.lambda = or_identity(opts.q_fast, 2 * b.n);
    c.q_xi = or_identity(opts.q_xi, 2 * b.m);

    SlowConstants sc;
    FastConstants fc;
    try {
        const LyapunovSolution s = solve_lyapunov(r.a_slow, c.q_slow);
        c.p_slow = s.p;
        c.residual_slow = s.residual;
        if (!s.warning.empty()) c.notes.push_back("slow: " + s.warning);
        sc = slow_constants(r.a_slow, b.a_xz, c.p_slow);
        c.alpha1 = sc.alpha1;
        c.beta1 = sc.beta1;
        c.slow_certified = s.positive_definite;
    } catch (const CertificateInfeasible& e) {
        c.notes.push_back(std::string("slow subsystem: ") + e.what());
    }
    try {
        const LyapunovSolution h = solve_lyapunov(r.azz_tilde, c.lambda);
        c.h_fast = h.p;
        c.residual_fast = h.residual;
        if (!h.warning.empty()) c.notes.push_back("fast: " + h.warning);
        fc = fast_constants(r.azz_tilde, r.gamma0, b.a_xz, c.h_fast);
        c.alpha2 = fc.alpha2;
        c.gamma1 = fc.gamma1;
        c.gamma1_raw = fc.gamma1_raw;
        c.beta2 = fc.beta2;
        c.fast_certified = h.positive_definite;
    } catch (const CertificateInfeasible& e) {
        c.notes.push_back(std::string("fast subsystem: ") + e.what());
    }
    // The line dynamics D2 A_yy are always Hurwitz.
    const LyapunovSolution xi = solve_lyapunov(r.ayy_tilde, c.q_xi);
    c.p_xi = xi.p;
    c.residual_xi = xi.residual;
    if (!xi.warning.empty()) c.notes.push_back("very fast: " + xi.warning);

    if (!(c.slow_certified && c.fast_certified)) return c;

    const ReducedBound t1 = theorem1_bound(sc.alpha1, fc.alpha2, fc.gamma1, sc.beta1, fc.beta2);
    c.d1 = t1.d1;
    c.eps1_star = t1.eps1_star;
    c.verdict_reduced = c.eps1 < c.eps1_star;

    c.eps1_used = c.eps1;
    if (opts.eps1_policy == Eps1Policy::HalfStar) {
        if (std::isfinite(c.eps1_star)) {
            c.eps1_used = 0.5 * c.eps1_star;
        } else {
            c.notes.push_back("eps1* is unbounded; full-order constants use the actual eps1");
        }
    }

    auto full_order = [&](double eps1, Matrix* qv_out, VeryFastConstants* vf_out,
                          CompositeConstants* cc_out) -> FullBound {
        const Matrix qv = reduced_qv(sc, fc, c.d1, eps1);
        if (qv_out) *qv_out = qv;
        const CompositeConstants cc =
            composite_reduced_constants(qv, c.h_fast, b.a_zy, c.d1, eps1);
        const VeryFastConstants vf = veryfast_constants(b, r, c.p_xi, eps1);
        if (vf_out) *vf_out = vf;
        if (cc_out) *cc_out = cc;
        return theorem2_bound(cc.alpha3, vf.alpha4, vf.gamma2, cc.beta3, vf.beta4, c.eps2, c.eps1);
    };

    try {
        VeryFastConstants vf;
        CompositeConstants cc;
        const FullBound fb = full_order(c.eps1_used, &c.q_v, &vf, &cc);
        c.alpha3 = cc.alpha3;
        c.beta3 = cc.beta3;
        c.alpha4 = vf.alpha4;
        c.beta4 = vf.beta4;
        c.gamma2 = vf.gamma2;
        c.gamma2_raw = vf.gamma2_raw;
        c.d2 = fb.d2;
        c.eps3_star = fb.eps3_star;
    } catch (const CertificateInfeasible& e) {
        c.notes.push_back(std::string("full-order constants at eps1=") +
                          std::to_string(c.eps1_used) + ": " + e.what());
    }

    // The full-order verdict must hold for the actual filter constant.
    if (c.verdict_reduced) {
        if (c.eps1_used == c.eps1) {
            c.eps3_star_at_eps1 = c.eps3_star;
        } else {
            try {
                c.eps3_star_at_eps1 = full_order(c.eps1, nullptr, nullptr, nullptr).eps3_star;
            } catch (const CertificateInfeasible& e) {
                c.notes.push_back(std::string("full-order constants at the actual eps1: ") +
                                  e.what());
            }
        }
        c.verdict_full = c.eps3 < c.eps3_star_at_eps1;
    }
    return c;
}

}  // namespace droopstab
