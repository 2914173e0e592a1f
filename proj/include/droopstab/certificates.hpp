#pragma once

#include "droopstab/linearize.hpp"
#include "droopstab/timescale.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace droopstab {

struct LyapunovSolution {
    Matrix p;
    /// ||A^T P + P A + Q||_F / ||Q||_F
    double residual = 0.0;
    bool positive_definite = false;
    std::string warning;  // set when residual exceeds 1e-8
};

/// Solves A^T P + P A = -Q through the Kronecker-vectorized linear system.
/// Throws CertificateInfeasible when A is not Hurwitz and
/// AssumptionViolation when Q is not symmetric positive definite.
LyapunovSolution solve_lyapunov(const Matrix& a, const Matrix& q);

struct SlowConstants {
    double alpha1 = 0.0;
    double beta1 = 0.0;
};

/// alpha1 = lambda_min(Q_s) with Q_s = -(A_s^T P + P A_s);
/// beta1 = sigma_max((P + P^T) A_xz).
SlowConstants slow_constants(const Matrix& a_slow, const Matrix& a_xz, const Matrix& p_slow);

struct FastConstants {
    double alpha2 = 0.0;
    double gamma1 = 0.0;      // clamped at zero
    double gamma1_raw = 0.0;  // -lambda_min(sym(Z))
    double beta2 = 0.0;
    Matrix z;      // (H + H^T) Gamma0 A_xz
    Matrix theta;  // Z Gamma0
};

FastConstants fast_constants(const Matrix& azz_tilde, const Matrix& gamma0, const Matrix& a_xz,
                             const Matrix& h_fast);

struct ReducedBound {
    double d1 = 0.5;
    double eps1_star = 0.0;
    /// Largest eps1 for which Q_v(d) is positive definite, as a function of
    /// the weight d in (0, 1).
    std::function<double(double)> eps1_d;
};

ReducedBound theorem1_bound(double alpha1, double alpha2, double gamma1, double beta1,
                            double beta2);

/// 2x2 matrix Q_v bounding the derivative of the composite reduced-order
/// Lyapunov function: dv/dt <= -rho^T Q_v rho, rho = (|x|, |eta|).
Matrix reduced_qv(const SlowConstants& s, const FastConstants& f, double d1, double eps1);

struct CompositeConstants {
    double alpha3 = 0.0;
    double beta3 = 0.0;
};

/// alpha3 = eps1 lambda_min(Q_v), beta3 = sigma_max((Hb + Hb^T) A_zy) with
/// Hb = d1 H. Throws CertificateInfeasible when Q_v is not positive definite.
CompositeConstants composite_reduced_constants(const Matrix& q_v, const Matrix& h_fast,
                                               const Matrix& a_zy, double d1, double eps1);

struct VeryFastConstants {
    double alpha4 = 0.0;
    double beta4 = 0.0;
    double gamma2 = 0.0;
    double gamma2_raw = 0.0;
    Matrix theta_xix, theta_xieta, theta_xixi;
};

VeryFastConstants veryfast_constants(const BlockSystem& b, const ReducedModel& r,
                                     const Matrix& p_xi, double eps1);

struct FullBound {
    double d2 = 0.5;
    double eps3_star = 0.0;
    double eps3_actual = 0.0;
    bool verdict = false;
};

FullBound theorem2_bound(double alpha3, double alpha4, double gamma2, double beta3, double beta4,
                         double eps2, double eps1);

enum class Eps1Policy { Actual, HalfStar };

struct CertificateOptions {
    // Empty matrices mean identity.
    Matrix q_slow;
    Matrix q_fast;  // Lambda
    Matrix q_xi;
    Eps1Policy eps1_policy = Eps1Policy::HalfStar;
};

/// Every Lyapunov matrix and scalar behind the reduced-order and full-order
/// certificates. Scalars that could not be computed are NaN and the reason
/// is in `notes`.
struct CertificateSet {
    Matrix p_slow, h_fast, p_xi;
    Matrix q_slow, lambda, q_v, q_xi;
    double residual_slow = 0.0, residual_fast = 0.0, residual_xi = 0.0;

    static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    double alpha1 = kNaN, alpha2 = kNaN, alpha3 = kNaN, alpha4 = kNaN;
    double beta1 = kNaN, beta2 = kNaN, beta3 = kNaN, beta4 = kNaN;
    double gamma1 = kNaN, gamma2 = kNaN, gamma1_raw = kNaN, gamma2_raw = kNaN;
    double d1 = kNaN, d2 = kNaN;
    double eps1_star = kNaN, eps3_star = kNaN;

    double eps1 = 0.0;       // actual filter constant
    double eps1_used = 0.0;  // value fed into the full-order constants
    double eps2 = 0.0;
    double eps3 = 0.0;       // eps2 / eps1
    /// eps3 bound recomputed at the actual eps1 (what the full verdict uses).
    double eps3_star_at_eps1 = kNaN;

    bool slow_certified = false;  // P found
    bool fast_certified = false;  // H found
    bool verdict_reduced = false;
    bool verdict_full = false;
    Eps1Policy eps1_policy = Eps1Policy::HalfStar;
    std::vector<std::string> notes;
};

CertificateSet build_certificates(const BlockSystem& b, const ReducedModel& r,
                                  const CertificateOptions& opts = {});

const char* to_string(Eps1Policy p);

}  // namespace droopstab
