#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace droopstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct LineSpec {
    std::string from_bus;  // beginning of the line
    std::string to_bus;    // end of the line
    double r = 0.0;        // pu
    double x = 0.0;        // pu
    double l = 0.0;        // pu
};

struct LoadSpec {
    std::string bus;
    double r = 0.0;  // pu
    double x = 0.0;  // pu
};

struct InverterSpec {
    std::string bus;
    double kp = 0.0;       // frequency droop, rad/s per pu power
    double kq = 0.0;       // voltage droop, pu/pu
    double tp = 0.0;       // s
    double tq = 0.0;       // s
    double omega_d = 0.0;  // rad/s
    double v_d = 1.0;      // pu
    double p_d = 0.0;      // pu
    double q_d = 0.0;      // pu
};

struct FeederSpec {
    std::string bus = "feeder";
    double v_d = 1.0;  // D component, pu
    double v_q = 0.0;  // Q component, pu
};

struct Bases {
    double v_b = 1.0;      // V
    double s_b = 1.0;      // VA
    double omega_b = 0.0;  // rad/s
    double z_b() const { return v_b * v_b / s_b; }
};

/// Static description of an inverter-based distribution grid. All electrical
/// quantities are per unit on `bases`.
struct GridSpec {
    Bases bases;
    FeederSpec feeder;
    std::vector<InverterSpec> inverters;
    std::vector<LineSpec> lines;
    std::vector<LoadSpec> loads;

    int n_inverters() const { return static_cast<int>(inverters.size()); }
    int n_lines() const { return static_cast<int>(lines.size()); }
    int state_size() const { return 3 * n_inverters() + 2 * n_lines(); }

    /// Index of a bus: 0..N-1 for inverter buses, N for the feeder.
    /// Throws StructuralError for an unknown name.
    int bus_index(const std::string& name) const;
};

/// Throws StructuralError / SingularityError when an invariant of GridSpec
/// is violated.
void validate(const GridSpec& spec);

/// Offsets of the (delta, omega, V, I_D, I_Q) blocks in the flat state.
struct StateLayout {
    int n = 0;
    int m = 0;

    int delta() const { return 0; }
    int omega() const { return n; }
    int voltage() const { return 2 * n; }
    int i_d() const { return 3 * n; }
    int i_q() const { return 3 * n + m; }
    int size() const { return 3 * n + 2 * m; }
};

struct OperatingPoint {
    Vector delta;    // rad
    Vector omega;    // rad/s
    Vector voltage;  // pu
    Vector i_d;      // pu
    Vector i_q;      // pu

    static OperatingPoint zeros(int n, int m);
    static OperatingPoint from_vector(const Vector& w, int n, int m);
    Vector to_vector() const;
    StateLayout layout() const {
        return {static_cast<int>(delta.size()), static_cast<int>(i_d.size())};
    }
};

Matrix build_incidence_inverter(const GridSpec& spec);
Matrix build_incidence_extended(const GridSpec& spec);

struct LoadMatrices {
    Matrix c_ld;  // N x 2N
    Matrix c_lq;  // N x 2N
};
LoadMatrices build_load_matrices(const GridSpec& spec);

struct PowerInjections {
    Vector p;
    Vector q;
};

/// Partial derivatives of P and Q. P_i and Q_i depend on delta_i and V_i of
/// their own bus only, so those partials are stored as vectors.
struct InjectionPartials {
    Vector dp_ddelta, dp_dv, dq_ddelta, dq_dv;
    Matrix dp_did, dp_diq, dq_did, dq_diq;  // N x M
};

/// Network matrices cached for repeated evaluation of the vector field.
class GridModel {
public:
    explicit GridModel(GridSpec spec);

    const GridSpec& spec() const { return spec_; }
    StateLayout layout() const { return {n_, m_}; }
    const Matrix& incidence_inverter() const { return c_i_; }
    const Matrix& incidence_extended() const { return c_t_; }
    const LoadMatrices& loads() const { return loads_; }

    PowerInjections power_injections(const OperatingPoint& x) const;
    InjectionPartials injection_partials(const OperatingPoint& x) const;

    Vector vector_field(const OperatingPoint& x) const;
    Vector vector_field(const Vector& w) const;

private:
    GridSpec spec_;
    int n_ = 0;
    int m_ = 0;
    Matrix c_i_;
    Matrix c_t_;
    LoadMatrices loads_;
    // Per-line and per-inverter parameters as vectors.
    Vector r_, x_, l_;
    Vector kp_, kq_, tp_, tq_, omega_d_, v_d_, p_d_, q_d_;
    // Diagonal of the load admittance: y = g + j(-b), b = X/|Z|^2.
    Vector load_g_, load_b_;
};

PowerInjections power_injections(const GridSpec& spec, const OperatingPoint& x);
Vector vector_field(const GridSpec& spec, const OperatingPoint& x);

}  // namespace droopstab
