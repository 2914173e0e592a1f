#include "droopstab/linearize.hpp"

#include "droopstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace droopstab {

Matrix jacobian(const GridModel& model, const OperatingPoint& w0) {
    const GridSpec& spec = model.spec();
    const StateLayout s = model.layout();
    const int n = s.n;
    const int m = s.m;
    const double wb = spec.bases.omega_b;
    const InjectionPartials d = model.injection_partials(w0);
    const Matrix& ct = model.incidence_extended();

    Matrix j = Matrix::Zero(s.size(), s.size());
    for (int i = 0; i < n; ++i) {
        const auto& inv = spec.inverters[static_cast<size_t>(i)];
        const int rd = s.delta() + i;
        const int rw = s.omega() + i;
        const int rv = s.voltage() + i;

        j(rd, rw) = 1.0;

        const double fp = -inv.kp / inv.tp;
        j(rw, rw) = -1.0 / inv.tp;
        j(rw, s.delta() + i) = fp * d.dp_ddelta(i);
        j(rw, s.voltage() + i) = fp * d.dp_dv(i);
        j.block(rw, s.i_d(), 1, m) = fp * d.dp_did.row(i);
        j.block(rw, s.i_q(), 1, m) = fp * d.dp_diq.row(i);

        const double fq = -inv.kq / inv.tq;
        j(rv, s.delta() + i) = fq * d.dq_ddelta(i);
        j(rv, s.voltage() + i) = -1.0 / inv.tq + fq * d.dq_dv(i);
        j.block(rv, s.i_d(), 1, m) = fq * d.dq_did.row(i);
        j.block(rv, s.i_q(), 1, m) = fq * d.dq_diq.row(i);
    }

    for (int k = 0; k < m; ++k) {
        const auto& line = spec.lines[static_cast<size_t>(k)];
        const double g = wb / line.l;
        const int rd = s.i_d() + k;
        const int rq = s.i_q() + k;
        j(rd, s.i_d() + k) = -g * line.r;
        j(rd, s.i_q() + k) = g * line.x;
        j(rq, s.i_q() + k) = -g * line.r;
        j(rq, s.i_d() + k) = -g * line.x;
        for (int b = 0; b < n; ++b) {
            const double c = ct(k, b);
            if (c == 0.0) continue;
            const double cd = std::cos(w0.delta(b));
            const double sd = std::sin(w0.delta(b));
            const double v = w0.voltage(b);
            j(rd, s.delta() + b) = g * c * (-v * sd);
            j(rd, s.voltage() + b) = g * c * cd;
            j(rq, s.delta() + b) = g * c * (v * cd);
            j(rq, s.voltage() + b) = g * c * sd;
        }
    }
    return j;
}

Matrix jacobian(const GridSpec& spec, const OperatingPoint& w0) {
    return jacobian(GridModel(spec), w0);
}

double check_homogeneous_filters(const GridSpec& spec, double rel_tol) {
    if (spec.inverters.empty()) throw StructuralError("grid has no inverters");
    double lo = spec.inverters.front().tp;
    double hi = lo;
    double sum = 0.0;
    for (const auto& inv : spec.inverters) {
        lo = std::min({lo, inv.tp, inv.tq});
        hi = std::max({hi, inv.tp, inv.tq});
        sum += inv.tp + inv.tq;
    }
    const double mean = sum / (2.0 * static_cast<double>(spec.inverters.size()));
    if (hi - lo <= rel_tol * mean) {
        return lo == hi ? lo : mean;
    }

    const InverterSpec* worst = &spec.inverters.front();
    double worst_dev = -1.0;
    for (const auto& inv : spec.inverters) {
        const double dev = std::max(std::abs(inv.tp - mean), std::abs(inv.tq - mean));
        if (dev > worst_dev) {
            worst_dev = dev;
            worst = &inv;
        }
    }
    std::ostringstream msg;
    msg << "filter time constants are not homogeneous (spread " << (hi - lo) / mean
        << " relative, tolerance " << rel_tol << "); inverter at bus '" << worst->bus
        << "' has T_p=" << worst->tp << ", T_q=" << worst->tq << " against mean " << mean;
    throw AssumptionViolation(msg.str());
}

GridSpec homogenize_filters(GridSpec spec, double eps1) {
    for (auto& inv : spec.inverters) {
        inv.tp = eps1;
        inv.tq = eps1;
    }
    return spec;
}

BlockSystem extract_blocks(const Matrix& a, const GridSpec& spec, double rel_tol) {
    const int n = spec.n_inverters();
    const int m = spec.n_lines();
    const StateLayout s{n, m};
    if (a.rows() != s.size() || a.cols() != s.size()) {
        throw StructuralError("Jacobian dimension does not match the grid");
    }

    BlockSystem b;
    b.n = n;
    b.m = m;
    b.eps1 = check_homogeneous_filters(spec, rel_tol);

    const int x0 = s.delta();
    const int z0 = s.omega();
    const int y0 = s.i_d();

    // Slow rows: d(delta)/dt = omega - omega_b, so only an identity on omega.
    const double a_scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double xx = a.block(x0, x0, n, n).cwiseAbs().maxCoeff();
    const double xy = a.block(x0, y0, n, 2 * m).cwiseAbs().maxCoeff();
    if (xx > 1e-12 * a_scale || xy > 1e-12 * a_scale) {
        throw InternalConsistencyError("delta rows of the Jacobian depend on delta or currents");
    }
    b.a_xz = a.block(x0, z0, n, 2 * n);

    b.a_zz = b.eps1 * a.block(z0, z0, 2 * n, 2 * n);
    b.a_zx = b.eps1 * a.block(z0, x0, 2 * n, n);
    b.a_zy = b.eps1 * a.block(z0, y0, 2 * n, 2 * m);

    b.eps2_list.resize(m);
    for (int k = 0; k < m; ++k) {
        b.eps2_list(k) = spec.lines[static_cast<size_t>(k)].l / spec.bases.omega_b;
    }
    Vector e2(2 * m);
    e2 << b.eps2_list, b.eps2_list;
    b.a_yz = e2.asDiagonal() * a.block(y0, z0, 2 * m, 2 * n);
    b.a_yx = e2.asDiagonal() * a.block(y0, x0, 2 * m, n);
    b.a_yy = e2.asDiagonal() * a.block(y0, y0, 2 * m, 2 * m);
    return b;
}

BlockSystem to_standard_form(BlockSystem b) {
    const int m = static_cast<int>(b.eps2_list.size());
    if (m == 0) throw StructuralError("no line time constants");
    double log_sum = 0.0;
    for (int k = 0; k < m; ++k) {
        if (!(b.eps2_list(k) > 0.0)) throw StructuralError("line time constants must be positive");
        log_sum += std::log(b.eps2_list(k));
    }
    b.eps2 = std::exp(log_sum / m);
    Vector diag(2 * m);
    for (int k = 0; k < m; ++k) {
        diag(k) = b.eps2 / b.eps2_list(k);
        diag(k + m) = diag(k);
    }
    b.d2 = diag.asDiagonal();
    return b;
}

Matrix assemble(const BlockSystem& b) {
    const int n = b.n;
    const int m = b.m;
    const StateLayout s{n, m};
    Matrix a = Matrix::Zero(s.size(), s.size());
    a.block(s.delta(), s.omega(), n, 2 * n) = b.a_xz;

    a.block(s.omega(), s.delta(), 2 * n, n) = b.a_zx / b.eps1;
    a.block(s.omega(), s.omega(), 2 * n, 2 * n) = b.a_zz / b.eps1;
    a.block(s.omega(), s.i_d(), 2 * n, 2 * m) = b.a_zy / b.eps1;

    Matrix scale;
    if (b.d2.size() > 0) {
        scale = b.d2 / b.eps2;
    } else {
        Vector e2(2 * m);
        e2 << b.eps2_list, b.eps2_list;
        scale = e2.cwiseInverse().asDiagonal();
    }
    a.block(s.i_d(), s.delta(), 2 * m, n) = scale * b.a_yx;
    a.block(s.i_d(), s.omega(), 2 * m, 2 * n) = scale * b.a_yz;
    a.block(s.i_d(), s.i_d(), 2 * m, 2 * m) = scale * b.a_yy;
    return a;
}

}  // namespace droopstab
