#include "droopstab/grid_model.hpp"

#include "droopstab/errors.hpp"

#include <cmath>
#include <queue>
#include <sstream>

namespace droopstab {

int GridSpec::bus_index(const std::string& name) const {
    for (int i = 0; i < n_inverters(); ++i) {
        if (inverters[static_cast<size_t>(i)].bus == name) return i;
    }
    if (name == feeder.bus) return n_inverters();
    throw StructuralError("unknown bus '" + name + "'");
}

void validate(const GridSpec& spec) {
    const int n = spec.n_inverters();
    const int m = spec.n_lines();
    if (n < 1) throw StructuralError("grid needs at least one inverter");
    if (m < 1) throw StructuralError("grid needs at least one line");
    if (!(spec.bases.omega_b > 0.0) || !(spec.bases.v_b > 0.0) || !(spec.bases.s_b > 0.0)) {
        throw StructuralError("bases must be strictly positive");
    }

    for (int i = 0; i < n; ++i) {
        const auto& inv = spec.inverters[static_cast<size_t>(i)];
        if (inv.bus == spec.feeder.bus) {
            throw StructuralError("inverter bus '" + inv.bus + "' coincides with the feeder bus");
        }
        for (int j = 0; j < i; ++j) {
            if (spec.inverters[static_cast<size_t>(j)].bus == inv.bus) {
                throw StructuralError("duplicate inverter bus '" + inv.bus + "'");
            }
        }
        if (!(inv.tp > 0.0) || !(inv.tq > 0.0)) {
            throw StructuralError("inverter at bus '" + inv.bus +
                                  "': filter time constants must be strictly positive");
        }
    }

    // Union of the line graph over inverter buses plus the feeder.
    std::vector<std::vector<int>> adj(static_cast<size_t>(n + 1));
    for (int k = 0; k < m; ++k) {
        const auto& line = spec.lines[static_cast<size_t>(k)];
        const int a = spec.bus_index(line.from_bus);
        const int b = spec.bus_index(line.to_bus);
        if (a == b) throw StructuralError("line " + std::to_string(k) + " is a self loop");
        if (!(line.r > 0.0) || !(line.x > 0.0) || !(line.l > 0.0)) {
            throw StructuralError("line " + std::to_string(k) +
                                  ": R, X and L must be strictly positive");
        }
        adj[static_cast<size_t>(a)].push_back(b);
        adj[static_cast<size_t>(b)].push_back(a);
    }
    std::vector<bool> seen(static_cast<size_t>(n + 1), false);
    std::queue<int> frontier;
    frontier.push(n);
    seen[static_cast<size_t>(n)] = true;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : adj[static_cast<size_t>(u)]) {
            if (!seen[static_cast<size_t>(v)]) {
                seen[static_cast<size_t>(v)] = true;
                frontier.push(v);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        if (!seen[static_cast<size_t>(i)]) {
            throw StructuralError("inverter bus '" + spec.inverters[static_cast<size_t>(i)].bus +
                                  "' is not connected to the feeder");
        }
    }

    for (const auto& load : spec.loads) {
        const int b = spec.bus_index(load.bus);
        if (b == n) throw StructuralError("loads may only sit on inverter buses");
        if (load.r < 0.0) throw StructuralError("load at bus '" + load.bus + "' has R < 0");
        if (load.r * load.r + load.x * load.x == 0.0) {
            throw SingularityError("load at bus '" + load.bus + "' has zero impedance");
        }
    }
}

OperatingPoint OperatingPoint::zeros(int n, int m) {
    return {Vector::Zero(n), Vector::Zero(n), Vector::Zero(n), Vector::Zero(m), Vector::Zero(m)};
}

OperatingPoint OperatingPoint::from_vector(const Vector& w, int n, int m) {
    const StateLayout s{n, m};
    if (w.size() != s.size()) {
        throw StructuralError("state has length " + std::to_string(w.size()) + ", expected " +
                              std::to_string(s.size()));
    }
    return {w.segment(s.delta(), n), w.segment(s.omega(), n), w.segment(s.voltage(), n),
            w.segment(s.i_d(), m), w.segment(s.i_q(), m)};
}

Vector OperatingPoint::to_vector() const {
    const StateLayout s = layout();
    Vector w(s.size());
    w << delta, omega, voltage, i_d, i_q;
    return w;
}

Matrix build_incidence_inverter(const GridSpec& spec) {
    const int n = spec.n_inverters();
    Matrix c = Matrix::Zero(n, spec.n_lines());
    for (int k = 0; k < spec.n_lines(); ++k) {
        const auto& line = spec.lines[static_cast<size_t>(k)];
        const int a = spec.bus_index(line.from_bus);
        const int b = spec.bus_index(line.to_bus);
        if (a < n) c(a, k) = 1.0;
        if (b < n) c(b, k) = -1.0;
    }
    return c;
}

Matrix build_incidence_extended(const GridSpec& spec) {
    const int n = spec.n_inverters();
    Matrix c = Matrix::Zero(spec.n_lines(), n + 1);
    for (int k = 0; k < spec.n_lines(); ++k) {
        const auto& line = spec.lines[static_cast<size_t>(k)];
        c(k, spec.bus_index(line.from_bus)) = 1.0;
        c(k, spec.bus_index(line.to_bus)) = -1.0;
    }
    return c;
}

LoadMatrices build_load_matrices(const GridSpec& spec) {
    const int n = spec.n_inverters();
    LoadMatrices out{Matrix::Zero(n, 2 * n), Matrix::Zero(n, 2 * n)};
    for (const auto& load : spec.loads) {
        const int i = spec.bus_index(load.bus);
        if (i >= n) throw StructuralError("loads may only sit on inverter buses");
        const double mag2 = load.r * load.r + load.x * load.x;
        if (mag2 == 0.0) {
            throw SingularityError("load at bus '" + load.bus + "' has zero impedance");
        }
        // Parallel loads on one bus add admittances.
        out.c_ld(i, i) += load.r / mag2;
        out.c_ld(i, i + n) += load.x / mag2;
        out.c_lq(i, i) += -load.x / mag2;
        out.c_lq(i, i + n) += load.r / mag2;
    }
    return out;
}

GridModel::GridModel(GridSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    n_ = spec_.n_inverters();
    m_ = spec_.n_lines();
    c_i_ = build_incidence_inverter(spec_);
    c_t_ = build_incidence_extended(spec_);
    loads_ = build_load_matrices(spec_);

    r_.resize(m_);
    x_.resize(m_);
    l_.resize(m_);
    for (int k = 0; k < m_; ++k) {
        const auto& line = spec_.lines[static_cast<size_t>(k)];
        r_(k) = line.r;
        x_(k) = line.x;
        l_(k) = line.l;
    }
    kp_.resize(n_);
    kq_.resize(n_);
    tp_.resize(n_);
    tq_.resize(n_);
    omega_d_.resize(n_);
    v_d_.resize(n_);
    p_d_.resize(n_);
    q_d_.resize(n_);
    for (int i = 0; i < n_; ++i) {
        const auto& inv = spec_.inverters[static_cast<size_t>(i)];
        kp_(i) = inv.kp;
        kq_(i) = inv.kq;
        tp_(i) = inv.tp;
        tq_(i) = inv.tq;
        omega_d_(i) = inv.omega_d;
        v_d_(i) = inv.v_d;
        p_d_(i) = inv.p_d;
        q_d_(i) = inv.q_d;
    }
    load_g_.resize(n_);
    load_b_.resize(n_);
    for (int i = 0; i < n_; ++i) {
        load_g_(i) = loads_.c_ld(i, i);
        load_b_(i) = loads_.c_ld(i, i + n_);
    }
}

PowerInjections GridModel::power_injections(const OperatingPoint& x) const {
    const Vector c = x.delta.array().cos();
    const Vector s = x.delta.array().sin();
    Vector v_dq(2 * n_);
    v_dq << c.cwiseProduct(x.voltage), s.cwiseProduct(x.voltage);

    const Vector out_d = c_i_ * x.i_d + loads_.c_ld * v_dq;
    const Vector out_q = c_i_ * x.i_q + loads_.c_lq * v_dq;

    PowerInjections pq;
    pq.p = (c.cwiseProduct(x.voltage)).cwiseProduct(out_d) +
           (s.cwiseProduct(x.voltage)).cwiseProduct(out_q);
    pq.q = (s.cwiseProduct(x.voltage)).cwiseProduct(out_d) -
           (c.cwiseProduct(x.voltage)).cwiseProduct(out_q);
    return pq;
}

InjectionPartials GridModel::injection_partials(const OperatingPoint& x) const {
    InjectionPartials d;
    d.dp_ddelta.resize(n_);
    d.dp_dv.resize(n_);
    d.dq_ddelta.resize(n_);
    d.dq_dv.resize(n_);
    d.dp_did.resize(n_, m_);
    d.dp_diq.resize(n_, m_);
    d.dq_did.resize(n_, m_);
    d.dq_diq.resize(n_, m_);

    const Vector line_d = c_i_ * x.i_d;
    const Vector line_q = c_i_ * x.i_q;
    for (int i = 0; i < n_; ++i) {
        const double c = std::cos(x.delta(i));
        const double s = std::sin(x.delta(i));
        const double vd = x.voltage(i) * c;
        const double vq = x.voltage(i) * s;
        const double g = load_g_(i);
        const double b = load_b_(i);
        const double id = line_d(i) + g * vd + b * vq;
        const double iq = line_q(i) - b * vd + g * vq;

        // Partials w.r.t. the rectangular bus voltage (vd, vq), currents held.
        const double dp_dvd = id + vd * g - vq * b;
        const double dp_dvq = vd * b + iq + vq * g;
        const double dq_dvd = vq * g - iq + vd * b;
        const double dq_dvq = id + vq * b - vd * g;

        d.dp_ddelta(i) = -vq * dp_dvd + vd * dp_dvq;
        d.dq_ddelta(i) = -vq * dq_dvd + vd * dq_dvq;
        d.dp_dv(i) = c * dp_dvd + s * dp_dvq;
        d.dq_dv(i) = c * dq_dvd + s * dq_dvq;

        for (int k = 0; k < m_; ++k) {
            const double cik = c_i_(i, k);
            d.dp_did(i, k) = vd * cik;
            d.dp_diq(i, k) = vq * cik;
            d.dq_did(i, k) = vq * cik;
            d.dq_diq(i, k) = -vd * cik;
        }
    }
    return d;
}

Vector GridModel::vector_field(const OperatingPoint& x) const {
    const StateLayout s = layout();
    const double wb = spec_.bases.omega_b;
    const PowerInjections pq = power_injections(x);

    Vector vbar_d(n_ + 1);
    Vector vbar_q(n_ + 1);
    vbar_d << x.delta.array().cos() * x.voltage.array(), spec_.feeder.v_d;
    vbar_q << x.delta.array().sin() * x.voltage.array(), spec_.feeder.v_q;

    Vector f(s.size());
    f.segment(s.delta(), n_) = x.omega.array() - wb;
    f.segment(s.omega(), n_) =
        (-x.omega + omega_d_ - kp_.cwiseProduct(pq.p - p_d_)).cwiseQuotient(tp_);
    f.segment(s.voltage(), n_) =
        (-x.voltage + v_d_ - kq_.cwiseProduct(pq.q - q_d_)).cwiseQuotient(tq_);
    const Vector td = c_t_ * vbar_d;
    const Vector tq = c_t_ * vbar_q;
    f.segment(s.i_d(), m_) =
        wb * (-r_.cwiseProduct(x.i_d) + x_.cwiseProduct(x.i_q) + td).cwiseQuotient(l_);
    f.segment(s.i_q(), m_) =
        wb * (-r_.cwiseProduct(x.i_q) - x_.cwiseProduct(x.i_d) + tq).cwiseQuotient(l_);
    return f;
}

Vector GridModel::vector_field(const Vector& w) const {
    return vector_field(OperatingPoint::from_vector(w, n_, m_));
}

PowerInjections power_injections(const GridSpec& spec, const OperatingPoint& x) {
    return GridModel(spec).power_injections(x);
}

Vector vector_field(const GridSpec& spec, const OperatingPoint& x) {
    return GridModel(spec).vector_field(x);
}

}  // namespace droopstab
