#include "droopstab/simulator.hpp"

#include "droopstab/errors.hpp"
#include "droopstab/matrix_io.hpp"
#include "droopstab/spec_io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace droopstab {
namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double scaled_norm(const Vector& v, const Vector& y0, const Vector& y1, double rtol, double atol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double r = v(i) / sc;
        acc += r * r;
    }
    return v.size() > 0 ? std::sqrt(acc / static_cast<double>(v.size())) : 0.0;
}

// Initial step heuristic of Hairer, Norsett and Wanner (order 5).
double initial_step(const Field& f, const Vector& y0, const Vector& f0, const StepControl& ctrl,
                    double horizon) {
    const double d0 = scaled_norm(y0, y0, y0, ctrl.rtol, ctrl.atol);
    const double d1 = scaled_norm(f0, y0, y0, ctrl.rtol, ctrl.atol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, horizon);
    const Vector y1 = y0 + h0 * f0;
    const Vector f1 = f(h0, y1);
    const double d2 = scaled_norm(f1 - f0, y0, y0, ctrl.rtol, ctrl.atol) / h0;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                : std::pow(0.01 / std::max(d1, d2), 1.0 / 5);
    return std::min({100 * h0, h1, horizon});
}

}  // namespace

Trajectory integrate(const Field& f, const Vector& y0, double horizon, const StepControl& ctrl) {
    if (!(horizon >= 0.0)) throw StructuralError("simulation horizon must be non-negative");
    Trajectory traj;
    {
        std::ostringstream pol;
        pol << "adaptive rtol=" << ctrl.rtol << " atol=" << ctrl.atol << " h_min=" << ctrl.h_min;
        traj.meta.step_policy = pol.str();
    }
    if (horizon == 0.0) return traj;

    double t = 0.0;
    Vector y = y0;
    Vector k1 = f(t, y);
    traj.times.push_back(t);
    traj.states.push_back(y);
    double next_out = ctrl.output_interval;

    double h = ctrl.h_initial > 0.0 ? ctrl.h_initial : initial_step(f, y, k1, ctrl, horizon);
    const double h_max = ctrl.h_max > 0.0 ? ctrl.h_max : horizon;
    int consecutive_floor = 0;
    bool warned_floor = false;

    while (t < horizon) {
        if (traj.meta.accepted_steps + traj.meta.rejected_steps >= ctrl.max_steps) {
            traj.aborted = true;
            traj.warnings.push_back("step budget exhausted at t=" + std::to_string(t));
            break;
        }
        bool forced = false;
        if (h <= ctrl.h_min) {
            h = ctrl.h_min;
            forced = true;
        }
        h = std::min(h, h_max);
        bool last = false;
        if (t + h >= horizon) {
            h = horizon - t;
            last = true;
        }

        const Vector k2 = f(t + c2 * h, y + h * (a21 * k1));
        const Vector k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Vector k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 =
            f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vector y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vector k7 = f(t + h, y_new);
        const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = scaled_norm(err, y, y_new, ctrl.rtol, ctrl.atol);

        if (!y_new.allFinite()) {
            traj.aborted = true;
            traj.warnings.push_back("state became non-finite at t=" + std::to_string(t));
            break;
        }

        const double factor =
            en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -1.0 / 5), 0.2, 5.0);
        if (en <= 1.0 || forced) {
            if (forced && en > 1.0) {
                ++traj.meta.floor_steps;
                if (!warned_floor) {
                    traj.warnings.push_back(
                        "stiffness: step size hit the floor; continuing with forced steps");
                    warned_floor = true;
                }
                if (++consecutive_floor > ctrl.max_floor_steps) {
                    traj.aborted = true;
                    traj.warnings.push_back("aborted after " +
                                            std::to_string(ctrl.max_floor_steps) +
                                            " consecutive steps at the floor");
                    break;
                }
            } else {
                consecutive_floor = 0;
            }
            t = last ? horizon : t + h;
            y = y_new;
            k1 = k7;
            ++traj.meta.accepted_steps;
            if (last || ctrl.output_interval <= 0.0 || t >= next_out) {
                traj.times.push_back(t);
                traj.states.push_back(y);
                if (ctrl.output_interval > 0.0) {
                    while (next_out <= t) next_out += ctrl.output_interval;
                }
            }
            h *= factor;
        } else {
            ++traj.meta.rejected_steps;
            h *= std::min(1.0, factor);
        }
    }
    return traj;
}

Trajectory simulate_nonlinear(const GridSpec& spec, const OperatingPoint& x0, double horizon,
                              const StepControl& ctrl) {
    const GridModel model(spec);
    const Vector w0 = x0.to_vector();
    if (w0.size() != spec.state_size()) throw StructuralError("initial state has the wrong size");
    Trajectory traj = integrate(
        [&model](double, const Vector& w) { return model.vector_field(w); }, w0, horizon, ctrl);
    traj.meta.spec_hash = spec_hash(spec);
    return traj;
}

Trajectory simulate_linear(const Matrix& a, const Vector& w0, double horizon,
                           const StepControl& ctrl) {
    if (a.rows() != a.cols() || a.rows() != w0.size()) {
        throw StructuralError("linear system and initial state sizes differ");
    }
    return integrate([&a](double, const Vector& w) -> Vector { return a * w; }, w0, horizon, ctrl);
}

double decay_rate(const Trajectory& traj, double window, const Vector& reference) {
    if (traj.times.size() < 2) throw Error("trajectory too short for a decay rate");
    if (!(window > 0.0 && window <= 1.0)) throw StructuralError("window must be in (0, 1]");
    const double t0 = traj.times.front();
    const double t1 = traj.times.back();
    const double start = t1 - window * (t1 - t0);

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (size_t i = 0; i < traj.times.size(); ++i) {
        if (traj.times[i] < start) continue;
        const double dist = reference.size() == 0 ? traj.states[i].norm()
                                                  : (traj.states[i] - reference).norm();
        if (!(dist > 0.0)) continue;
        const double x = traj.times[i];
        const double yv = std::log(dist);
        sx += x;
        sy += yv;
        sxx += x * x;
        sxy += x * yv;
        ++count;
    }
    if (count < 2) throw Error("not enough nonzero samples in the decay window");
    const double denom = count * sxx - sx * sx;
    if (denom == 0.0) throw Error("degenerate time samples in the decay window");
    return (count * sxy - sx * sy) / denom;
}

std::uint64_t spec_hash(const GridSpec& spec) {
    const std::string text = spec_to_json(spec).dump();
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::vector<std::string> trajectory_header(int n, int m) {
    std::vector<std::string> h{"t"};
    for (int i = 1; i <= n; ++i) h.push_back("delta_" + std::to_string(i));
    for (int i = 1; i <= n; ++i) h.push_back("omega_" + std::to_string(i));
    for (int i = 1; i <= n; ++i) h.push_back("V_" + std::to_string(i));
    for (int k = 1; k <= m; ++k) h.push_back("I_D" + std::to_string(k));
    for (int k = 1; k <= m; ++k) h.push_back("I_Q" + std::to_string(k));
    return h;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& header) {
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (size_t r = 0; r < traj.times.size(); ++r) {
        os << format_double(traj.times[r]);
        for (Eigen::Index c = 0; c < traj.states[r].size(); ++c) {
            os << ',' << format_double(traj.states[r](c));
        }
        os << '\n';
    }
}

}  // namespace droopstab
