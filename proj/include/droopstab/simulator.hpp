#pragma once

#include "droopstab/grid_model.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace droopstab {

struct StepControl {
    double rtol = 1e-8;
    double atol = 1e-10;
    double h_initial = 0.0;  // 0 selects automatically
    double h_min = 1e-9;     // floor; steps below it are forced and flagged
    double h_max = 0.0;      // 0 means unbounded
    int max_floor_steps = 10000;
    std::uint64_t max_steps = 50'000'000;
    /// Minimum spacing of stored samples; 0 stores every accepted step.
    double output_interval = 0.0;
};

struct TrajectoryMeta {
    std::string method = "dopri5";
    std::string step_policy;
    std::uint64_t spec_hash = 0;
    std::uint64_t accepted_steps = 0;
    std::uint64_t rejected_steps = 0;
    std::uint64_t floor_steps = 0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    TrajectoryMeta meta;
    bool aborted = false;
    std::vector<std::string> warnings;
};

using Field = std::function<Vector(double, const Vector&)>;

/// Explicit adaptive Dormand-Prince 5(4) integration of dy/dt = f(t, y).
Trajectory integrate(const Field& f, const Vector& y0, double horizon, const StepControl& ctrl);

Trajectory simulate_nonlinear(const GridSpec& spec, const OperatingPoint& x0, double horizon,
                              const StepControl& ctrl = {});
Trajectory simulate_linear(const Matrix& a, const Vector& w0, double horizon,
                           const StepControl& ctrl = {});

/// Least-squares slope of log||x(t) - reference|| over the trailing
/// `window` fraction of the time span. A growing trajectory yields a
/// positive rate. An empty reference means zero.
double decay_rate(const Trajectory& traj, double window = 0.5, const Vector& reference = {});

/// FNV-1a over the serialized spec; stable across runs.
std::uint64_t spec_hash(const GridSpec& spec);

/// Column names t, delta_1.., omega_1.., V_1.., I_D1.., I_Q1...
std::vector<std::string> trajectory_header(int n, int m);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<std::string>& header);

}  // namespace droopstab
