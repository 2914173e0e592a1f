#include "random_grid.hpp"

#include "droopstab/equilibrium.hpp"
#include "droopstab/errors.hpp"
#include "droopstab/linearize.hpp"
#include "droopstab/timescale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>

namespace droopstab::testing {
namespace {

double uniform(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

int uniform_int(std::mt19937_64& rng, int a, int b) {
    return std::uniform_int_distribution<int>(a, b)(rng);
}

std::string name(int i, int n) { return i == n ? "feeder" : "b" + std::to_string(i + 1); }

// One draw; empty when the grid has no operating point near the flat start
// or the decentralized gain bounds do not apply.
std::optional<GridSpec> draw_grid(std::mt19937_64& rng, const RandomGridOptions& opts) {
    GridSpec s;
    const int n = uniform_int(rng, opts.n_min, opts.n_max);
    const int m = uniform_int(rng, n, std::max(n, opts.m_max));
    s.bases = {400.0, 1e4, 2.0 * std::numbers::pi * 60.0};
    s.feeder = {"feeder", 1.0, 0.0};

    for (int i = 0; i < n; ++i) {
        InverterSpec inv;
        inv.bus = name(i, n);
        inv.kp = uniform(rng, opts.kp_min, opts.kp_max);
        inv.kq = 0.01;
        inv.tp = inv.tq = opts.t_filter;
        inv.omega_d = s.bases.omega_b;
        inv.v_d = 1.0;
        inv.p_d = uniform(rng, 0.0, 0.3);
        inv.q_d = uniform(rng, 0.0, 0.1);
        s.inverters.push_back(inv);
    }

    // Spanning tree over inverters plus feeder, then extra lines.
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> attached{n};
    std::set<std::pair<int, int>> used;
    auto add_line = [&](int a, int b) {
        if (uniform(rng, 0.0, 1.0) < 0.5) std::swap(a, b);
        const double x = uniform(rng, opts.x_min, opts.x_max);
        s.lines.push_back({name(a, n), name(b, n), uniform(rng, opts.r_min, opts.r_max), x,
                           x * uniform(rng, 0.5, 2.0)});
        used.insert({std::min(a, b), std::max(a, b)});
    };
    for (int i : order) {
        const int parent = attached[static_cast<size_t>(uniform_int(rng, 0, static_cast<int>(attached.size()) - 1))];
        add_line(i, parent);
        attached.push_back(i);
    }
    int guard = 0;
    while (static_cast<int>(s.lines.size()) < m && guard++ < 100) {
        const int a = uniform_int(rng, 0, n);
        const int b = uniform_int(rng, 0, n);
        if (a == b || used.count({std::min(a, b), std::max(a, b)})) continue;
        add_line(a, b);
    }

    for (int i = 0; i < n; ++i) {
        if (uniform(rng, 0.0, 1.0) < 0.6) {
            s.loads.push_back({name(i, n), uniform(rng, 0.5, 3.0), uniform(rng, 0.05, 1.0)});
        }
    }

    // Voltage droop gains inside the decentralized bounds at a trial point.
    try {
        const EquilibriumResult trial = find_equilibrium(s, flat_start(s));
        if (!trial.converged) return std::nullopt;
        const auto bounds = lemma3_gain_bounds(nu_table(s, trial.point));
        for (int i = 0; i < n; ++i) {
            const auto& b = bounds[static_cast<size_t>(i)];
            const double cap = b.upper ? std::min(*b.upper, 1.0) : 1.0;
            s.inverters[static_cast<size_t>(i)].kq = uniform(rng, 0.05, 0.95) * cap;
        }
        if (!find_equilibrium(s, flat_start(s)).converged) return std::nullopt;
    } catch (const Error&) {
        return std::nullopt;
    }
    return s;
}

}  // namespace

GridSpec random_grid(std::mt19937_64& rng, const RandomGridOptions& opts) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        if (auto s = draw_grid(rng, opts)) return *s;
    }
    throw Error("random_grid: no feasible grid in 1000 draws");
}

bool place_timescales(GridSpec& spec, double u, double v) {
    AnalysisOptions opts;
    opts.certificates.eps1_policy = Eps1Policy::Actual;
    StabilityReport r;
    try {
        r = analyze(spec, opts);
    } catch (const std::exception&) {
        return false;
    }
    if (!std::isfinite(r.eps1_star) || !(r.eps1_star > 0.0)) return false;
    const double t = u * r.eps1_star;
    for (auto& inv : spec.inverters) inv.tp = inv.tq = t;
    try {
        r = analyze(spec, opts);
    } catch (const std::exception&) {
        return false;
    }
    if (!std::isfinite(r.eps3_star) || !(r.eps3_star > 0.0)) return false;
    const double scale = v * r.eps3_star / r.eps3;
    for (auto& line : spec.lines) line.l *= scale;
    return true;
}

}  // namespace droopstab::testing
