#include "droopstab/ieee13.hpp"

#include "droopstab/errors.hpp"

#include <cmath>
#include <numbers>

namespace droopstab {
namespace {

struct Config {
    int id;
    double r;  // ohm per mile, self impedance of one phase
    double x;
};

// Diagonal entries of the published phase impedance matrices. The two-phase
// configurations both use 1.3238 + j1.3569.
constexpr Config kConfigs[] = {
    {601, 0.3465, 1.0179}, {602, 0.7526, 1.1814}, {603, 1.3238, 1.3569},
    {604, 1.3238, 1.3569}, {605, 1.3292, 1.3475}, {606, 0.7982, 0.4463},
    {607, 1.3425, 0.5124},
};

struct Segment {
    const char* from;
    const char* to;
    int config;
    double feet;
};

constexpr Segment kSegments[] = {
    {"650", "632", 601, 2000}, {"632", "633", 602, 500}, {"632", "645", 603, 500},
    {"645", "646", 603, 300},  {"632", "671", 601, 2000}, {"671", "684", 604, 300},
    {"684", "611", 605, 300},  {"684", "652", 607, 800}, {"671", "675", 606, 500},
    {"671", "680", 601, 1000},
};

struct Load {
    const char* bus;
    double kw;
    double kvar;
};

// Spot loads; 634 folded into 633 and 692 into 671.
constexpr Load kLoads[] = {
    {"633", 400, 290}, {"645", 170, 125}, {"646", 230, 132}, {"652", 128, 86},
    {"671", 1325, 811}, {"675", 843, 462}, {"611", 170, 80},
};

constexpr const char* kInverterBuses[] = {"632", "633", "645", "646", "671",
                                          "684", "611", "652", "675", "680"};

const Config& config(int id) {
    for (const auto& c : kConfigs) {
        if (c.id == id) return c;
    }
    throw InternalConsistencyError("unknown line configuration");
}

}  // namespace

GridSpec build_ieee13(double kq, double kp) {
    if (!(kq > 0.0) || !(kp > 0.0)) throw StructuralError("droop gains must be positive");
    GridSpec s;
    s.bases = {381.58, 1e4, 2.0 * std::numbers::pi * 60.0};
    s.feeder = {"650", 1.0, 0.0};
    const double zb = s.bases.z_b();

    for (const char* bus : kInverterBuses) {
        InverterSpec inv;
        inv.bus = bus;
        inv.kp = kp;
        inv.kq = kq;
        inv.tp = 0.0318;
        inv.tq = 0.0318;
        inv.omega_d = s.bases.omega_b;
        inv.v_d = 1.0;
        inv.p_d = 0.35;
        inv.q_d = 0.1;
        s.inverters.push_back(inv);
    }
    for (const auto& seg : kSegments) {
        const Config& c = config(seg.config);
        const double miles = seg.feet / 5280.0;
        const double r = c.r * miles / zb;
        const double x = c.x * miles / zb;
        s.lines.push_back({seg.from, seg.to, r, x, x});
    }
    // Constant impedance drawing the rated power at 1 pu voltage, with the
    // load power expressed in MW/MVAr.
    for (const auto& ld : kLoads) {
        const double p = ld.kw / 1000.0;
        const double q = ld.kvar / 1000.0;
        const double s2 = p * p + q * q;
        s.loads.push_back({ld.bus, p / s2, q / s2});
    }
    validate(s);
    return s;
}

}  // namespace droopstab
