#include "droopstab/report.hpp"

#include "droopstab/matrix_io.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace droopstab {
namespace {

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json hurwitz_json(const HurwitzResult& h) {
    return {{"hurwitz", h.stable}, {"marginal", h.marginal}, {"spectral_abscissa", num(h.abscissa)}};
}

std::string fmt(double v) {
    if (std::isnan(v)) return "n/a";
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

}  // namespace

Json report_to_json(const StabilityReport& r) {
    const CertificateSet& c = r.certificates;
    Json j;
    j["seed"] = r.seed;
    j["hurwitz_e"] = hurwitz_json(r.hurwitz_e);
    j["hurwitz_slow"] = hurwitz_json(r.hurwitz_slow);
    j["hurwitz_full"] = hurwitz_json(r.hurwitz_full);

    Json l3;
    l3["applicable"] = r.lemma3_applicable;
    l3["satisfied"] = r.lemma3_satisfied;
    l3["bounds"] = Json::array();
    for (const auto& b : r.lemma3_bounds) {
        if (b.kind == GainBound::Kind::UnboundedPositive) {
            l3["bounds"].push_back({{"kind", "unbounded-positive"}, {"upper", nullptr}});
        } else {
            l3["bounds"].push_back({{"kind", "upper-bounded"}, {"upper", num(*b.upper)}});
        }
    }
    j["lemma3"] = l3;

    j["eps1"] = num(r.eps1);
    j["eps1_star"] = num(r.eps1_star);
    j["eps1_policy"] = to_string(c.eps1_policy);
    j["eps1_used"] = num(r.eps1_used);
    j["eps2"] = num(c.eps2);
    j["eps3"] = num(r.eps3);
    j["eps3_star"] = num(r.eps3_star);
    j["eps3_star_at_eps1"] = num(r.eps3_star_at_eps1);
    j["verdict_reduced"] = r.verdict_reduced;
    j["verdict_full"] = r.verdict_full;
    j["conditions_conservative"] = r.conditions_conservative;

    j["constants"] = {{"alpha1", num(c.alpha1)},   {"alpha2", num(c.alpha2)},
                      {"alpha3", num(c.alpha3)},   {"alpha4", num(c.alpha4)},
                      {"beta1", num(c.beta1)},     {"beta2", num(c.beta2)},
                      {"beta3", num(c.beta3)},     {"beta4", num(c.beta4)},
                      {"gamma1", num(c.gamma1)},   {"gamma1_raw", num(c.gamma1_raw)},
                      {"gamma2", num(c.gamma2)},   {"gamma2_raw", num(c.gamma2_raw)},
                      {"d1", num(c.d1)},           {"d2", num(c.d2)}};
    j["lyapunov_residuals"] = {{"slow", num(c.residual_slow)},
                               {"fast", num(c.residual_fast)},
                               {"very_fast", num(c.residual_xi)}};
    j["equilibrium"] = {{"converged", r.equilibrium.converged},
                        {"iterations", r.equilibrium.iterations},
                        {"residual_norm", num(r.equilibrium.residual_norm)},
                        {"field_norm", num(r.equilibrium.field_norm)}};
    j["e_closed_form_gap"] = num(r.e_closed_form_gap);
    j["warnings"] = r.warnings;
    return j;
}

std::string report_table(const StabilityReport& r) {
    const CertificateSet& c = r.certificates;
    std::ostringstream os;
    auto row = [&os](const std::string& k, const std::string& v) {
        os << std::left << std::setw(28) << k << v << '\n';
    };
    auto hrow = [&](const char* name, const HurwitzResult& h) {
        std::string v = std::string(yes_no(h.stable)) + "  (abscissa " + fmt(h.abscissa) + ")";
        if (h.marginal) v += " marginal";
        row(name, v);
    };
    row("seed", std::to_string(r.seed));
    hrow("E Hurwitz", r.hurwitz_e);
    hrow("A_s Hurwitz", r.hurwitz_slow);
    hrow("A Hurwitz", r.hurwitz_full);
    if (r.lemma3_applicable) {
        for (size_t i = 0; i < r.lemma3_bounds.size(); ++i) {
            const auto& b = r.lemma3_bounds[i];
            row("k_q bound, inverter " + std::to_string(i + 1),
                b.upper ? "0 < k_q < " + fmt(*b.upper) : "k_q > 0");
        }
        row("gain bounds satisfied", yes_no(r.lemma3_satisfied));
    } else {
        row("gain bounds", "not applicable");
    }
    row("eps1", fmt(r.eps1));
    row("eps1*", fmt(r.eps1_star));
    row("eps1 used (" + std::string(to_string(c.eps1_policy)) + ")", fmt(r.eps1_used));
    row("eps3", fmt(r.eps3));
    row("eps3*", fmt(r.eps3_star));
    row("eps3* at actual eps1", fmt(r.eps3_star_at_eps1));
    row("alpha1..4", fmt(c.alpha1) + " " + fmt(c.alpha2) + " " + fmt(c.alpha3) + " " +
                         fmt(c.alpha4));
    row("beta1..4", fmt(c.beta1) + " " + fmt(c.beta2) + " " + fmt(c.beta3) + " " + fmt(c.beta4));
    row("gamma1, gamma2", fmt(c.gamma1) + " " + fmt(c.gamma2));
    row("d1*, d2", fmt(c.d1) + " " + fmt(c.d2));
    row("Lyapunov residuals", fmt(c.residual_slow) + " " + fmt(c.residual_fast) + " " +
                                  fmt(c.residual_xi));
    row("reduced-order certified", yes_no(r.verdict_reduced));
    row("full-order certified", yes_no(r.verdict_full));
    row("conditions conservative", yes_no(r.conditions_conservative));
    for (const auto& w : r.warnings) row("warning", w);
    return os.str();
}

}  // namespace droopstab
