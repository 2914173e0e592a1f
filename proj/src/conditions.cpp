#include "droopstab/conditions.hpp"

#include "droopstab/errors.hpp"
#include "droopstab/linalg.hpp"

#include <cmath>
#include <sstream>

namespace droopstab {

HurwitzResult hurwitz(const Matrix& a, double tol) {
    if (tol < 0.0) throw StructuralError("Hurwitz tolerance must be non-negative");
    HurwitzResult h;
    h.abscissa = spectral_abscissa(a);
    h.stable = h.abscissa < -tol;
    h.marginal = std::abs(h.abscissa) <= tol;
    return h;
}

std::vector<GainBound> lemma3_gain_bounds(const NuTable& nu) {
    const auto n = nu.nu_diag.size();
    std::vector<GainBound> out(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(nu.nu_diag(i) < 0.0)) {
            std::ostringstream msg;
            msg << "nu_" << i << " = " << nu.nu_diag(i)
                << " is not negative; the decentralized gain bounds do not apply";
            throw AssumptionViolation(msg.str());
        }
        double off = 0.0;
        for (int j : nu.neighbors[static_cast<size_t>(i)]) off += std::abs(nu.nu_offdiag(i, j));
        const double diag = std::abs(nu.nu_diag(i));
        if (diag >= off) {
            out[static_cast<size_t>(i)] = {GainBound::Kind::UnboundedPositive, std::nullopt};
        } else {
            out[static_cast<size_t>(i)] = {GainBound::Kind::UpperBounded, 1.0 / (off - diag)};
        }
    }
    return out;
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace

Analysis analyze_detailed(const GridSpec& input, const AnalysisOptions& opts) {
    Analysis an;
    StabilityReport& rep = an.report;
    rep.seed = opts.seed;

    stage("spec", [&] { validate(input); });

    an.spec = input;
    const double eps1 = stage("filters", [&] {
        return check_homogeneous_filters(input, opts.filter_rel_tol);
    });
    bool homogeneous = true;
    for (const auto& inv : input.inverters) homogeneous &= inv.tp == eps1 && inv.tq == eps1;
    if (!homogeneous) {
        an.spec = homogenize_filters(input, eps1);
        std::ostringstream msg;
        msg << "filter time constants differ; analysis uses their mean " << eps1;
        rep.warnings.push_back(msg.str());
    }
    const GridSpec& spec = an.spec;
    const int n = spec.n_inverters();

    rep.equilibrium = stage("equilibrium", [&] {
        const OperatingPoint guess = opts.initial_guess ? *opts.initial_guess : flat_start(spec);
        EquilibriumResult eq = find_equilibrium(spec, guess, opts.equilibrium);
        if (!eq.converged) throw Error(eq.message);
        return eq;
    });
    const OperatingPoint& w0 = rep.equilibrium.point;

    stage("linearize", [&] {
        an.jacobian = jacobian(spec, w0);
        an.blocks = to_standard_form(extract_blocks(an.jacobian, spec, opts.filter_rel_tol));
    });
    const double spread = an.blocks.eps2_list.maxCoeff() / an.blocks.eps2_list.minCoeff();
    if (spread > 100.0) {
        std::ostringstream msg;
        msg << "timescale overlap: line time constants span a factor " << spread;
        rep.warnings.push_back(msg.str());
    }

    stage("timescale", [&] {
        an.reduced = reduce(an.blocks, opts.max_condition);
        rep.nu = nu_table(spec, w0);
        const Matrix e_closed = e_matrix_from_nu(spec, rep.nu);
        rep.e_closed_form_gap = (e_closed - an.reduced.e_matrix).cwiseAbs().maxCoeff();
    });
    if (rep.e_closed_form_gap > 1e-8 * std::max(1.0, an.reduced.e_matrix.cwiseAbs().maxCoeff())) {
        std::ostringstream msg;
        msg << "closed-form and extracted E differ by " << rep.e_closed_form_gap;
        rep.warnings.push_back(msg.str());
    }
    {
        const Matrix& e = an.reduced.e_matrix;
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i != j) worst = std::min(worst, e(i, j));
            }
        }
        if (worst < -1e-12) {
            std::ostringstream msg;
            msg << "E is not Metzler (off-diagonal entry " << worst << ")";
            rep.warnings.push_back(msg.str());
        }
    }

    stage("conditions", [&] {
        rep.hurwitz_e = hurwitz(an.reduced.e_matrix, opts.hurwitz_tol);
        rep.hurwitz_slow = hurwitz(an.reduced.a_slow, opts.hurwitz_tol);
        rep.hurwitz_full = hurwitz(an.jacobian, opts.hurwitz_tol);
        rep.eig_e = eigenvalues(an.reduced.e_matrix);
        rep.eig_slow = eigenvalues(an.reduced.a_slow);
        rep.eig_full = eigenvalues(an.jacobian);
    });
    for (const auto* h : {&rep.hurwitz_e, &rep.hurwitz_slow, &rep.hurwitz_full}) {
        if (h->marginal) {
            const char* which = h == &rep.hurwitz_e      ? "E"
                                : h == &rep.hurwitz_slow ? "A_s"
                                                         : "A";
            rep.warnings.push_back(std::string(which) + " has a marginal spectrum");
        }
    }

    try {
        rep.lemma3_bounds = lemma3_gain_bounds(rep.nu);
        rep.lemma3_applicable = true;
        rep.lemma3_satisfied = true;
        for (int i = 0; i < n; ++i) {
            const double kq = spec.inverters[static_cast<size_t>(i)].kq;
            const auto& bnd = rep.lemma3_bounds[static_cast<size_t>(i)];
            if (!(kq > 0.0) || (bnd.upper && !(kq < *bnd.upper))) rep.lemma3_satisfied = false;
        }
    } catch (const AssumptionViolation& e) {
        rep.warnings.push_back(std::string("gain bounds inapplicable (") + e.what() +
                               "); relying on the direct Hurwitz check of E");
    }

    rep.certificates = stage("certificates", [&] {
        return build_certificates(an.blocks, an.reduced, opts.certificates);
    });
    const CertificateSet& c = rep.certificates;
    for (const auto& note : c.notes) rep.warnings.push_back(note);

    rep.eps1 = c.eps1;
    rep.eps1_star = c.eps1_star;
    rep.eps1_used = c.eps1_used;
    rep.eps3 = c.eps3;
    rep.eps3_star = c.eps3_star;
    rep.eps3_star_at_eps1 = c.eps3_star_at_eps1;
    rep.verdict_reduced = rep.hurwitz_e.stable && rep.hurwitz_slow.stable && c.verdict_reduced;
    rep.verdict_full = rep.verdict_reduced && c.verdict_full;
    rep.conditions_conservative = !rep.verdict_full && rep.hurwitz_full.stable;
    if (rep.verdict_full && !rep.hurwitz_full.stable) {
        rep.warnings.push_back("certificate claims stability but A is not Hurwitz");
    }
    return an;
}

StabilityReport analyze(const GridSpec& spec, const AnalysisOptions& opts) {
    return analyze_detailed(spec, opts).report;
}

int exit_code(const StabilityReport& r) {
    if (!r.hurwitz_full.stable) return 3;
    return r.verdict_full ? 0 : 2;
}

}  // namespace droopstab
