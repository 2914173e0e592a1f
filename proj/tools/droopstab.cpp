#include "droopstab/conditions.hpp"
#include "droopstab/errors.hpp"
#include "droopstab/ieee13.hpp"
#include "droopstab/matrix_io.hpp"
#include "droopstab/report.hpp"
#include "droopstab/simulator.hpp"
#include "droopstab/spec_io.hpp"

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace droopstab;

namespace {

struct Config {
    std::string spec_path;
    std::string out_dir;
    std::vector<double> kq, kp;
    std::string q_slow = "identity", q_fast = "identity", q_xi = "identity";
    std::string eps1_policy = "half-star";
    std::uint64_t seed = 42;
    int jobs = 1;
    std::string format = "table";
    double filter_rel_tol = 1e-9;
    std::string equilibrium_path;

    // simulate
    double horizon = 1.0;
    double perturb = 1e-4;
    int perturb_index = 0;
    bool perturb_random = false;
    double rtol = 1e-8, atol = 1e-10;
    double output_interval = 0.0;

    // ieee13 gen
    double gen_kq = 0.05, gen_kp = 0.6;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("droopstab");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("DROOPSTAB_LOG")) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

void apply_gains(GridSpec& spec, const std::vector<double>& values, bool is_kq) {
    if (values.empty()) return;
    const size_t n = spec.inverters.size();
    if (values.size() != 1 && values.size() != n) {
        throw StructuralError(std::string(is_kq ? "--kq" : "--kp") +
                              " needs one value or one per inverter (" + std::to_string(n) + ")");
    }
    for (size_t i = 0; i < n; ++i) {
        const double v = values.size() == 1 ? values[0] : values[i];
        (is_kq ? spec.inverters[i].kq : spec.inverters[i].kp) = v;
    }
}

Matrix weight(const std::string& choice) {
    if (choice == "identity") return {};
    return read_matrix_csv(choice);
}

AnalysisOptions analysis_options(const Config& cfg) {
    AnalysisOptions opts;
    opts.seed = cfg.seed;
    opts.filter_rel_tol = cfg.filter_rel_tol;
    opts.certificates.q_slow = weight(cfg.q_slow);
    opts.certificates.q_fast = weight(cfg.q_fast);
    opts.certificates.q_xi = weight(cfg.q_xi);
    opts.certificates.eps1_policy =
        cfg.eps1_policy == "actual" ? Eps1Policy::Actual : Eps1Policy::HalfStar;
    return opts;
}

GridSpec load_configured_spec(const Config& cfg) {
    GridSpec spec = load_spec(cfg.spec_path);
    apply_gains(spec, cfg.kq, true);
    apply_gains(spec, cfg.kp, false);
    validate(spec);
    return spec;
}

void ensure_dir(const std::string& dir) {
    if (!dir.empty()) fs::create_directories(dir);
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::ofstream os(fs::path(dir) / name);
    if (!os) throw Error("cannot write " + (fs::path(dir) / name).string());
    return os;
}

int cmd_analyze(const Config& cfg) {
    const GridSpec spec = load_configured_spec(cfg);
    AnalysisOptions opts = analysis_options(cfg);
    if (!cfg.equilibrium_path.empty()) {
        opts.initial_guess =
            load_equilibrium(cfg.equilibrium_path, spec.n_inverters(), spec.n_lines());
    }
    spdlog::info("analyzing {} inverters, {} lines", spec.n_inverters(), spec.n_lines());
    const Analysis an = analyze_detailed(spec, opts);
    const StabilityReport& r = an.report;
    for (const auto& w : r.warnings) spdlog::warn("{}", w);

    const Json j = report_to_json(r);
    if (cfg.format == "json") {
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << report_table(r);
    }
    if (!cfg.out_dir.empty()) {
        ensure_dir(cfg.out_dir);
        open_out(cfg.out_dir, "report.json") << j.dump(2) << '\n';
        open_out(cfg.out_dir, "report.txt") << report_table(r);
        auto e = open_out(cfg.out_dir, "eig_E.csv");
        write_eigenvalues_csv(e, r.eig_e);
        auto s = open_out(cfg.out_dir, "eig_As.csv");
        write_eigenvalues_csv(s, r.eig_slow);
        auto a = open_out(cfg.out_dir, "eig_A.csv");
        write_eigenvalues_csv(a, r.eig_full);
        open_out(cfg.out_dir, "equilibrium.json")
            << equilibrium_to_json(r.equilibrium, spec_hash(spec)).dump(2) << '\n';
    }
    return exit_code(r);
}

int cmd_export(const Config& cfg) {
    if (cfg.out_dir.empty()) throw StructuralError("export needs --out");
    const GridSpec spec = load_configured_spec(cfg);
    const Analysis an = analyze_detailed(spec, analysis_options(cfg));
    ensure_dir(cfg.out_dir);
    const auto put = [&](const char* name, const Matrix& m) {
        write_matrix_csv((fs::path(cfg.out_dir) / name).string(), m);
    };
    put("A.csv", an.jacobian);
    put("A_xz.csv", an.blocks.a_xz);
    put("A_zz.csv", an.blocks.a_zz);
    put("A_zx.csv", an.blocks.a_zx);
    put("A_zy.csv", an.blocks.a_zy);
    put("A_yz.csv", an.blocks.a_yz);
    put("A_yx.csv", an.blocks.a_yx);
    put("A_yy.csv", an.blocks.a_yy);
    put("Azz_tilde.csv", an.reduced.azz_tilde);
    put("E.csv", an.reduced.e_matrix);
    put("A_s.csv", an.reduced.a_slow);
    put("Gamma0.csv", an.reduced.gamma0);
    open_out(cfg.out_dir, "equilibrium.json")
        << equilibrium_to_json(an.report.equilibrium, spec_hash(spec)).dump(2) << '\n';
    spdlog::info("exported matrices to {}", cfg.out_dir);
    return 0;
}

int cmd_simulate(const Config& cfg) {
    const GridSpec spec = load_configured_spec(cfg);
    AnalysisOptions opts = analysis_options(cfg);
    EquilibriumResult eq = find_equilibrium(spec, flat_start(spec), opts.equilibrium);
    if (!eq.converged) throw StageError("equilibrium", eq.message);

    Vector w0 = eq.point.to_vector();
    if (cfg.perturb_random) {
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> nd;
        Vector d(w0.size());
        for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = nd(rng);
        w0 += cfg.perturb * d / d.norm();
    } else {
        if (cfg.perturb_index < 0 || cfg.perturb_index >= w0.size()) {
            throw StructuralError("--perturb-index out of range");
        }
        w0(cfg.perturb_index) += cfg.perturb;
    }
    StepControl ctrl;
    ctrl.rtol = cfg.rtol;
    ctrl.atol = cfg.atol;
    ctrl.output_interval = cfg.output_interval;
    const Trajectory traj = simulate_nonlinear(
        spec, OperatingPoint::from_vector(w0, spec.n_inverters(), spec.n_lines()), cfg.horizon,
        ctrl);
    for (const auto& w : traj.warnings) spdlog::warn("{}", w);

    const auto header = trajectory_header(spec.n_inverters(), spec.n_lines());
    if (cfg.out_dir.empty()) {
        write_trajectory_csv(std::cout, traj, header);
    } else {
        ensure_dir(cfg.out_dir);
        auto os = open_out(cfg.out_dir, "trajectory.csv");
        write_trajectory_csv(os, traj, header);
        Json meta;
        meta["method"] = traj.meta.method;
        meta["step_policy"] = traj.meta.step_policy;
        meta["spec_hash"] = traj.meta.spec_hash;
        meta["seed"] = cfg.seed;
        meta["accepted_steps"] = traj.meta.accepted_steps;
        meta["rejected_steps"] = traj.meta.rejected_steps;
        meta["floor_steps"] = traj.meta.floor_steps;
        meta["aborted"] = traj.aborted;
        meta["warnings"] = traj.warnings;
        open_out(cfg.out_dir, "trajectory.meta.json") << meta.dump(2) << '\n';
    }
    return traj.aborted ? 1 : 0;
}

int cmd_sweep(const Config& cfg) {
    if (cfg.kp.empty() || cfg.kq.empty()) throw StructuralError("sweep needs --kp and --kq lists");
    const GridSpec base = load_spec(cfg.spec_path);
    const AnalysisOptions opts = analysis_options(cfg);

    struct Point {
        double kp, kq;
        std::string row;
    };
    std::vector<Point> points;
    for (double kp : cfg.kp) {
        for (double kq : cfg.kq) points.push_back({kp, kq, {}});
    }
    std::atomic<size_t> next{0};
    const auto worker = [&] {
        for (size_t i = next++; i < points.size(); i = next++) {
            Point& p = points[i];
            std::ostringstream row;
            row << format_double(p.kp) << ',' << format_double(p.kq) << ',';
            try {
                GridSpec spec = base;
                apply_gains(spec, {p.kq}, true);
                apply_gains(spec, {p.kp}, false);
                const StabilityReport r = analyze(spec, opts);
                row << format_double(r.hurwitz_e.abscissa) << ','
                    << format_double(r.hurwitz_slow.abscissa) << ','
                    << format_double(r.hurwitz_full.abscissa) << ','
                    << format_double(r.eps1_star) << ',' << format_double(r.eps3_star) << ','
                    << r.hurwitz_e.stable << ',' << r.hurwitz_slow.stable << ','
                    << r.hurwitz_full.stable << ',' << r.verdict_reduced << ','
                    << r.verdict_full << ',' << exit_code(r) << ',';
            } catch (const std::exception& e) {
                std::string msg = e.what();
                std::replace(msg.begin(), msg.end(), ',', ';');
                std::replace(msg.begin(), msg.end(), '\n', ' ');
                row << ",,,,,,,,,,1," << msg;
            }
            row << ',' << opts.seed;
            p.row = row.str();
        }
    };
    const int jobs = std::max(1, cfg.jobs);
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::ostringstream csv;
    csv << "k_p,k_q,abscissa_E,abscissa_As,abscissa_A,eps1_star,eps3_star,hurwitz_E,"
           "hurwitz_As,hurwitz_A,verdict_reduced,verdict_full,exit_code,error,seed\n";
    for (const auto& p : points) csv << p.row << '\n';
    if (cfg.out_dir.empty()) {
        std::cout << csv.str();
    } else {
        ensure_dir(cfg.out_dir);
        open_out(cfg.out_dir, "sweep.csv") << csv.str();
    }
    return 0;
}

int cmd_ieee13_gen(const Config& cfg) {
    const GridSpec spec = build_ieee13(cfg.gen_kq, cfg.gen_kp);
    if (cfg.out_dir.empty()) {
        std::cout << spec_to_json(spec).dump(2) << '\n';
    } else {
        const fs::path p(cfg.out_dir);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        save_spec(p.string(), spec);
    }
    return 0;
}

void add_common(CLI::App* app, Config& cfg, bool needs_spec = true) {
    auto* opt = app->add_option("--spec", cfg.spec_path, "grid spec file")->check(CLI::ExistingFile);
    if (needs_spec) opt->required();
    app->add_option("--out", cfg.out_dir, "output directory");
    app->add_option("--kq", cfg.kq, "voltage droop gain(s)")->delimiter(',');
    app->add_option("--kp", cfg.kp, "frequency droop gain(s)")->delimiter(',');
    app->add_option("--q-slow", cfg.q_slow, "identity or CSV path");
    app->add_option("--q-fast", cfg.q_fast, "identity or CSV path");
    app->add_option("--q-xi", cfg.q_xi, "identity or CSV path");
    app->add_option("--eps1-policy", cfg.eps1_policy)
        ->check(CLI::IsMember({"actual", "half-star"}));
    app->add_option("--seed", cfg.seed);
    app->add_option("--jobs", cfg.jobs)->check(CLI::PositiveNumber);
    app->add_option("--format", cfg.format)->check(CLI::IsMember({"table", "json", "csv"}));
    app->add_option("--filter-rel-tol", cfg.filter_rel_tol);
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    Config cfg;
    CLI::App app{"Small-signal stability certificates for droop-controlled inverter grids"};
    app.require_subcommand(1);

    auto* analyze_cmd = app.add_subcommand("analyze", "certify stability of a grid spec");
    add_common(analyze_cmd, cfg);
    analyze_cmd->add_option("--equilibrium", cfg.equilibrium_path, "initial guess file");

    auto* simulate_cmd = app.add_subcommand("simulate", "simulate a perturbed equilibrium");
    add_common(simulate_cmd, cfg);
    simulate_cmd->add_option("--horizon", cfg.horizon, "seconds")->check(CLI::NonNegativeNumber);
    simulate_cmd->add_option("--perturb", cfg.perturb, "perturbation size");
    simulate_cmd->add_option("--perturb-index", cfg.perturb_index, "state index to perturb");
    simulate_cmd->add_flag("--perturb-random", cfg.perturb_random, "seeded random direction");
    simulate_cmd->add_option("--rtol", cfg.rtol);
    simulate_cmd->add_option("--atol", cfg.atol);
    simulate_cmd->add_option("--output-interval", cfg.output_interval);

    auto* sweep_cmd = app.add_subcommand("sweep", "evaluate a grid of uniform gains");
    add_common(sweep_cmd, cfg);

    auto* export_cmd = app.add_subcommand("export", "write system matrices as CSV");
    add_common(export_cmd, cfg);

    auto* ieee_cmd = app.add_subcommand("ieee13", "bundled example dataset");
    ieee_cmd->require_subcommand(1);
    auto* gen_cmd = ieee_cmd->add_subcommand("gen", "write the reconstructed 13-bus spec");
    gen_cmd->add_option("--out", cfg.out_dir, "output file (stdout when omitted)");
    gen_cmd->add_option("--kq", cfg.gen_kq);
    gen_cmd->add_option("--kp", cfg.gen_kp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*analyze_cmd) return cmd_analyze(cfg);
        if (*simulate_cmd) return cmd_simulate(cfg);
        if (*sweep_cmd) return cmd_sweep(cfg);
        if (*export_cmd) return cmd_export(cfg);
        if (*gen_cmd) return cmd_ieee13_gen(cfg);
    } catch (const StageError& e) {
        std::cerr << "error in stage " << e.what() << '\n';
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error in stage parse: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
