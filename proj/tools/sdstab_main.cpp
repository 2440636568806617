// Command-line front end: certification checks, simulation, ensemble
// statistics and the two end-to-end example reproductions. Exit codes:
// 0 ok/certified, 2 refuted/violated, 3 inconclusive, 1 usage/runtime error.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdstab/config.hpp"
#include "sdstab/io.hpp"
#include "sdstab/sdstab.hpp"

namespace {

using sdstab::ExperimentConfig;
using json = nlohmann::json;

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kRefuted = 2;
constexpr int kInconclusive = 3;

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
};

ExperimentConfig load_with_overrides(const GlobalArgs& args) {
    if (args.config_path.empty()) throw CLI::ValidationError("--config is required");
    json j = ExperimentConfig::load(args.config_path).raw();
    if (args.seed) j["seed"] = *args.seed;
    if (args.threads) j["threads"] = *args.threads;
    if (args.out_dir) j["output"] = {{"dir", *args.out_dir}};
    return ExperimentConfig::parse(j);
}

void add_global_flags(CLI::App* cmd, GlobalArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file (JSON)");
    cmd->add_option("--seed", args.seed, "override the master seed");
    cmd->add_option("--out", args.out_dir, "override the output directory");
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)");
}

struct UsfArgs {
    double horizon = 100.0;
    double grid_step = 1e-3;
    double T = 1.0;
    double q = 1.5;
    double rho = 0.999;
};

UsfArgs usf_args(const ExperimentConfig& cfg) {
    UsfArgs a;
    if (cfg.has("usf")) {
        const json& u = cfg.raw().at("usf");
        a.horizon = u.value("horizon", a.horizon);
        a.grid_step = u.value("grid_step", a.grid_step);
        a.T = u.value("T", a.T);
        a.q = u.value("q", a.q);
        a.rho = u.value("rho", a.rho);
    }
    return a;
}

int cmd_check_usf(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const auto a = usf_args(cfg);
    const auto result = sdstab::check_usf(cfg.signal(), a.horizon, a.grid_step);
    std::cout << sdstab::usf_result_to_json(result).dump(2) << "\n";
    switch (result.status) {
        case sdstab::UsfStatus::certified: return kOk;
        case sdstab::UsfStatus::refuted: return kRefuted;
        default: return kInconclusive;
    }
}

int cmd_overshoot(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const auto a = usf_args(cfg);
    sdstab::UsfScanOptions scan{a.horizon, a.grid_step, false};
    const double phi = sdstab::overshoot(cfg.signal(), a.T, scan);
    std::cout << json{{"T", a.T}, {"overshoot", phi}}.dump(2) << "\n";
    return kOk;
}

int cmd_ucs(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const auto a = usf_args(cfg);
    const double sup = sdstab::sup_window_integral(cfg.signal(), a.T, a.horizon, a.grid_step);
    const bool contained = sup < -1e-12;
    std::cout << json{{"T", a.T}, {"sup_window_integral", sup}, {"contained", contained}}.dump(2)
              << "\n";
    return contained ? kOk : kRefuted;
}

int cmd_gain_check(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const auto a = usf_args(cfg);
    sdstab::UsfScanOptions scan{a.horizon, a.grid_step, false};
    const auto mu = cfg.signal();
    const double phi = sdstab::overshoot(mu, a.T, scan);
    const bool ok = sdstab::check_gain_condition({a.q, a.rho, a.T}, mu, scan);
    std::cout << json{{"q", a.q},
                      {"rho", a.rho},
                      {"T", a.T},
                      {"overshoot", phi},
                      {"required_q", std::exp(phi) / a.rho},
                      {"ok", ok}}
                     .dump(2)
              << "\n";
    return ok ? kOk : kRefuted;
}

int cmd_simulate(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const auto model = cfg.model();
    const auto sim = cfg.sim_config();
    sdstab::PhiloxRng brownian(sim.master_seed, 0);
    sdstab::PhiloxRng regime_rng(sim.master_seed, 1);
    const sdstab::RegimeGenerator gen(model.generator);
    sdstab::RegimePath path =
        gen.size() > 1 ? sdstab::sample_path(gen, sim.t0, sim.t1, sim.initial_regime, regime_rng)
                       : sdstab::RegimePath{sim.t0, sim.t1, {}, {sim.initial_regime}};
    const auto traj = sdstab::simulate(model, sim, path, brownian);

    const std::string dir = cfg.output_dir();
    sdstab::ensure_dir(dir);
    sdstab::write_trajectory_csv(dir + "/trajectory.csv", traj);
    sdstab::write_regime_path_csv(dir + "/regime_path.csv", path);
    std::cout << json{{"trajectory", dir + "/trajectory.csv"},
                      {"regime_path", dir + "/regime_path.csv"},
                      {"truncated", traj.truncated},
                      {"max_abs", traj.max_abs},
                      {"substeps", traj.substep_count}}
                     .dump(2)
              << "\n";
    return kOk;
}

int cmd_moments(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const auto est = sdstab::run_ensemble(cfg.model(), cfg.sim_config(), cfg.ensemble_options());
    const std::string dir = cfg.output_dir();
    sdstab::ensure_dir(dir);
    sdstab::write_moments_csv(dir + "/moments.csv", est);
    std::cout << json{{"moments", dir + "/moments.csv"},
                      {"n_valid", est.n_valid},
                      {"truncated_fraction", est.truncated_fraction},
                      {"unreliable", est.unreliable},
                      {"heavy_tailed", est.heavy_tailed}}
                     .dump(2)
              << "\n";
    return est.unreliable ? kInconclusive : kOk;
}

int cmd_fit_decay(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const auto est = sdstab::run_ensemble(cfg.model(), cfg.sim_config(), cfg.ensemble_options());
    double t_lo = est.times.front(), t_hi = est.times.back();
    if (cfg.has("fit")) {
        t_lo = cfg.raw().at("fit").value("t_lo", t_lo);
        t_hi = cfg.raw().at("fit").value("t_hi", t_hi);
    }
    const auto fit = sdstab::fit_decay(est, t_lo, t_hi);
    const std::string dir = cfg.output_dir();
    sdstab::ensure_dir(dir);
    sdstab::write_moments_csv(dir + "/moments.csv", est);
    std::cout << sdstab::decay_to_json(fit).dump(2) << "\n";
    return kOk;
}

int cmd_iss_probe(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const auto levels = cfg.section("probe").at("levels").get<std::vector<double>>();
    const auto table =
        sdstab::iss_gain_probe(cfg.model(), cfg.sim_config(), levels, cfg.ensemble_options());
    const std::string dir = cfg.output_dir();
    sdstab::ensure_dir(dir);
    sdstab::write_probe_csv(dir + "/iss_probe.csv", table);
    std::cout << sdstab::probe_to_json(table).dump(2) << "\n";
    for (const auto& row : table.rows)
        if (!row.settled) return kInconclusive;
    return kOk;
}

sdstab::MonitorMode mode_from_string(const std::string& mode) {
    if (mode == "guas") return sdstab::MonitorMode::guas;
    if (mode == "iss") return sdstab::MonitorMode::iss;
    if (mode == "iiss") return sdstab::MonitorMode::iiss;
    throw std::invalid_argument("monitor mode must be guas, iss or iiss");
}

int cmd_monitor(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const auto est = sdstab::run_ensemble(cfg.model(), cfg.sim_config(), cfg.ensemble_options());
    const json& monitors = cfg.section("monitors");
    json out;
    bool refuted = false;

    if (monitors.contains("razumikhin")) {
        const json& mj = monitors.at("razumikhin");
        sdstab::LyapunovSpec spec(mj.at("coeffs").get<std::vector<double>>());
        sdstab::MonitorOptions opts;
        opts.tau = mj.at("tau").get<double>();
        opts.q = mj.value("q", 1.5);
        opts.stencil = mj.value("stencil", std::size_t{1});
        opts.violation_budget = mj.value("budget", 0.05);
        opts.mode = mode_from_string(mj.value("mode", std::string("guas")));
        opts.varpi_w = mj.value("varpi_w", 0.0);
        opts.varpi_w2 = mj.value("varpi_w2", 0.0);
        if (mj.contains("input")) opts.input = sdstab::signal_from_json(mj.at("input"), "monitor input");
        const auto rep = sdstab::razumikhin_monitor(
            est, spec, sdstab::signal_from_json(mj.at("mu"), "monitor mu"), opts);
        out["razumikhin"] = sdstab::monitor_report_to_json(rep);
        refuted = refuted || rep.verdict == "refuted";
    }
    if (monitors.contains("krasovskii")) {
        const json& mj = monitors.at("krasovskii");
        sdstab::KrasovskiiFunctional functional;
        functional.c0 = mj.value("c0", 1.0);
        functional.tau = mj.at("tau").get<double>();
        if (mj.contains("weight"))
            functional.weight = sdstab::signal_from_json(mj.at("weight"), "krasovskii weight");
        sdstab::MonitorOptions opts;
        opts.tau = functional.tau;
        opts.stencil = mj.value("stencil", std::size_t{1});
        opts.violation_budget = mj.value("budget", 0.05);
        opts.mode = mode_from_string(mj.value("mode", std::string("guas")));
        opts.varpi_w = mj.value("varpi_w", 0.0);
        opts.varpi_w2 = mj.value("varpi_w2", 0.0);
        if (mj.contains("input")) opts.input = sdstab::signal_from_json(mj.at("input"), "monitor input");
        const auto rep = sdstab::krasovskii_monitor(
            est, functional, sdstab::signal_from_json(mj.at("mu"), "monitor mu"), opts);
        out["krasovskii"] = sdstab::monitor_report_to_json(rep);
        refuted = refuted || rep.verdict == "refuted";
    }
    std::cout << out.dump(2) << "\n";
    return refuted ? kRefuted : kOk;
}

int cmd_comparison_oracle(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const json& c = cfg.section("comparison");
    sdstab::ComparisonInstance inst{
        sdstab::signal_from_json(c.at("mu"), "comparison.mu"),
        c.contains("pi") ? sdstab::signal_from_json(c.at("pi"), "comparison.pi")
                         : sdstab::ScalarSignal::constant(0.0),
        c.contains("psi") ? sdstab::signal_from_json(c.at("psi"), "comparison.psi")
                          : sdstab::ScalarSignal::constant(0.0),
        c.at("y0").get<double>(), c.value("t0", 0.0), c.at("t1").get<double>()};
    sdstab::validate_instance(inst);
    const double dt = c.at("dt").get<double>();
    const double T = c.at("T").get<double>();

    const auto traj = sdstab::oracle_trajectory(inst, dt);
    const double phi = sdstab::overshoot(inst.mu, T);
    const double tol = 10.0 * dt;

    const std::string dir = cfg.output_dir();
    sdstab::ensure_dir(dir);
    auto out = sdstab::open_out(dir + "/comparison_oracle.csv");
    out << "t,y,bound,bound_holds\n";
    bool all_hold = true;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        if (t < inst.t0 + T) continue;
        const auto back = static_cast<std::size_t>(std::llround(T / dt));
        const double y_past = traj.values[k - back];
        const double bound = sdstab::razumikhin_bound(inst, T, t, y_past, phi);
        const bool holds = traj.values[k] <= bound + tol;
        all_hold = all_hold && holds;
        out << sdstab::fmt17(t) << ',' << sdstab::fmt17(traj.values[k]) << ','
            << sdstab::fmt17(bound) << ',' << (holds ? 1 : 0) << '\n';
    }
    std::cout << json{{"csv", dir + "/comparison_oracle.csv"}, {"bound_holds", all_hold}}.dump(2)
              << "\n";
    return all_hold ? kOk : kRefuted;
}

int cmd_diagnostics(const GlobalArgs& gargs) {
    auto cfg = load_with_overrides(gargs);
    const json& d = cfg.section("diagnostics");
    const auto diag = sdstab::restrictive_diagnostics(cfg.signal(), d.at("q").get<double>(),
                                                      d.at("tau").get<double>(),
                                                      d.at("horizons").get<std::vector<double>>());
    std::cout << sdstab::diagnostics_to_json(diag).dump(2) << "\n";
    return kOk;
}

int cmd_example1(const sdstab::Example1Options& opts, const GlobalArgs& gargs) {
    sdstab::Example1Options run = opts;
    if (gargs.seed) run.seed = *gargs.seed;
    if (gargs.threads) run.threads = *gargs.threads;
    const auto rep = sdstab::run_example1_experiment(run);
    if (gargs.out_dir) {
        sdstab::ensure_dir(*gargs.out_dir);
        sdstab::write_moments_csv(*gargs.out_dir + "/example1_moments.csv", rep.moments);
        auto out = sdstab::open_out(*gargs.out_dir + "/example1_report.json");
        out << sdstab::example1_report_to_json(rep).dump(2) << "\n";
    }
    std::cout << sdstab::example1_report_to_json(rep).dump(2) << "\n";
    return rep.verdict == "certified" ? kOk : kInconclusive;
}

int cmd_example2(const sdstab::Example2Options& opts, const GlobalArgs& gargs) {
    sdstab::Example2Options run = opts;
    if (gargs.seed) run.seed = *gargs.seed;
    if (gargs.threads) run.threads = *gargs.threads;
    const auto rep = sdstab::run_example2_experiment(run);
    if (gargs.out_dir) {
        sdstab::ensure_dir(*gargs.out_dir);
        sdstab::write_probe_csv(*gargs.out_dir + "/example2_probe.csv", rep.probe);
        auto out = sdstab::open_out(*gargs.out_dir + "/example2_report.json");
        out << sdstab::example2_report_to_json(rep).dump(2) << "\n";
    }
    std::cout << sdstab::example2_report_to_json(rep).dump(2) << "\n";
    return rep.verdict == "consistent-with-iss" ? kOk : kInconclusive;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stability certification and simulation toolkit for switching delay-SDEs"};
    app.require_subcommand(1);

    GlobalArgs gargs;
    int rc = kError;

    auto* check_usf = app.add_subcommand("check-usf", "verify the stable-function inequality");
    add_global_flags(check_usf, gargs);
    check_usf->callback([&]() { rc = cmd_check_usf(gargs); });

    auto* over = app.add_subcommand("overshoot", "windowed overshoot of the rate signal");
    add_global_flags(over, gargs);
    over->callback([&]() { rc = cmd_overshoot(gargs); });

    auto* ucs = app.add_subcommand("ucs", "uniform convergence set membership");
    add_global_flags(ucs, gargs);
    ucs->callback([&]() { rc = cmd_ucs(gargs); });

    auto* gain = app.add_subcommand("gain-check", "history gain condition q >= exp(phi)/rho");
    add_global_flags(gain, gargs);
    gain->callback([&]() { rc = cmd_gain_check(gargs); });

    auto* sim = app.add_subcommand("simulate", "single trajectory to CSV");
    add_global_flags(sim, gargs);
    sim->callback([&]() { rc = cmd_simulate(gargs); });

    auto* mom = app.add_subcommand("moments", "ensemble moment estimate to CSV");
    add_global_flags(mom, gargs);
    mom->callback([&]() { rc = cmd_moments(gargs); });

    auto* fit = app.add_subcommand("fit-decay", "exponential fit of the moment curve");
    add_global_flags(fit, gargs);
    fit->callback([&]() { rc = cmd_fit_decay(gargs); });

    auto* probe = app.add_subcommand("iss-probe", "steady-state moments over input levels");
    add_global_flags(probe, gargs);
    probe->callback([&]() { rc = cmd_iss_probe(gargs); });

    auto* mon = app.add_subcommand("monitor", "expectation-level condition monitors");
    add_global_flags(mon, gargs);
    mon->callback([&]() { rc = cmd_monitor(gargs); });

    auto* comp = app.add_subcommand("comparison-oracle", "oracle trajectory vs comparison bounds");
    add_global_flags(comp, gargs);
    comp->callback([&]() { rc = cmd_comparison_oracle(gargs); });

    auto* diag = app.add_subcommand("diagnostics", "prior-work admissibility diagnostics");
    add_global_flags(diag, gargs);
    diag->callback([&]() { rc = cmd_diagnostics(gargs); });

    sdstab::Example1Options e1;
    auto* ex1 = app.add_subcommand("example1", "square-wave delay example end to end");
    add_global_flags(ex1, gargs);
    ex1->add_option("--c", e1.c, "duty point in (0,1)");
    ex1->add_option("--e", e1.e, "square-wave amplitude");
    ex1->add_option("--n", e1.n, "ensemble size");
    ex1->add_option("--horizon", e1.horizon, "simulation horizon");
    ex1->add_option("--tau", e1.tau, "delay bound");
    ex1->add_option("--dt", e1.dt, "step size");
    ex1->callback([&]() { rc = cmd_example1(e1, gargs); });

    sdstab::Example2Options e2;
    auto* ex2 = app.add_subcommand("example2", "input-driven example end to end");
    add_global_flags(ex2, gargs);
    ex2->add_option("--lambda", e2.lambda, "decay parameter, > 1/(2 pi)");
    ex2->add_option("--l", e2.l, "noise level");
    ex2->add_option("--n", e2.n, "ensemble size per level");
    ex2->add_option("--horizon", e2.horizon, "simulation horizon");
    ex2->add_option("--tau", e2.tau, "delay bound");
    ex2->add_option("--dt", e2.dt, "step size");
    ex2->add_option("--u-levels", e2.u_levels, "constant input levels");
    ex2->callback([&]() { rc = cmd_example2(e2, gargs); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
    return rc;
}
