#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "sdstab/certify.hpp"
#include "sdstab/experiments.hpp"
#include "sdstab/markov.hpp"
#include "sdstab/moments.hpp"
#include "sdstab/sdde.hpp"
#include "sdstab/usf.hpp"

namespace sdstab {

/// Full round-trip decimal formatting (17 significant digits) so emitted
/// CSV re-parses to the identical double.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "'");
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    auto out = open_out(path);
    out << "t";
    for (int d = 1; d <= traj.state_dim; ++d) out << ",x" << d;
    out << ",regime\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << fmt17(traj.times[k]);
        for (int d = 0; d < traj.state_dim; ++d) out << ',' << fmt17(traj.state(k, d));
        out << ',' << traj.regimes[k] + 1 << '\n';
    }
}

inline void write_regime_path_csv(const std::string& path, const RegimePath& rp) {
    auto out = open_out(path);
    out << "t_jump,state\n";
    out << fmt17(rp.t_begin) << ',' << rp.states.front() + 1 << '\n';
    for (std::size_t k = 0; k < rp.jump_times.size(); ++k)
        out << fmt17(rp.jump_times[k]) << ',' << rp.states[k + 1] + 1 << '\n';
}

inline void write_moments_csv(const std::string& path, const MomentEstimate& est) {
    auto out = open_out(path);
    out << "t,moment,ci_half,N,p\n";
    for (std::size_t k = 0; k < est.times.size(); ++k) {
        out << fmt17(est.times[k]) << ',' << fmt17(est.mean[k]) << ',' << fmt17(est.ci_half[k])
            << ',' << est.n_valid << ',' << fmt17(est.p) << '\n';
    }
}

inline void write_probe_csv(const std::string& path, const ProbeTable& table) {
    auto out = open_out(path);
    out << "u_level,steady_moment,ci_half,settled,unreliable,trend_z\n";
    for (const auto& row : table.rows) {
        out << fmt17(row.level) << ',' << fmt17(row.steady_moment) << ',' << fmt17(row.ci_half)
            << ',' << (row.settled ? 1 : 0) << ',' << (row.unreliable ? 1 : 0) << ','
            << fmt17(row.trend_z) << '\n';
    }
}

inline nlohmann::json usf_result_to_json(const UsfCheckResult& result) {
    nlohmann::json j;
    switch (result.status) {
        case UsfStatus::certified: j["status"] = "certified"; break;
        case UsfStatus::refuted: j["status"] = "refuted"; break;
        case UsfStatus::inconclusive: j["status"] = "inconclusive"; break;
    }
    if (!result.note.empty()) j["note"] = result.note;
    if (result.certificate) {
        const auto& c = *result.certificate;
        j["certificate"] = {{"epsilon", c.epsilon},
                            {"delta", c.delta},
                            {"T", c.window_T},
                            {"overshoot", c.overshoot_at_T},
                            {"horizon", c.verified_horizon},
                            {"method", c.method}};
        if (c.period_integral) j["certificate"]["period_integral"] = *c.period_integral;
    }
    if (result.refutation) {
        const auto& w = *result.refutation;
        j["witness"] = {{"t0", w.t0},
                        {"t1", w.t1},
                        {"window_integral", w.window_integral},
                        {"growth_rate", w.growth_rate}};
    }
    return j;
}

inline nlohmann::json monitor_report_to_json(const MonitorReport& rep) {
    return {{"premise_active_count", rep.premise_count},
            {"violations", rep.violation_count},
            {"violation_fraction", rep.violation_fraction},
            {"worst_violation", rep.worst_violation},
            {"violation_q50", rep.violation_q50},
            {"violation_q90", rep.violation_q90},
            {"budget", rep.budget},
            {"verdict", rep.verdict}};
}

inline nlohmann::json decay_to_json(const DecayFit& fit) {
    return {{"alpha", fit.alpha},
            {"alpha_ci_half", fit.alpha_ci_half},
            {"beta", fit.beta},
            {"r_squared", fit.r_squared},
            {"window", {fit.window_lo, fit.window_hi}}};
}

inline nlohmann::json probe_to_json(const ProbeTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows)
        rows.push_back({{"u", row.level},
                        {"steady_moment", row.steady_moment},
                        {"ci_half", row.ci_half},
                        {"settled", row.settled},
                        {"unreliable", row.unreliable},
                        {"trend_z", row.trend_z}});
    return rows;
}

inline nlohmann::json diagnostics_to_json(const RestrictiveDiagnostics& diag) {
    return {{"horizons", diag.horizons},
            {"positive_mass", diag.positive_mass},
            {"finite_mass_plausible", diag.finite_mass_plausible},
            {"mu_min_scanned", diag.mu_min_scanned},
            {"floor_threshold", diag.floor_threshold},
            {"floor_satisfied", diag.floor_satisfied}};
}

inline nlohmann::json example1_report_to_json(const Example1Report& rep) {
    nlohmann::json j{{"c", rep.c},
                     {"e", rep.e},
                     {"threshold", rep.threshold},
                     {"classical_amplitude_ok", rep.classical_ok},
                     {"amplitude_ok", rep.amplitude_ok},
                     {"gain_ok", rep.gain_ok},
                     {"rho", rep.rho},
                     {"phi_window", rep.phi_window},
                     {"usf", usf_result_to_json(rep.usf)},
                     {"n", rep.n},
                     {"tau", rep.tau},
                     {"dt", rep.dt},
                     {"horizon", rep.horizon},
                     {"seed", rep.seed},
                     {"decay_observed", rep.decay_observed},
                     {"verdict", rep.verdict}};
    if (rep.q_used) j["q_used"] = *rep.q_used;
    if (rep.decay) j["decay"] = decay_to_json(*rep.decay);
    j["moments_unreliable"] = rep.moments.unreliable;
    return j;
}

inline nlohmann::json example2_report_to_json(const Example2Report& rep) {
    nlohmann::json j{{"lambda", rep.lambda},
                     {"l", rep.l},
                     {"q", rep.q},
                     {"k_used", rep.k_used},
                     {"k_escalated", rep.k_escalated},
                     {"ucs_2pi", rep.ucs_2pi},
                     {"sup_window_2pi", rep.sup_window_2pi},
                     {"phi_2pi", rep.phi_2pi},
                     {"gain_ok", rep.gain_ok},
                     {"usf", usf_result_to_json(rep.usf)},
                     {"probe", probe_to_json(rep.probe)},
                     {"diagnostics", diagnostics_to_json(rep.diagnostics)},
                     {"verdict", rep.verdict}};
    if (rep.k_condition_minimal) j["k_condition_minimal"] = *rep.k_condition_minimal;
    return j;
}

}  // namespace sdstab
