#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdstab/certify.hpp"
#include "sdstab/comparison.hpp"
#include "sdstab/models.hpp"
#include "sdstab/moments.hpp"
#include "sdstab/sdde.hpp"

namespace sdstab {

using json = nlohmann::json;

namespace detail {

inline void require_keys(const json& j, const std::string& where,
                         const std::set<std::string>& allowed,
                         const std::set<std::string>& required = {}) {
    if (!j.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (allowed.count(key) == 0)
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
    for (const auto& key : required)
        if (!j.contains(key))
            throw std::invalid_argument("config: missing key '" + key + "' in " + where);
}

inline double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw std::invalid_argument("config: " + where + " must be a number");
    return j.get<double>();
}

}  // namespace detail

inline ScalarSignal signal_from_json(const json& j, const std::string& where = "signal") {
    if (!j.is_object() || !j.contains("family"))
        throw std::invalid_argument("config: " + where + " must declare a family");
    const std::string family = j.at("family").get<std::string>();
    if (family == "constant") {
        detail::require_keys(j, where, {"family", "value"}, {"value"});
        return ScalarSignal::constant(detail::number(j.at("value"), where + ".value"));
    }
    if (family == "square_wave") {
        detail::require_keys(j, where, {"family", "low", "high", "duty", "period"},
                             {"low", "high", "duty", "period"});
        return ScalarSignal::square_wave(
            detail::number(j.at("low"), where), detail::number(j.at("high"), where),
            detail::number(j.at("duty"), where), detail::number(j.at("period"), where));
    }
    if (family == "t_cos_t_squared") {
        detail::require_keys(j, where, {"family"});
        return ScalarSignal::t_cos_t_squared();
    }
    if (family == "sin_power") {
        detail::require_keys(j, where, {"family", "k", "scale"}, {"k", "scale"});
        return ScalarSignal::sin_power(j.at("k").get<int>(),
                                       detail::number(j.at("scale"), where + ".scale"));
    }
    if (family == "sampled") {
        detail::require_keys(j, where, {"family", "times", "values"}, {"times", "values"});
        return ScalarSignal::sampled(j.at("times").get<std::vector<double>>(),
                                     j.at("values").get<std::vector<double>>());
    }
    if (family == "affine_sum") {
        detail::require_keys(j, where, {"family", "terms"}, {"terms"});
        std::vector<std::pair<double, ScalarSignal>> terms;
        for (const auto& term : j.at("terms")) {
            detail::require_keys(term, where + ".terms[]", {"coeff", "signal"}, {"coeff", "signal"});
            terms.emplace_back(detail::number(term.at("coeff"), where + ".coeff"),
                               signal_from_json(term.at("signal"), where + ".terms[].signal"));
        }
        return ScalarSignal::affine_sum(std::move(terms));
    }
    throw std::invalid_argument("config: unknown signal family '" + family + "' in " + where);
}

inline SddeModel model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("builtin"))
        throw std::invalid_argument("config: model must declare 'builtin'");
    const std::string name = j.at("builtin").get<std::string>();
    if (name == "example1") {
        detail::require_keys(j, "model", {"builtin", "c", "e", "tau"}, {"c", "e", "tau"});
        return make_example1_model(detail::number(j.at("c"), "model.c"),
                                   detail::number(j.at("e"), "model.e"),
                                   detail::number(j.at("tau"), "model.tau"));
    }
    if (name == "example2") {
        detail::require_keys(j, "model", {"builtin", "lambda", "l", "k", "tau"},
                             {"lambda", "l", "k", "tau"});
        return make_example2_model(
            detail::number(j.at("lambda"), "model.lambda"), detail::number(j.at("l"), "model.l"),
            j.at("k").get<int>(), detail::number(j.at("tau"), "model.tau"));
    }
    if (name == "linear") {
        detail::require_keys(j, "model", {"builtin", "a", "b", "input_gain"}, {"a", "b"});
        return make_linear_model(detail::number(j.at("a"), "model.a"),
                                 detail::number(j.at("b"), "model.b"),
                                 j.value("input_gain", 0.0));
    }
    throw std::invalid_argument("config: unknown builtin model '" + name + "'");
}

/// Validated experiment description. The raw JSON (already key-checked) is
/// retained so serialize/parse round-trips are the identity.
class ExperimentConfig {
  public:
    static ExperimentConfig parse(const json& j) {
        detail::require_keys(j, "config",
                             {"signal", "model", "sim", "ensemble", "usf", "fit", "probe",
                              "monitors", "comparison", "diagnostics", "output", "seed", "threads"});
        ExperimentConfig cfg;
        cfg.raw_ = j;
        // Eagerly validate each present section.
        if (j.contains("signal")) signal_from_json(j.at("signal"));
        if (j.contains("model")) model_from_json(j.at("model"));
        if (j.contains("sim")) {
            detail::require_keys(j.at("sim"), "sim",
                                 {"dt", "t0", "t1", "initial", "input", "initial_regime"},
                                 {"dt", "t1"});
            if (j.at("sim").contains("input")) signal_from_json(j.at("sim").at("input"), "sim.input");
        }
        if (j.contains("ensemble"))
            detail::require_keys(j.at("ensemble"), "ensemble", {"n", "p", "tail_window_frac"}, {"n"});
        if (j.contains("usf"))
            detail::require_keys(j.at("usf"), "usf", {"horizon", "grid_step", "T", "q", "rho"});
        if (j.contains("fit")) detail::require_keys(j.at("fit"), "fit", {"t_lo", "t_hi"});
        if (j.contains("probe")) detail::require_keys(j.at("probe"), "probe", {"levels"}, {"levels"});
        if (j.contains("monitors")) {
            detail::require_keys(j.at("monitors"), "monitors", {"razumikhin", "krasovskii"});
            if (j.at("monitors").contains("razumikhin"))
                detail::require_keys(j.at("monitors").at("razumikhin"), "monitors.razumikhin",
                                     {"coeffs", "mu", "q", "tau", "stencil", "mode", "budget",
                                      "varpi_w", "varpi_w2", "input"},
                                     {"coeffs", "mu", "tau"});
            if (j.at("monitors").contains("krasovskii"))
                detail::require_keys(j.at("monitors").at("krasovskii"), "monitors.krasovskii",
                                     {"c0", "weight", "mu", "tau", "stencil", "mode", "budget",
                                      "varpi_w", "varpi_w2", "input"},
                                     {"mu", "tau"});
        }
        if (j.contains("comparison"))
            detail::require_keys(j.at("comparison"), "comparison",
                                 {"mu", "pi", "psi", "y0", "t0", "t1", "dt", "T"},
                                 {"mu", "y0", "t1", "dt", "T"});
        if (j.contains("diagnostics"))
            detail::require_keys(j.at("diagnostics"), "diagnostics", {"q", "tau", "horizons"},
                                 {"q", "tau", "horizons"});
        if (j.contains("output"))
            detail::require_keys(j.at("output"), "output", {"dir"}, {"dir"});
        return cfg;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
        json j;
        in >> j;
        return parse(j);
    }

    std::string serialize() const { return raw_.dump(2) + "\n"; }
    const json& raw() const { return raw_; }
    bool has(const std::string& key) const { return raw_.contains(key); }

    const json& section(const std::string& key) const {
        if (!raw_.contains(key))
            throw std::invalid_argument("config: section '" + key + "' is required by this command");
        return raw_.at(key);
    }

    ScalarSignal signal() const { return signal_from_json(section("signal")); }
    SddeModel model() const { return model_from_json(section("model")); }

    SimConfig sim_config() const {
        const json& s = section("sim");
        SimConfig cfg;
        cfg.dt = detail::number(s.at("dt"), "sim.dt");
        cfg.t0 = s.value("t0", 0.0);
        cfg.t1 = detail::number(s.at("t1"), "sim.t1");
        cfg.master_seed = seed();
        cfg.initial_regime = s.value("initial_regime", 1) - 1;  // regimes are 1-based in configs
        if (s.contains("initial")) {
            const json& init = s.at("initial");
            if (init.is_number()) {
                cfg.initial.constant = {init.get<double>()};
            } else {
                detail::require_keys(init, "sim.initial", {"times", "values"}, {"times", "values"});
                cfg.initial.sample_times = init.at("times").get<std::vector<double>>();
                for (const auto& v : init.at("values"))
                    cfg.initial.sample_values.push_back({v.get<double>()});
            }
        } else {
            cfg.initial.constant = {1.0};
        }
        if (s.contains("input")) cfg.input = signal_from_json(s.at("input"), "sim.input");
        return cfg;
    }

    EnsembleOptions ensemble_options() const {
        const json& e = section("ensemble");
        EnsembleOptions opts;
        opts.n = e.at("n").get<std::size_t>();
        opts.p = e.value("p", 2.0);
        opts.tail_window_frac = e.value("tail_window_frac", 0.2);
        opts.threads = threads();
        return opts;
    }

    std::uint64_t seed() const { return raw_.value("seed", std::uint64_t{1}); }
    int threads() const { return raw_.value("threads", 0); }
    std::string output_dir() const {
        return raw_.contains("output") ? raw_.at("output").at("dir").get<std::string>() : "out";
    }

  private:
    json raw_;
};

}  // namespace sdstab
