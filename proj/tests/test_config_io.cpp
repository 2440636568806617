#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "sdstab/config.hpp"
#include "sdstab/io.hpp"

using namespace sdstab;

namespace {

json full_config() {
    return json::parse(R"({
      "signal": {"family": "affine_sum", "terms": [
        {"coeff": 1.0, "signal": {"family": "constant", "value": -1.0}},
        {"coeff": 1.2, "signal": {"family": "square_wave", "low": 0.0, "high": 2.0, "duty": 0.9, "period": 1.0}}
      ]},
      "model": {"builtin": "example1", "c": 0.9, "e": 2.0, "tau": 0.5},
      "sim": {"dt": 0.001, "t0": 0.0, "t1": 2.0, "initial": 1.0, "initial_regime": 1},
      "ensemble": {"n": 64, "p": 2.0},
      "usf": {"horizon": 50.0, "grid_step": 0.001, "T": 1.0, "q": 1.2, "rho": 0.999},
      "output": {"dir": "out"},
      "seed": 42,
      "threads": 1
    })");
}

}  // namespace

TEST_CASE("config round-trip is the identity", "[config]") {
    auto cfg = ExperimentConfig::parse(full_config());
    auto again = ExperimentConfig::parse(json::parse(cfg.serialize()));
    CHECK(cfg.raw() == again.raw());
    CHECK(cfg.serialize() == again.serialize());
}

TEST_CASE("unknown keys are rejected at every level", "[config]") {
    auto top = full_config();
    top["surprise"] = 1;
    CHECK_THROWS_WITH(ExperimentConfig::parse(top), Catch::Matchers::ContainsSubstring("surprise"));

    auto nested = full_config();
    nested["sim"]["step"] = 0.1;
    CHECK_THROWS_WITH(ExperimentConfig::parse(nested), Catch::Matchers::ContainsSubstring("step"));

    auto sig = full_config();
    sig["signal"]["terms"][0]["signal"]["amplitude"] = 2.0;
    CHECK_THROWS_AS(ExperimentConfig::parse(sig), std::invalid_argument);
}

TEST_CASE("signals parse by family", "[config]") {
    auto mu = signal_from_json(full_config().at("signal"));
    CHECK(mu.eval(0.95) == Catch::Approx(1.4));
    CHECK(mu.eval(0.2) == Catch::Approx(-1.0));

    CHECK_THROWS_AS(signal_from_json(json::parse(R"({"family": "mystery"})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(signal_from_json(json::parse(R"({"family": "constant"})")),
                    std::invalid_argument);

    auto sampled = signal_from_json(
        json::parse(R"({"family": "sampled", "times": [0, 1], "values": [0, 5]})"));
    CHECK(sampled.eval(0.5) == Catch::Approx(2.5));
}

TEST_CASE("model and sim sections materialize", "[config]") {
    auto cfg = ExperimentConfig::parse(full_config());
    auto model = cfg.model();
    CHECK(model.tau == 0.5);
    CHECK(model.regime_count() == 2);
    auto sim = cfg.sim_config();
    CHECK(sim.dt == 0.001);
    CHECK(sim.master_seed == 42);
    CHECK(sim.initial_regime == 0);  // 1-based in config
    auto ens = cfg.ensemble_options();
    CHECK(ens.n == 64);
    CHECK(ens.threads == 1);
}

TEST_CASE("csv values round-trip at full precision", "[io]") {
    const double value = 0.1234567890123456789;
    const std::string s = fmt17(value);
    CHECK(std::stod(s) == value);
    CHECK(fmt17(1.0) == "1");
}

TEST_CASE("trajectory and moments CSV layout", "[io]") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "sdstab_io_test";
    fs::create_directories(dir);

    Trajectory traj;
    traj.state_dim = 1;
    traj.times = {0.0, 0.5};
    traj.states = {1.0, 2.0};
    traj.regimes = {0, 1};
    write_trajectory_csv((dir / "traj.csv").string(), traj);
    std::ifstream in(dir / "traj.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,x1,regime");
    std::getline(in, line);
    CHECK(line == "0,1,1");
    std::getline(in, line);
    CHECK(line == "0.5,2,2");
    fs::remove_all(dir);
}
