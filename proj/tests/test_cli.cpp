// End-to-end runs of the command-line binary. The test runner passes the
// binary path via SDSTAB_BIN.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string binary_path() {
    const char* bin = std::getenv("SDSTAB_BIN");
    REQUIRE(bin != nullptr);
    return bin;
}

int run(const std::string& args, const std::string& stdout_file) {
    const std::string cmd = binary_path() + " " + args + " > " + stdout_file + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sdstab_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("usage errors exit with code 1", "[cli]") {
    TempDir tmp;
    CHECK(run("", (tmp.path / "out.txt").string()) == 1);
    CHECK(run("check-usf", (tmp.path / "out2.txt").string()) == 1);  // missing --config
}

TEST_CASE("stable-function check exit codes", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "neg.json",
               R"({"signal": {"family": "constant", "value": -1.0},
                   "usf": {"horizon": 20.0, "grid_step": 0.01}})");
    const int certified = run("check-usf --config " + (tmp.path / "neg.json").string(),
                              (tmp.path / "o1.txt").string());
    CHECK(certified == 0);
    CHECK(slurp(tmp.path / "o1.txt").find("certified") != std::string::npos);

    write_file(tmp.path / "pos.json",
               R"({"signal": {"family": "constant", "value": 0.1},
                   "usf": {"horizon": 20.0, "grid_step": 0.01}})");
    CHECK(run("check-usf --config " + (tmp.path / "pos.json").string(),
              (tmp.path / "o2.txt").string()) == 2);
}

TEST_CASE("ucs and gain-check wrap the library", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "mu.json",
               R"({"signal": {"family": "affine_sum", "terms": [
                     {"coeff": 1.0, "signal": {"family": "constant", "value": -1.0}},
                     {"coeff": 1.2, "signal": {"family": "square_wave",
                        "low": 0.0, "high": 2.0, "duty": 0.9, "period": 1.0}}]},
                   "usf": {"horizon": 30.0, "grid_step": 0.001, "T": 1.0,
                           "q": 1.2, "rho": 0.999}})");
    CHECK(run("ucs --config " + (tmp.path / "mu.json").string(), (tmp.path / "u.txt").string()) ==
          0);
    CHECK(run("gain-check --config " + (tmp.path / "mu.json").string(),
              (tmp.path / "g.txt").string()) == 0);
    CHECK(slurp(tmp.path / "g.txt").find("\"ok\": true") != std::string::npos);

    const int phi = run("overshoot --config " + (tmp.path / "mu.json").string(),
                        (tmp.path / "p.txt").string());
    CHECK(phi == 0);
    CHECK(slurp(tmp.path / "p.txt").find("\"overshoot\": 0.139999") != std::string::npos);
}

TEST_CASE("moments runs are deterministic byte for byte", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "gbm.json",
               R"({"model": {"builtin": "linear", "a": -0.5, "b": 0.3},
                   "sim": {"dt": 0.01, "t1": 1.0, "initial": 1.0},
                   "ensemble": {"n": 200},
                   "seed": 9,
                   "threads": 2})");
    const std::string cfg = (tmp.path / "gbm.json").string();
    CHECK(run("moments --config " + cfg + " --out " + (tmp.path / "a").string(),
              (tmp.path / "m1.txt").string()) == 0);
    CHECK(run("moments --config " + cfg + " --out " + (tmp.path / "b").string() + " --threads 1",
              (tmp.path / "m2.txt").string()) == 0);
    CHECK(slurp(tmp.path / "a" / "moments.csv") == slurp(tmp.path / "b" / "moments.csv"));

    // A different seed changes the bytes.
    CHECK(run("moments --config " + cfg + " --out " + (tmp.path / "c").string() + " --seed 10",
              (tmp.path / "m3.txt").string()) == 0);
    CHECK(slurp(tmp.path / "a" / "moments.csv") != slurp(tmp.path / "c" / "moments.csv"));
}

TEST_CASE("simulate writes trajectory and regime path", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "sim.json",
               R"({"model": {"builtin": "example1", "c": 0.9, "e": 2.0, "tau": 0.5},
                   "sim": {"dt": 0.01, "t1": 2.0, "initial": 1.0},
                   "seed": 3})");
    CHECK(run("simulate --config " + (tmp.path / "sim.json").string() + " --out " +
                  (tmp.path / "sim_out").string(),
              (tmp.path / "s.txt").string()) == 0);
    const std::string traj = slurp(tmp.path / "sim_out" / "trajectory.csv");
    CHECK(traj.rfind("t,x1,regime", 0) == 0);
    CHECK(slurp(tmp.path / "sim_out" / "regime_path.csv").rfind("t_jump,state", 0) == 0);
}

TEST_CASE("comparison oracle command reports bound compliance", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "cmp.json",
               R"({"comparison": {
                     "mu": {"family": "square_wave", "low": -2.0, "high": 1.0, "duty": 0.7, "period": 1.0},
                     "pi": {"family": "constant", "value": 0.2},
                     "psi": {"family": "constant", "value": 0.1},
                     "y0": 1.0, "t0": 0.0, "t1": 3.0, "dt": 0.002, "T": 0.5}})");
    CHECK(run("comparison-oracle --config " + (tmp.path / "cmp.json").string() + " --out " +
                  (tmp.path / "cmp_out").string(),
              (tmp.path / "c.txt").string()) == 0);
    CHECK(slurp(tmp.path / "c.txt").find("\"bound_holds\": true") != std::string::npos);
}

TEST_CASE("diagnostics command emits the mass table", "[cli]") {
    TempDir tmp;
    write_file(tmp.path / "diag.json",
               R"({"signal": {"family": "affine_sum", "terms": [
                     {"coeff": 1.0, "signal": {"family": "constant", "value": -1.0}},
                     {"coeff": 1.2, "signal": {"family": "square_wave",
                        "low": 0.0, "high": 2.0, "duty": 0.9, "period": 1.0}}]},
                   "diagnostics": {"q": 1.2, "tau": 0.5, "horizons": [10.0, 20.0]}})");
    CHECK(run("diagnostics --config " + (tmp.path / "diag.json").string(),
              (tmp.path / "d.txt").string()) == 0);
    CHECK(slurp(tmp.path / "d.txt").find("positive_mass") != std::string::npos);
}

TEST_CASE("example1 command verdicts", "[cli]") {
    TempDir tmp;
    // Certified quickly at a small ensemble.
    CHECK(run("example1 --c 0.9 --e 2.0 --n 48 --horizon 2.0 --dt 0.005 --tau 0.5",
              (tmp.path / "e1.txt").string()) == 0);
    // Amplitude above the threshold: no certificate, exit 3.
    CHECK(run("example1 --c 0.5 --e 3.0 --n 48 --horizon 2.0 --dt 0.005 --tau 0.5",
              (tmp.path / "e2.txt").string()) == 3);
    CHECK(slurp(tmp.path / "e2.txt").find("not-certified") != std::string::npos);
}
