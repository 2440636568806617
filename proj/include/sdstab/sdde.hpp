#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdstab/markov.hpp"
#include "sdstab/rng.hpp"
#include "sdstab/signals.hpp"

namespace sdstab {

using StateVec = std::vector<double>;

/// Switching delay-SDE dx = f(t, x, x_delayed, r, u) dt + g(...) dw.
/// Coefficients vanish at (x, y, u) = 0 so the zero solution is preserved.
/// `delay(t, regime)` must map into [0, tau].
struct SddeModel {
    int state_dim = 1;
    int noise_dim = 1;
    double tau = 0.0;
    std::function<void(double, const StateVec&, const StateVec&, int, double, StateVec&)> drift;
    // Row-major state_dim x noise_dim.
    std::function<void(double, const StateVec&, const StateVec&, int, double, std::vector<double>&)>
        diffusion;
    std::function<double(double, int)> delay;
    std::vector<std::vector<double>> generator{{0.0}};
    bool has_input = false;
    std::string name;

    std::size_t regime_count() const { return generator.size(); }
};

/// Ring of (time, state) samples covering at least [t - tau, t], with
/// piecewise-linear interpolation for delayed reads.
class HistoryBuffer {
  public:
    HistoryBuffer(double tau, int dim) : tau_(tau), dim_(dim) {}

    void append(double t, const StateVec& x) {
        if (!times_.empty() && !(t > times_.back()))
            throw std::invalid_argument("HistoryBuffer: times must be strictly increasing");
        times_.push_back(t);
        states_.insert(states_.end(), x.begin(), x.end());
        prune(t);
    }

    void value_at(double t, StateVec& out) const {
        if (times_.empty() || t < times_.front() - 1e-12 || t > times_.back() + 1e-12)
            throw std::domain_error("HistoryBuffer: query outside the covered window");
        out.assign(static_cast<std::size_t>(dim_), 0.0);
        auto it = std::lower_bound(times_.begin() + static_cast<long>(start_), times_.end(), t);
        std::size_t hi = static_cast<std::size_t>(it - times_.begin());
        if (hi >= times_.size()) hi = times_.size() - 1;
        if (hi == start_) {
            for (int d = 0; d < dim_; ++d) out[static_cast<std::size_t>(d)] = state(hi, d);
            return;
        }
        const std::size_t lo = hi - 1;
        const double w = (t - times_[lo]) / (times_[hi] - times_[lo]);
        for (int d = 0; d < dim_; ++d)
            out[static_cast<std::size_t>(d)] = state(lo, d) + w * (state(hi, d) - state(lo, d));
    }

    double newest_time() const { return times_.back(); }

  private:
    double state(std::size_t idx, int d) const {
        return states_[idx * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(d)];
    }

    void prune(double now) {
        // Keep one sample beyond the delay window; compact occasionally.
        while (start_ + 2 < times_.size() && times_[start_ + 1] < now - tau_ - 1e-12) ++start_;
        if (start_ > 4096 && start_ > times_.size() / 2) {
            times_.erase(times_.begin(), times_.begin() + static_cast<long>(start_));
            states_.erase(states_.begin(),
                          states_.begin() + static_cast<long>(start_ * static_cast<std::size_t>(dim_)));
            start_ = 0;
        }
    }

    double tau_;
    int dim_;
    std::size_t start_ = 0;
    std::vector<double> times_;
    std::vector<double> states_;
};

/// Initial segment xi on [t0 - tau, t0]: either a constant state or sampled
/// points with times relative to t0 (so in [-tau, 0]).
struct InitialHistory {
    StateVec constant;
    std::vector<double> sample_times;
    std::vector<StateVec> sample_values;

    bool is_constant() const { return sample_times.empty(); }
};

struct SimConfig {
    double dt = 1e-3;
    double t0 = 0.0;
    double t1 = 1.0;
    InitialHistory initial;
    std::optional<ScalarSignal> input;
    std::uint64_t master_seed = 1;
    int initial_regime = 0;
};

inline void validate_sim_config(const SddeModel& model, const SimConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("sim: dt must be positive");
    if (!(cfg.t1 > cfg.t0)) throw std::invalid_argument("sim: empty time span");
    if (model.tau > 0.0 && cfg.dt > model.tau / 10.0 + 1e-15)
        throw std::invalid_argument("sim: dt must not exceed tau/10 for delayed models");
    if (cfg.initial_regime < 0 ||
        static_cast<std::size_t>(cfg.initial_regime) >= model.regime_count())
        throw std::invalid_argument("sim: initial regime out of range");
}

struct Trajectory {
    std::vector<double> times;
    std::vector<double> states;  // row-major grid x state_dim
    std::vector<int> regimes;    // 0-based
    int state_dim = 1;
    bool truncated = false;
    double truncation_time = std::numeric_limits<double>::quiet_NaN();
    double max_abs = 0.0;
    std::size_t substep_count = 0;

    double state(std::size_t k, int d = 0) const {
        return states[k * static_cast<std::size_t>(state_dim) + static_cast<std::size_t>(d)];
    }

    double norm(std::size_t k) const {
        double s = 0.0;
        for (int d = 0; d < state_dim; ++d) s += state(k, d) * state(k, d);
        return std::sqrt(s);
    }
};

/// Euler-Maruyama with the delayed state read from the history buffer.
/// Every grid step is split at the regime jump times inside it, so each
/// substep integrates under a single regime. Non-finite or overflowing
/// states truncate the trajectory (NaN tail + flag).
inline Trajectory simulate(const SddeModel& model, const SimConfig& cfg, const RegimePath& path,
                           PhiloxRng& rng) {
    validate_sim_config(model, cfg);
    if (path.t_begin > cfg.t0 + 1e-12 || path.t_end < cfg.t1 - 1e-12)
        throw std::invalid_argument("simulate: regime path does not span the sim interval");

    const int n = model.state_dim;
    const int m = model.noise_dim;
    const auto steps = static_cast<std::size_t>(std::llround((cfg.t1 - cfg.t0) / cfg.dt));
    if (steps == 0) throw std::invalid_argument("simulate: span shorter than one step");

    Trajectory traj;
    traj.state_dim = n;
    traj.times.resize(steps + 1);
    traj.states.assign((steps + 1) * static_cast<std::size_t>(n),
                       std::numeric_limits<double>::quiet_NaN());
    traj.regimes.resize(steps + 1);

    HistoryBuffer history(model.tau, n);
    StateVec x;
    if (cfg.initial.is_constant()) {
        x = cfg.initial.constant;
        if (static_cast<int>(x.size()) != n)
            throw std::invalid_argument("simulate: initial state dimension mismatch");
        if (model.tau > 0.0) {
            StateVec x0 = x;
            history.append(cfg.t0 - model.tau, x0);
        }
        history.append(cfg.t0, x);
    } else {
        for (std::size_t i = 0; i < cfg.initial.sample_times.size(); ++i)
            history.append(cfg.t0 + cfg.initial.sample_times[i], cfg.initial.sample_values[i]);
        x = cfg.initial.sample_values.back();
        if (cfg.initial.sample_times.back() < -1e-12 || cfg.initial.sample_times.front() > -model.tau + 1e-12) {
            // History must reach back tau and end at t0.
            throw std::invalid_argument("simulate: initial history must cover [-tau, 0]");
        }
    }

    StateVec delayed(static_cast<std::size_t>(n));
    StateVec f(static_cast<std::size_t>(n));
    std::vector<double> g(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
    std::vector<double> dw(static_cast<std::size_t>(m));

    auto record = [&](std::size_t k, double t) {
        traj.times[k] = t;
        traj.regimes[k] = path.state_at(t);
        for (int d = 0; d < n; ++d)
            traj.states[k * static_cast<std::size_t>(n) + static_cast<std::size_t>(d)] =
                x[static_cast<std::size_t>(d)];
    };
    record(0, cfg.t0);

    // Jump times inside the span, consumed in order.
    std::size_t jump_idx = 0;
    while (jump_idx < path.jump_times.size() && path.jump_times[jump_idx] <= cfg.t0) ++jump_idx;

    bool alive = true;
    for (std::size_t k = 0; k < steps; ++k) {
        const double ta = cfg.t0 + static_cast<double>(k) * cfg.dt;
        const double tb = (k + 1 == steps) ? cfg.t1 : cfg.t0 + static_cast<double>(k + 1) * cfg.dt;
        if (!alive) {
            traj.times[k + 1] = tb;
            traj.regimes[k + 1] = path.state_at(tb);
            continue;
        }
        double sub_a = ta;
        while (sub_a < tb) {
            double sub_b = tb;
            if (jump_idx < path.jump_times.size() && path.jump_times[jump_idx] < tb) {
                sub_b = path.jump_times[jump_idx];
                ++jump_idx;
            }
            const double h = sub_b - sub_a;
            if (h <= 0.0) {
                sub_a = sub_b;
                continue;
            }
            const int regime = path.state_at(sub_a);
            double d = model.delay ? model.delay(sub_a, regime) : model.tau;
            d = std::clamp(d, 0.0, model.tau);
            history.value_at(sub_a - d, delayed);
            const double u = cfg.input ? cfg.input->eval(sub_a) : 0.0;

            model.drift(sub_a, x, delayed, regime, u, f);
            model.diffusion(sub_a, x, delayed, regime, u, g);
            const double sqrt_h = std::sqrt(h);
            for (int j = 0; j < m; ++j) dw[static_cast<std::size_t>(j)] = sqrt_h * rng.normal();
            double abs2 = 0.0;
            for (int i = 0; i < n; ++i) {
                double dx = f[static_cast<std::size_t>(i)] * h;
                for (int j = 0; j < m; ++j)
                    dx += g[static_cast<std::size_t>(i * m + j)] * dw[static_cast<std::size_t>(j)];
                x[static_cast<std::size_t>(i)] += dx;
                abs2 += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
            }
            ++traj.substep_count;
            if (!std::isfinite(abs2) || abs2 > 1e300) {
                traj.truncated = true;
                traj.truncation_time = sub_b;
                alive = false;
                break;
            }
            traj.max_abs = std::max(traj.max_abs, std::sqrt(abs2));
            history.append(sub_b, x);
            sub_a = sub_b;
        }
        if (alive) {
            record(k + 1, tb);
        } else {
            traj.times[k + 1] = tb;
            traj.regimes[k + 1] = path.state_at(tb);
        }
    }
    return traj;
}

}  // namespace sdstab
