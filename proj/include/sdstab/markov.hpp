#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdstab/rng.hpp"

namespace sdstab {

struct GeneratorViolation {
    std::size_t row;
    std::size_t col;
    std::string what;
    double value;
};

/// Checks the transition-rate matrix: off-diagonal entries nonnegative,
/// rows summing to zero (within 1e-12 scaled).
inline std::vector<GeneratorViolation> validate_generator(
    const std::vector<std::vector<double>>& gamma) {
    std::vector<GeneratorViolation> out;
    const std::size_t n = gamma.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (gamma[i].size() != n) {
            out.push_back({i, 0, "row length differs from matrix order", 0.0});
            continue;
        }
        double row_sum = 0.0;
        double row_scale = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            row_sum += gamma[i][j];
            row_scale = std::max(row_scale, std::fabs(gamma[i][j]));
            if (i != j && gamma[i][j] < 0.0)
                out.push_back({i, j, "negative off-diagonal rate", gamma[i][j]});
        }
        if (std::fabs(row_sum) > 1e-12 * row_scale)
            out.push_back({i, i, "row sum differs from zero", row_sum});
    }
    return out;
}

/// Validated CTMC generator. Regime indices are 0-based in code; CSV output
/// uses the 1-based convention.
class RegimeGenerator {
  public:
    explicit RegimeGenerator(std::vector<std::vector<double>> gamma) : gamma_(std::move(gamma)) {
        auto violations = validate_generator(gamma_);
        if (!violations.empty()) {
            std::string msg = "invalid generator:";
            for (const auto& v : violations)
                msg += " [" + std::to_string(v.row) + "," + std::to_string(v.col) + "] " + v.what + ";";
            throw std::invalid_argument(msg);
        }
    }

    std::size_t size() const { return gamma_.size(); }
    double rate(std::size_t i, std::size_t j) const { return gamma_[i][j]; }
    double exit_rate(std::size_t i) const { return -gamma_[i][i]; }
    const std::vector<std::vector<double>>& matrix() const { return gamma_; }

  private:
    std::vector<std::vector<double>> gamma_;
};

/// Right-continuous step path: state `states[k]` holds on
/// [jump_times[k-1], jump_times[k]), with jump_times[-1] meaning t_begin.
struct RegimePath {
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<double> jump_times;  // strictly increasing, inside (t_begin, t_end)
    std::vector<int> states;         // one more entry than jump_times

    int state_at(double t) const {
        auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
        return states[static_cast<std::size_t>(it - jump_times.begin())];
    }

    std::size_t jump_count() const { return jump_times.size(); }

    std::vector<double> occupation_fractions(std::size_t n_states) const {
        std::vector<double> time_in(n_states, 0.0);
        double prev = t_begin;
        for (std::size_t k = 0; k < jump_times.size(); ++k) {
            time_in[static_cast<std::size_t>(states[k])] += jump_times[k] - prev;
            prev = jump_times[k];
        }
        time_in[static_cast<std::size_t>(states.back())] += t_end - prev;
        const double span = t_end - t_begin;
        for (double& v : time_in) v /= span;
        return time_in;
    }
};

/// Samples a path on [t0, t1]; holding time in state i is Exponential with
/// rate -gamma_ii drawn by inverse CDF (no per-step discretization bias),
/// next state proportional to the off-diagonal rates. States with zero exit
/// rate are absorbing.
inline RegimePath sample_path(const RegimeGenerator& gen, double t0, double t1,
                              int initial_state, PhiloxRng& rng) {
    if (!(t1 > t0)) throw std::invalid_argument("sample_path: needs t1 > t0");
    if (initial_state < 0 || static_cast<std::size_t>(initial_state) >= gen.size())
        throw std::invalid_argument("sample_path: initial state out of range");

    RegimePath path;
    path.t_begin = t0;
    path.t_end = t1;
    path.states.push_back(initial_state);

    double t = t0;
    int state = initial_state;
    while (true) {
        const double rate = gen.exit_rate(static_cast<std::size_t>(state));
        if (rate <= 0.0) break;  // absorbing
        t += rng.exponential(rate);
        if (t >= t1) break;
        double u = rng.uniform() * rate;
        int next = state;
        for (std::size_t j = 0; j < gen.size(); ++j) {
            if (static_cast<int>(j) == state) continue;
            u -= gen.rate(static_cast<std::size_t>(state), j);
            if (u <= 0.0) {
                next = static_cast<int>(j);
                break;
            }
        }
        if (next == state) {  // numerical leftovers; take the last admissible state
            for (std::size_t j = gen.size(); j-- > 0;) {
                if (static_cast<int>(j) != state && gen.rate(static_cast<std::size_t>(state), j) > 0.0) {
                    next = static_cast<int>(j);
                    break;
                }
            }
        }
        path.jump_times.push_back(t);
        path.states.push_back(next);
        state = next;
    }
    return path;
}

/// Solves pi * Gamma = 0 with sum(pi) = 1 by Gaussian elimination, the
/// normalization replacing one equation. Throws on rank deficiency
/// (reducible chains have no unique stationary law).
inline std::vector<double> stationary_distribution(const RegimeGenerator& gen) {
    const std::size_t n = gen.size();
    // A = Gamma^T with row 0 replaced by ones; b = e_0.
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    std::vector<double> b(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) a[0][j] = 1.0;
    b[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = gen.rate(j, i);

    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::fabs(v));

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-12 * scale)
            throw std::runtime_error(
                "stationary_distribution: rank-deficient system (generator reducible or singular)");
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> pi(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        for (std::size_t j = i + 1; j < n; ++j) v -= a[i][j] * pi[j];
        pi[i] = v / a[i][i];
    }
    double total = 0.0;
    for (double& v : pi) {
        v = std::max(v, 0.0);
        total += v;
    }
    for (double& v : pi) v /= total;
    return pi;
}

}  // namespace sdstab
