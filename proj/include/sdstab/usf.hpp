#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdstab/signals.hpp"

namespace sdstab {

struct UsfScanOptions {
    double horizon = 100.0;
    double grid_step = 1e-3;
    bool force_numeric = false;  // skip exact shortcuts (cross-check route)
};

/// A rate function mu is "uniformly stable" when int_{t0}^{t} mu <=
/// -epsilon (t - t0) + delta for all t >= t0. The certificate records the
/// greedy pair (largest epsilon the scan supports, then the smallest delta),
/// the chosen window T in the uniform convergence set, and the overshoot
/// phi_mu(T). A numeric certificate is only as strong as its scan: the
/// verified horizon is part of the result.
struct UsfCertificate {
    double epsilon = 0.0;
    double delta = 0.0;
    double window_T = 0.0;
    double overshoot_at_T = 0.0;
    double verified_horizon = 0.0;
    std::string method;  // "closed-form-periodic" | "numeric-scan"
    std::optional<double> period_integral;
};

/// A pair (t0, t1) whose windowed integral outgrows every candidate
/// (epsilon, delta) fitted on the scan.
struct UsfRefutation {
    double t0 = 0.0;
    double t1 = 0.0;
    double window_integral = 0.0;
    double growth_rate = 0.0;
};

enum class UsfStatus { certified, refuted, inconclusive };

struct UsfCheckResult {
    UsfStatus status = UsfStatus::inconclusive;
    std::optional<UsfCertificate> certificate;
    std::optional<UsfRefutation> refutation;
    std::string note;
};

/// phi_mu(T) = sup_t max_{theta in [0, T]} int_t^{t+theta} mu. Exact for
/// periodic piecewise-constant mu via breakpoint enumeration; numeric
/// double-scan with local refinement otherwise.
inline double overshoot(const ScalarSignal& mu, double T, const UsfScanOptions& opts = {});

inline bool ucs_contains(const ScalarSignal& mu, double T, double horizon, double grid_step) {
    return sup_window_integral(mu, T, horizon, grid_step) < -1e-12;
}

namespace detail {

struct CumulativeGrid {
    std::vector<double> t;
    std::vector<double> c;  // c[i] = int_0^{t[i]} mu
};

inline CumulativeGrid cumulative_integral(const ScalarSignal& mu, double span, double step) {
    const std::size_t n = static_cast<std::size_t>(std::ceil(span / step));
    CumulativeGrid g;
    g.t.resize(n + 1);
    g.c.resize(n + 1);
    g.t[0] = 0.0;
    g.c[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        g.t[i] = std::min(i * step, span);
        g.c[i] = g.c[i - 1] + integrate(mu, g.t[i - 1], g.t[i]);
    }
    return g;
}

// Largest growth rate (C_j - C_i)/(t_j - t_i) over pairs at least min_gap
// apart, by parametric feasibility + bisection. Also reports the achieving
// pair.
inline double max_long_window_rate(const CumulativeGrid& g, double min_gap, std::size_t& arg_i,
                                   std::size_t& arg_j) {
    const std::size_t n = g.t.size();
    const double h = g.t[1] - g.t[0];
    const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(min_gap / h)));
    if (m >= n) throw std::invalid_argument("max_long_window_rate: gap exceeds the scan");

    auto best_excess = [&](double r, std::size_t& bi, std::size_t& bj) {
        double best = -std::numeric_limits<double>::infinity();
        double pref_min = std::numeric_limits<double>::infinity();
        std::size_t pref_arg = 0;
        for (std::size_t j = m; j < n; ++j) {
            const std::size_t i = j - m;
            const double gi = g.c[i] - r * g.t[i];
            if (gi < pref_min) {
                pref_min = gi;
                pref_arg = i;
            }
            const double excess = (g.c[j] - r * g.t[j]) - pref_min;
            if (excess > best) {
                best = excess;
                bi = pref_arg;
                bj = j;
            }
        }
        return best;
    };

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < n; ++i) {
        const double r = (g.c[i] - g.c[i - 1]) / (g.t[i] - g.t[i - 1]);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    lo -= 1.0;
    hi += 1.0;
    std::size_t bi = 0, bj = m;
    for (int iter = 0; iter < 80; ++iter) {
        const double r = 0.5 * (lo + hi);
        if (best_excess(r, bi, bj) >= 0.0)
            lo = r;
        else
            hi = r;
    }
    best_excess(lo, arg_i, arg_j);
    return lo;
}

// Smallest delta making int + epsilon*(t - t0) <= delta hold on the grid.
inline double fit_delta(const CumulativeGrid& g, double epsilon, std::size_t limit = 0) {
    const std::size_t n = (limit == 0 || limit > g.t.size()) ? g.t.size() : limit;
    double delta = 0.0;
    double pref_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double gj = g.c[j] + epsilon * g.t[j];
        pref_min = std::min(pref_min, gj);
        delta = std::max(delta, gj - pref_min);
    }
    return delta;
}

}  // namespace detail

inline double overshoot(const ScalarSignal& mu, double T, const UsfScanOptions& opts) {
    if (T < 0.0) throw std::invalid_argument("overshoot: T must be nonnegative");
    if (T == 0.0) return 0.0;

    const auto p = mu.period();
    if (p && *p == 0.0) {
        const double v = mu.eval(0.0);
        return std::max(0.0, v * T);
    }

    if (!opts.force_numeric && p && *p > 0.0 && mu.piecewise_constant()) {
        // max_{s in [t, t+T]} int_t^s mu for piecewise-linear cumulative:
        // both the start and the inner argmax sit on breakpoints (or t+T).
        const double w = *p;
        std::vector<double> starts = mu.breakpoints(-w * 1e-9, w);
        starts.push_back(0.0);
        for (double bp : mu.breakpoints(0.0, w + T)) {
            double shifted = bp - T;
            while (shifted < 0.0) shifted += w;
            while (shifted >= w) shifted -= w;
            starts.push_back(shifted);
        }
        double best = 0.0;
        for (double t0 : starts) {
            if (t0 < 0.0 || t0 >= w) continue;
            std::vector<double> ends = mu.breakpoints(t0, t0 + T);
            ends.push_back(t0 + T);
            for (double s : ends) best = std::max(best, integrate(mu, t0, s));
        }
        return best;
    }

    // Numeric double-scan: cumulative grid, sliding-window maximum, then a
    // local exact refinement of the best (t, s) pair.
    const double scan = (p && *p > 0.0) ? *p : opts.horizon;
    const double h = opts.grid_step;
    auto g = detail::cumulative_integral(mu, scan + T, h);
    const std::size_t n_start = std::min(
        g.t.size(), static_cast<std::size_t>(std::floor(scan / h)) + 1);
    const std::size_t m = static_cast<std::size_t>(std::floor(T / h + 1e-9));

    double best = 0.0;
    std::size_t best_i = 0, best_j = 0;
    std::deque<std::size_t> window;  // indices with decreasing C
    for (std::size_t j = 0; j < g.t.size(); ++j) {
        while (!window.empty() && g.c[window.back()] <= g.c[j]) window.pop_back();
        window.push_back(j);
        if (j < m) continue;
        const std::size_t i = j - m;
        if (i >= n_start) break;
        while (window.front() < i) window.pop_front();
        const double v = g.c[window.front()] - g.c[i];
        if (v > best) {
            best = v;
            best_i = i;
            best_j = window.front();
        }
    }

    // Refine around the grid argmax with exact integrals.
    double t_best = g.t[best_i];
    double s_best = g.t[best_j];
    double radius = h;
    for (int round = 0; round < 3; ++round) {
        const double step = radius / 8.0;
        double local_best = best;
        double lt = t_best, ls = s_best;
        for (double t0 = std::max(0.0, t_best - radius); t0 <= t_best + radius; t0 += step) {
            for (double s = std::max(t0, s_best - radius); s <= std::min(t0 + T, s_best + radius);
                 s += step) {
                const double v = integrate(mu, t0, s);
                if (v > local_best) {
                    local_best = v;
                    lt = t0;
                    ls = s;
                }
            }
        }
        best = local_best;
        t_best = lt;
        s_best = ls;
        radius = step;
    }
    return std::max(best, 0.0);
}

/// Verifies the stable-function inequality on a finite scan. Periodic
/// signals get the exact route (stable iff the one-period integral is
/// negative); otherwise the scan fits the greedy (epsilon, delta) and a
/// certificate is issued only when the long-window growth rate is strictly
/// negative. A positive long-run rate yields a refutation witness; anything
/// in between is reported inconclusive, never falsely certified.
inline UsfCheckResult check_usf(const ScalarSignal& mu, double horizon = 100.0,
                                double grid_step = 1e-3) {
    if (!(horizon > 0.0) || !(grid_step > 0.0))
        throw std::invalid_argument("check_usf: horizon and grid_step must be positive");

    UsfCheckResult result;
    const double strict = 1e-12;
    const auto p = mu.period();

    if (p && *p == 0.0) {  // constant rate
        const double v = mu.eval(0.0);
        if (v < -strict) {
            UsfCertificate cert;
            cert.epsilon = 0.99 * std::fabs(v);
            cert.delta = 0.0;
            cert.window_T = 1.0;
            cert.overshoot_at_T = 0.0;
            cert.verified_horizon = horizon;
            cert.method = "closed-form-periodic";
            result.status = UsfStatus::certified;
            result.certificate = cert;
        } else if (v > strict) {
            result.status = UsfStatus::refuted;
            result.refutation = UsfRefutation{0.0, horizon, v * horizon, v};
            result.note = "constant rate is positive";
        } else {
            result.status = UsfStatus::inconclusive;
            result.note = "constant rate indistinguishable from zero";
        }
        return result;
    }

    if (p && *p > 0.0) {
        const double w = *p;
        const double period_integral = integrate(mu, 0.0, w);
        const double mean_rate = period_integral / w;
        if (mean_rate < -strict) {
            UsfCertificate cert;
            cert.epsilon = 0.99 * (-mean_rate);
            cert.period_integral = period_integral;
            cert.method = "closed-form-periodic";
            // Deviations saturate once the per-period slack (1% of the mass)
            // dominates the largest one-period rise; scan enough periods.
            const double rise = integrate_positive_part(mu, 0.0, w) + cert.epsilon * w;
            const double per_period_drop = 0.01 * (-period_integral);
            const double need = (rise / per_period_drop + 2.0) * w;
            const double span = std::min(horizon, std::max(4.0 * w, std::min(need, 400.0 * w)));
            auto g = detail::cumulative_integral(mu, span, grid_step);
            cert.delta = detail::fit_delta(g, cert.epsilon);
            cert.verified_horizon = span;
            cert.window_T = w;
            cert.overshoot_at_T = std::min(overshoot(mu, w), cert.delta);
            result.status = UsfStatus::certified;
            result.certificate = cert;
        } else if (mean_rate > strict) {
            result.status = UsfStatus::refuted;
            const double k = std::floor(horizon / w);
            result.refutation = UsfRefutation{0.0, k * w, period_integral * k, mean_rate};
            result.note = "one-period integral is positive";
        } else {
            result.status = UsfStatus::inconclusive;
            result.note = "one-period integral indistinguishable from zero";
        }
        return result;
    }

    // Numeric scan.
    auto g = detail::cumulative_integral(mu, horizon, grid_step);
    std::size_t wi = 0, wj = 0;
    const double rate = detail::max_long_window_rate(g, 0.5 * horizon, wi, wj);

    if (rate < -strict) {
        UsfCertificate cert;
        cert.epsilon = 0.99 * (-rate);
        cert.delta = detail::fit_delta(g, cert.epsilon);
        cert.verified_horizon = horizon;
        cert.method = "numeric-scan";
        cert.window_T = 0.0;
        for (double frac : {0.01, 0.02, 0.05, 0.1, 0.25, 0.5}) {
            const double T = frac * horizon;
            if (T <= grid_step) continue;
            if (ucs_contains(mu, T, horizon, grid_step)) {
                cert.window_T = T;
                break;
            }
        }
        if (cert.window_T == 0.0) {
            cert.window_T = 0.5 * horizon;
            result.note = "no scanned window showed a strictly negative integral; T set to horizon/2";
        }
        UsfScanOptions oo;
        oo.horizon = horizon;
        oo.grid_step = grid_step;
        cert.overshoot_at_T = std::min(overshoot(mu, cert.window_T, oo), cert.delta);
        result.status = UsfStatus::certified;
        result.certificate = cert;
        return result;
    }

    if (rate > 1e-9) {
        // Confirm the witness against every candidate pair fitted on the
        // first half of the scan.
        const std::size_t half = g.t.size() / 2;
        bool beats_all = true;
        const double gap = g.t[wj] - g.t[wi];
        const double growth = g.c[wj] - g.c[wi];
        for (int e = -4; e <= 4; ++e) {
            const double eps = rate * std::pow(10.0, e);
            const double delta = detail::fit_delta(g, eps, half);
            if (!(growth > -eps * gap + delta)) {
                beats_all = false;
                break;
            }
        }
        if (beats_all) {
            result.status = UsfStatus::refuted;
            result.refutation = UsfRefutation{g.t[wi], g.t[wj], growth, rate};
            return result;
        }
        result.status = UsfStatus::inconclusive;
        result.note = "positive growth detected but the horizon is too short to confirm";
        return result;
    }

    result.status = UsfStatus::inconclusive;
    result.note = "long-window growth rate within the zero band at this horizon";
    return result;
}

/// Linear Razumikhin gain q(s) = q*s with margin rho, to be checked against
/// the overshoot on the window T.
struct RazumikhinGainParams {
    double q;
    double rho;
    double T;
};

/// True iff q >= exp(phi_mu(T)) / rho. Requires T in the uniform
/// convergence set; the check fails loudly otherwise rather than producing
/// a vacuous verdict.
inline bool check_gain_condition(const RazumikhinGainParams& params, const ScalarSignal& mu,
                                 const UsfScanOptions& opts = {}) {
    if (!(params.q > 0.0)) throw std::invalid_argument("check_gain_condition: q must be positive");
    if (!(params.rho > 0.0 && params.rho < 1.0))
        throw std::invalid_argument("check_gain_condition: rho must lie in (0,1)");
    if (!ucs_contains(mu, params.T, opts.horizon, opts.grid_step))
        throw std::invalid_argument(
            "check_gain_condition: T is not in the uniform convergence set "
            "(sup of the windowed integral is not strictly negative)");
    const double phi = overshoot(mu, params.T, opts);
    return params.q >= std::exp(phi) / params.rho;
}

/// Largest admissible square-wave amplitude for the two-regime delay
/// example: 1 / ((1-c) e^c). Values above 1 on all of (0,1) is exactly the
/// improvement over the classical amplitude bound of 1.
inline double example1_threshold(double c) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("example1_threshold: c must lie in (0,1)");
    return 1.0 / ((1.0 - c) * std::exp(c));
}

}  // namespace sdstab
