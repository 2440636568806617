#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdstab/comparison.hpp"
#include "sdstab/models.hpp"
#include "sdstab/moments.hpp"
#include "sdstab/signals.hpp"
#include "sdstab/usf.hpp"

namespace sdstab {

/// Per-regime quadratic Lyapunov function V(t, x, i) = c_i x^2 for scalar
/// systems, with the sandwich bounds beta1 s <= V <= beta2 s on s = |x|^2.
struct LyapunovSpec {
    std::vector<double> coeffs;

    explicit LyapunovSpec(std::vector<double> c) : coeffs(std::move(c)) {
        if (coeffs.empty()) throw std::invalid_argument("LyapunovSpec: needs at least one regime");
        for (double v : coeffs)
            if (!(v > 0.0)) throw std::invalid_argument("LyapunovSpec: coefficients must be positive");
    }

    double min_coeff() const { return *std::min_element(coeffs.begin(), coeffs.end()); }
    double max_coeff() const { return *std::max_element(coeffs.begin(), coeffs.end()); }
};

/// Generator of the quadratic form along a scalar switching SDE:
/// 2 c_i x f + c_i g^2 + x^2 sum_j gamma_ij c_j.
inline double lv_quadratic_scalar(double x, double f, double g, int regime,
                                  const LyapunovSpec& spec,
                                  const std::vector<std::vector<double>>& generator) {
    const auto i = static_cast<std::size_t>(regime);
    double coupling = 0.0;
    for (std::size_t j = 0; j < spec.coeffs.size(); ++j)
        coupling += generator[i][j] * spec.coeffs[j];
    return 2.0 * spec.coeffs[i] * x * f + spec.coeffs[i] * g * g + x * x * coupling;
}

struct Example1Params {
    double c;
    double e;
};

/// Drift/diffusion envelope of the quadratic form for the square-wave
/// example: -x^2 + |b(t)| y^2 (y the delayed state).
inline double example1_lv_bound(const Example1Params& params, double t, double x, double y) {
    const double b = example1_gain_signal(params.c, params.e).eval(t);
    return -x * x + std::fabs(b) * y * y;
}

/// Rate function -1 + q |b(t)| obtained from the envelope once the history
/// comparison with linear gain q is in force.
inline ScalarSignal example1_rate_signal(double q, double c, double e) {
    return ScalarSignal::affine_sum(
        {{1.0, ScalarSignal::constant(-1.0)}, {q, example1_gain_signal(c, e)}});
}

/// Rate function t cos t^2 - lambda + q l sin^{2k} t for the input-driven
/// example.
inline ScalarSignal example2_rate_signal(double lambda, double l, int k, double q) {
    return ScalarSignal::affine_sum({{1.0, ScalarSignal::t_cos_t_squared()},
                                     {1.0, ScalarSignal::constant(-lambda)},
                                     {q * l, ScalarSignal::sin_power(k, 1.0)}});
}

enum class MonitorMode { guas, iss, iiss };

struct MonitorOptions {
    double tau = 0.0;
    std::size_t stencil = 1;      // half-width of the two-point window, in grid steps
    double q = 1.5;               // linear history gain for the premise
    MonitorMode mode = MonitorMode::guas;
    std::optional<ScalarSignal> input;  // |u(t)| for the ISS/iISS variants
    double varpi_w = 0.0;         // linear gain of the input premise/source
    double varpi_w2 = 0.0;        // source gain for the iISS conclusion
    double ci_slack_mult = 2.0;
    double base_tol = 1e-9;
    double violation_budget = 0.05;
};

/// One monitored pass over a moment grid: where was the history premise
/// active, and did the expected Lyapunov value violate its rate bound.
struct MonitorReport {
    std::vector<double> times;
    std::vector<char> premise_active;
    std::vector<char> violated;
    std::vector<double> residuals;  // positive where violated, scaled by EV
    std::size_t premise_count = 0;
    std::size_t violation_count = 0;
    double violation_fraction = 0.0;
    double worst_violation = 0.0;
    double violation_q50 = 0.0;
    double violation_q90 = 0.0;
    double budget = 0.05;
    std::string verdict;  // "consistent-with" | "refuted" (never "proved")
};

namespace detail {

inline void finalize_report(MonitorReport& rep, double budget) {
    rep.budget = budget;
    rep.violation_fraction = rep.premise_count == 0
                                 ? 0.0
                                 : static_cast<double>(rep.violation_count) /
                                       static_cast<double>(rep.premise_count);
    std::vector<double> mags;
    for (std::size_t i = 0; i < rep.violated.size(); ++i)
        if (rep.violated[i]) mags.push_back(rep.residuals[i]);
    if (!mags.empty()) {
        std::sort(mags.begin(), mags.end());
        rep.worst_violation = mags.back();
        rep.violation_q50 = mags[mags.size() / 2];
        rep.violation_q90 = mags[(mags.size() * 9) / 10];
    }
    rep.verdict = rep.violation_fraction <= budget ? "consistent-with" : "refuted";
}

}  // namespace detail

/// History-comparison (Razumikhin) monitor over an ensemble moment grid.
/// Premise at t: min_j c_j m(t+theta) <= q max_i c_i m(t) for every sampled
/// theta in [-tau, 0] (plus max_i c_i m(t) >= w |u(t)| in ISS mode). Where
/// active, the rate bound is checked in integrated two-point form
///   EV(t+D) <= EV(t-D) exp(int mu) (+ input source for iISS),
/// which is exact on exponential data and insensitive to jumps of mu inside
/// the stencil. Slack: base_tol plus ci_slack_mult times the CI widths.
inline MonitorReport razumikhin_monitor(const MomentEstimate& est, const LyapunovSpec& spec,
                                        const ScalarSignal& mu, const MonitorOptions& opts) {
    const std::size_t grid = est.times.size();
    if (grid < 3) throw std::invalid_argument("razumikhin_monitor: moment grid too short");
    const double h = est.times[1] - est.times[0];
    const auto lookback = static_cast<std::size_t>(std::llround(std::ceil(opts.tau / h - 1e-9)));
    if (lookback + 1 > grid)
        throw std::invalid_argument("razumikhin_monitor: grid lookback shorter than tau");
    const std::size_t stencil = std::max<std::size_t>(1, opts.stencil);

    const double c_min = spec.min_coeff();
    const double c_max = spec.max_coeff();

    MonitorReport rep;
    const std::size_t first = std::max<std::size_t>(lookback, stencil);
    if (first + stencil >= grid)
        throw std::invalid_argument("razumikhin_monitor: stencil does not fit the grid");

    for (std::size_t k = first; k + stencil < grid; ++k) {
        const double t = est.times[k];
        bool premise = true;
        for (std::size_t j = 0; j <= lookback && premise; ++j)
            premise = c_min * est.mean[k - j] <= opts.q * c_max * est.mean[k] + 1e-300;
        if (premise && opts.mode == MonitorMode::iss) {
            const double u = opts.input ? std::fabs(opts.input->eval(t)) : 0.0;
            premise = c_max * est.mean[k] >= opts.varpi_w * u;
        }
        rep.times.push_back(t);
        rep.premise_active.push_back(premise ? 1 : 0);
        if (!premise) {
            rep.violated.push_back(0);
            rep.residuals.push_back(0.0);
            continue;
        }
        ++rep.premise_count;

        const std::size_t lo = k - stencil;
        const std::size_t hi = k + stencil;
        const double growth = std::exp(integrate(mu, est.times[lo], est.times[hi]));
        double predicted = est.mean[lo] * growth;
        if (opts.mode == MonitorMode::iiss && opts.input && opts.varpi_w2 > 0.0) {
            // d EV <= (w1 |u| + mu) EV + w2 |u|: Gronwall form of the bound.
            ComparisonInstance inst{
                ScalarSignal::affine_sum({{1.0, mu}, {opts.varpi_w, *opts.input}}),
                ScalarSignal::affine_sum({{opts.varpi_w2 / c_max, *opts.input}}),
                ScalarSignal::constant(0.0), est.mean[lo], est.times[lo], est.times[hi]};
            predicted = gronwall_bound(inst, est.times[lo], est.times[hi], est.mean[lo]);
        }
        const double ci_lo = std::isfinite(est.ci_half[lo]) ? est.ci_half[lo] : 0.0;
        const double ci_hi = std::isfinite(est.ci_half[hi]) ? est.ci_half[hi] : 0.0;
        const double slack = opts.base_tol * (1.0 + std::fabs(predicted)) +
                             opts.ci_slack_mult * (ci_hi + ci_lo * growth);
        const double resid = est.mean[hi] - predicted;
        const bool violated = resid > slack;
        rep.violated.push_back(violated ? 1 : 0);
        const double scale = std::max({std::fabs(est.mean[k]), std::fabs(predicted), 1e-300});
        rep.residuals.push_back(violated ? resid / scale : 0.0);
        if (violated) ++rep.violation_count;
    }
    detail::finalize_report(rep, opts.violation_budget);
    return rep;
}

/// Quadratic-plus-integral functional V(t, phi) = c0 phi(0)^2 +
/// int_{-tau}^0 w(s) phi(s)^2 ds, evaluated in expectation by quadrature
/// over the moment grid.
struct KrasovskiiFunctional {
    double c0 = 1.0;
    ScalarSignal weight = ScalarSignal::constant(0.0);  // w(s) on [-tau, 0], w >= 0
    double tau = 0.0;
};

inline MonitorReport krasovskii_monitor(const MomentEstimate& est,
                                        const KrasovskiiFunctional& functional,
                                        const ScalarSignal& mu, const MonitorOptions& opts) {
    const std::size_t grid = est.times.size();
    if (grid < 3) throw std::invalid_argument("krasovskii_monitor: moment grid too short");
    if (!(functional.c0 > 0.0))
        throw std::invalid_argument("krasovskii_monitor: c0 must be positive");
    const double h = est.times[1] - est.times[0];
    const auto lookback = static_cast<std::size_t>(std::llround(std::ceil(functional.tau / h - 1e-9)));
    if (lookback + 1 > grid)
        throw std::invalid_argument("krasovskii_monitor: grid lookback shorter than tau");
    const std::size_t stencil = std::max<std::size_t>(1, opts.stencil);

    // E V(t) = c0 m(t) + trapz over the history window; CI propagated the
    // same way (triangle inequality, conservative).
    std::vector<double> ev(grid, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> ev_ci(grid, 0.0);
    for (std::size_t k = lookback; k < grid; ++k) {
        double q_val = 0.0, q_ci = 0.0;
        for (std::size_t j = 0; j < lookback; ++j) {
            const std::size_t a = k - lookback + j;
            const double wa = functional.weight.eval(est.times[a] - est.times[k]);
            const double wb = functional.weight.eval(est.times[a + 1] - est.times[k]);
            q_val += 0.5 * (wa * est.mean[a] + wb * est.mean[a + 1]) * h;
            q_ci += 0.5 * (std::fabs(wa) * est.ci_half[a] + std::fabs(wb) * est.ci_half[a + 1]) * h;
        }
        ev[k] = functional.c0 * est.mean[k] + q_val;
        ev_ci[k] = functional.c0 * est.ci_half[k] + q_ci;
    }

    MonitorReport rep;
    const std::size_t first = lookback + stencil;
    if (first + stencil >= grid)
        throw std::invalid_argument("krasovskii_monitor: stencil does not fit the grid");
    for (std::size_t k = first; k + stencil < grid; ++k) {
        const double t = est.times[k];
        bool premise = true;
        if (opts.mode == MonitorMode::iss) {
            const double u = opts.input ? std::fabs(opts.input->eval(t)) : 0.0;
            premise = ev[k] >= opts.varpi_w * u;
        }
        rep.times.push_back(t);
        rep.premise_active.push_back(premise ? 1 : 0);
        if (!premise) {
            rep.violated.push_back(0);
            rep.residuals.push_back(0.0);
            continue;
        }
        ++rep.premise_count;
        const std::size_t lo = k - stencil;
        const std::size_t hi = k + stencil;
        double predicted;
        double growth;
        if (opts.mode == MonitorMode::iiss && opts.input) {
            ComparisonInstance inst{
                ScalarSignal::affine_sum({{1.0, mu}, {opts.varpi_w, *opts.input}}),
                ScalarSignal::affine_sum({{std::max(opts.varpi_w2, 0.0), *opts.input}}),
                ScalarSignal::constant(0.0), ev[lo], est.times[lo], est.times[hi]};
            growth = std::exp(integrate(inst.mu, est.times[lo], est.times[hi]));
            predicted = gronwall_bound(inst, est.times[lo], est.times[hi], ev[lo]);
        } else {
            growth = std::exp(integrate(mu, est.times[lo], est.times[hi]));
            predicted = ev[lo] * growth;
        }
        const double slack = opts.base_tol * (1.0 + std::fabs(predicted)) +
                             opts.ci_slack_mult * (ev_ci[hi] + ev_ci[lo] * growth);
        const double resid = ev[hi] - predicted;
        const bool violated = resid > slack;
        rep.violated.push_back(violated ? 1 : 0);
        const double scale = std::max({std::fabs(ev[k]), std::fabs(predicted), 1e-300});
        rep.residuals.push_back(violated ? resid / scale : 0.0);
        if (violated) ++rep.violation_count;
    }
    detail::finalize_report(rep, opts.violation_budget);
    return rep;
}

/// Least k making the Wallis ratio (2k-1)!!/(2k)!! drop below
/// (2 lambda pi - 1) / (2 lambda l exp(2 lambda pi)), or nullopt up to
/// k_max. Both sides are compared in log space so large lambda cannot
/// overflow.
inline std::optional<long> example2_k_condition(double lambda, double l, long k_max = 1000000) {
    const double pi = 3.14159265358979323846;
    if (!(lambda > 1.0 / (2.0 * pi)))
        throw std::invalid_argument("example2_k_condition: lambda must exceed 1/(2 pi)");
    if (!(l > 0.0)) throw std::invalid_argument("example2_k_condition: l must be positive");
    const double log_rhs = std::log(2.0 * lambda * pi - 1.0) - std::log(2.0 * lambda * l) -
                           2.0 * lambda * pi;
    double log_ratio = 0.0;
    for (long k = 1; k <= k_max; ++k) {
        log_ratio += std::log1p(-1.0 / (2.0 * static_cast<double>(k)));
        if (log_ratio < log_rhs) return k;
    }
    return std::nullopt;
}

/// Diagnostics against the two prior-work admissibility conditions: the
/// clipped-integral growth int_0^T max(mu, 0) per horizon, and the uniform
/// floor mu >= -ln(q)/tau.
struct RestrictiveDiagnostics {
    std::vector<double> horizons;
    std::vector<double> positive_mass;  // int_0^T max(mu, 0)
    bool finite_mass_plausible = false;  // no new mass after the first horizon
    double mu_min_scanned = 0.0;
    double floor_threshold = 0.0;  // -ln(q)/tau
    bool floor_satisfied = false;
};

inline RestrictiveDiagnostics restrictive_diagnostics(const ScalarSignal& mu, double q_prior,
                                                      double tau, std::vector<double> horizons,
                                                      const QuadratureOptions& quad = {
                                                          1e-4, 4000000}) {
    if (!(q_prior > 1.0)) throw std::invalid_argument("restrictive_diagnostics: q must exceed 1");
    if (!(tau > 0.0)) throw std::invalid_argument("restrictive_diagnostics: tau must be positive");
    for (std::size_t i = 1; i < horizons.size(); ++i)
        if (!(horizons[i] > horizons[i - 1]))
            throw std::invalid_argument("restrictive_diagnostics: horizons must increase");

    RestrictiveDiagnostics diag;
    diag.horizons = horizons;
    double prev_t = 0.0, acc = 0.0;
    const double half_pi = 0.5 * 3.14159265358979323846;
    for (double T : horizons) {
        // Anchor the subdivision on the quarter-period grid: the clipped
        // integrand kinks at sign changes and spikes at the sine peaks.
        std::vector<double> anchors;
        for (double t = std::ceil(prev_t / half_pi) * half_pi; t < T; t += half_pi)
            anchors.push_back(t);
        acc += integrate_positive_part(mu, prev_t, T, quad, &anchors);
        diag.positive_mass.push_back(acc);
        prev_t = T;
    }
    if (!diag.positive_mass.empty()) {
        diag.finite_mass_plausible =
            diag.positive_mass.back() - diag.positive_mass.front() < 1e-9 * (1.0 + diag.positive_mass.back());
    }

    diag.floor_threshold = -std::log(q_prior) / tau;
    const double span = horizons.empty() ? 100.0 : horizons.back();
    double lo = std::numeric_limits<double>::infinity();
    const int n = 20000;
    for (int i = 0; i <= n; ++i) lo = std::min(lo, mu.eval(span * i / n));
    diag.mu_min_scanned = lo;
    diag.floor_satisfied = lo >= diag.floor_threshold;
    return diag;
}

}  // namespace sdstab
