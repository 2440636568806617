#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sdstab/signals.hpp"
#include "sdstab/usf.hpp"

namespace sdstab {

/// Data for the comparison inequalities: a trajectory y >= 0 obeying
/// D+ y <= mu y + pi whenever y >= psi, on [t0, t1]. pi and psi are
/// nonnegative on the span.
struct ComparisonInstance {
    ScalarSignal mu;
    ScalarSignal pi;
    ScalarSignal psi;
    double y0 = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;
};

inline void validate_instance(const ComparisonInstance& inst) {
    if (!(inst.t1 >= inst.t0)) throw std::invalid_argument("comparison: needs t1 >= t0");
    if (inst.y0 < 0.0) throw std::invalid_argument("comparison: y0 must be nonnegative");
    const int n = 257;
    for (int i = 0; i <= n; ++i) {
        const double t = inst.t0 + (inst.t1 - inst.t0) * i / n;
        if (inst.pi.eval(t) < -1e-12) throw std::invalid_argument("comparison: pi must be nonnegative");
        if (inst.psi.eval(t) < -1e-12) throw std::invalid_argument("comparison: psi must be nonnegative");
    }
}

/// y(s) exp(int_s^t mu) + int_s^t exp(int_l^t mu) pi(l) dl  -- the
/// Gronwall-Bellman bound for the unconditional inequality.
inline double gronwall_bound(const ComparisonInstance& inst, double s, double t, double y_s,
                             const QuadratureOptions& quad = {}) {
    if (!(inst.t0 <= s && s <= t && t <= inst.t1))
        throw std::invalid_argument("gronwall_bound: needs t0 <= s <= t <= t1");
    const double homogeneous = y_s * std::exp(integrate(inst.mu, s, t));
    if (s == t) return y_s;
    auto hints = inst.mu.breakpoints(s, t);
    for (double b : inst.pi.breakpoints(s, t)) hints.push_back(b);
    const double forced = integrate_adaptive(
        [&](double l) { return std::exp(integrate(inst.mu, l, t)) * inst.pi.eval(l); }, s, t, quad,
        hints.empty() ? nullptr : &hints);
    return homogeneous + forced;
}

/// max{ y(t-T) exp(int_{t-T}^t mu), sup_{[t-T,t]} psi * e^{phi_mu(T)} }
/// + int_{t-T}^t exp(int_s^t mu) pi(s) ds. phi may be passed in when the
/// caller already certified the window.
inline double razumikhin_bound(const ComparisonInstance& inst, double T, double t,
                               double y_at_t_minus_T, std::optional<double> phi = std::nullopt,
                               const UsfScanOptions& scan = {},
                               const QuadratureOptions& quad = {}) {
    if (!(T > 0.0)) throw std::invalid_argument("razumikhin_bound: T must be positive");
    if (!(t - T >= inst.t0 && t <= inst.t1))
        throw std::invalid_argument("razumikhin_bound: window [t-T, t] must lie in the span");
    const double phi_T = phi ? *phi : overshoot(inst.mu, T, scan);
    const double decay = y_at_t_minus_T * std::exp(integrate(inst.mu, t - T, t));
    const double floor = sup_on_interval(inst.psi, t - T, t) * std::exp(phi_T);
    double forced = 0.0;
    {
        auto hints = inst.mu.breakpoints(t - T, t);
        for (double b : inst.pi.breakpoints(t - T, t)) hints.push_back(b);
        forced = integrate_adaptive(
            [&](double s) { return std::exp(integrate(inst.mu, s, t)) * inst.pi.eval(s); }, t - T, t,
            quad, hints.empty() ? nullptr : &hints);
    }
    return std::max(decay, floor) + forced;
}

struct OracleTrajectory {
    std::vector<double> times;
    std::vector<double> values;
};

/// Explicit Euler construction that achieves equality in the hypothesis
/// when y >= psi and freezes y otherwise. Steps are split at signal
/// breakpoints so each substep sees constant coefficients; that keeps the
/// discrete path below the continuous comparison solution up to O(dt).
inline OracleTrajectory oracle_trajectory(const ComparisonInstance& inst, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("oracle_trajectory: dt must be positive");

    std::vector<double> cuts = inst.mu.breakpoints(inst.t0, inst.t1);
    for (double b : inst.pi.breakpoints(inst.t0, inst.t1)) cuts.push_back(b);
    for (double b : inst.psi.breakpoints(inst.t0, inst.t1)) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    OracleTrajectory traj;
    const auto n = static_cast<std::size_t>(std::llround(std::ceil((inst.t1 - inst.t0) / dt)));
    traj.times.reserve(n + 1);
    traj.values.reserve(n + 1);

    double y = inst.y0;
    traj.times.push_back(inst.t0);
    traj.values.push_back(y);

    std::size_t cut_idx = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = inst.t0 + k * dt;
        const double b = std::min(inst.t0 + (k + 1) * dt, inst.t1);
        double sub_a = a;
        while (cut_idx < cuts.size() && cuts[cut_idx] <= a) ++cut_idx;
        std::size_t ci = cut_idx;
        while (sub_a < b) {
            double sub_b = b;
            if (ci < cuts.size() && cuts[ci] < b) sub_b = cuts[ci++];
            const double h = sub_b - sub_a;
            if (h > 0.0 && y >= inst.psi.eval(sub_a)) {
                y += h * (inst.mu.eval(sub_a) * y + inst.pi.eval(sub_a));
            }
            sub_a = sub_b;
        }
        traj.times.push_back(b);
        traj.values.push_back(y);
    }
    return traj;
}

}  // namespace sdstab
