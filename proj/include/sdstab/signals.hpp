#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "sdstab/quadrature.hpp"

namespace sdstab {

class ScalarSignal;

namespace sig {

struct Constant {
    double value;
};

/// Periodic step function: `low` on [j*period, j*period + duty*period),
/// `high` on the rest of the period. Right-continuous at jumps.
struct SquareWave {
    double low;
    double high;
    double duty;    // jump point as a fraction of the period, in (0, 1)
    double period;  // > 0
};

/// t * cos(t^2). Antiderivative sin(t^2)/2.
struct TCosTSquared {};

/// scale * sin^{2k}(t), k >= 1. Period pi.
struct SinPower {
    int k;
    double scale;
};

/// Piecewise-linear interpolation of samples on a strictly increasing grid.
/// Evaluation outside the grid span is a domain error.
struct Sampled {
    std::vector<double> times;
    std::vector<double> values;
};

struct AffineSum {
    std::vector<std::pair<double, ScalarSignal>> terms;
};

using Node = std::variant<Constant, SquareWave, TCosTSquared, SinPower, Sampled, AffineSum>;

}  // namespace sig

/// Immutable scalar time function. Used for rate functions mu(t), gains b(t)
/// and input magnitudes |u(t)|; safe to share across threads.
class ScalarSignal {
  public:
    static ScalarSignal constant(double value) { return ScalarSignal(sig::Constant{value}); }

    static ScalarSignal square_wave(double low, double high, double duty, double period) {
        if (!(duty > 0.0 && duty < 1.0))
            throw std::invalid_argument("square_wave: duty point must lie in (0,1)");
        if (!(period > 0.0)) throw std::invalid_argument("square_wave: period must be positive");
        return ScalarSignal(sig::SquareWave{low, high, duty, period});
    }

    static ScalarSignal t_cos_t_squared() { return ScalarSignal(sig::TCosTSquared{}); }

    static ScalarSignal sin_power(int k, double scale) {
        if (k < 1) throw std::invalid_argument("sin_power: k must be a positive integer");
        return ScalarSignal(sig::SinPower{k, scale});
    }

    static ScalarSignal sampled(std::vector<double> times, std::vector<double> values) {
        if (times.size() != values.size() || times.size() < 2)
            throw std::invalid_argument("sampled: need matching grids with at least two points");
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
                throw std::invalid_argument("sampled: grid and values must be finite");
            if (i > 0 && !(times[i] > times[i - 1]))
                throw std::invalid_argument("sampled: grid must be strictly increasing");
        }
        return ScalarSignal(sig::Sampled{std::move(times), std::move(values)});
    }

    static ScalarSignal affine_sum(std::vector<std::pair<double, ScalarSignal>> terms) {
        if (terms.empty()) throw std::invalid_argument("affine_sum: needs at least one term");
        return ScalarSignal(sig::AffineSum{std::move(terms)});
    }

    double eval(double t) const;

    /// Common period when one exists. 0 means "constant" (any period works),
    /// nullopt means not periodic (or no commensurable period was found).
    std::optional<double> period() const;

    bool piecewise_constant() const;

    /// Points in (a, b) where the signal jumps or kinks. Exact for the
    /// square-wave / sampled families; empty for smooth ones.
    std::vector<double> breakpoints(double a, double b) const;

    const sig::Node& node() const { return *node_; }

  private:
    explicit ScalarSignal(sig::Node node) : node_(std::make_shared<const sig::Node>(std::move(node))) {}

    std::shared_ptr<const sig::Node> node_;
};

namespace sig {

inline double eval_square_wave(const SquareWave& w, double t) {
    const double j = std::floor(t / w.period);
    const double s = t - j * w.period;
    return (s < w.duty * w.period) ? w.low : w.high;
}

inline double eval_sin_power(const SinPower& p, double t) {
    const double s2 = std::sin(t) * std::sin(t);
    return p.scale * std::pow(s2, static_cast<double>(p.k));
}

inline double eval_sampled(const Sampled& s, double t) {
    if (t < s.times.front() || t > s.times.back())
        throw std::domain_error("sampled signal: query outside the grid span");
    auto it = std::upper_bound(s.times.begin(), s.times.end(), t);
    if (it == s.times.end()) return s.values.back();
    if (it == s.times.begin()) return s.values.front();
    const std::size_t hi = static_cast<std::size_t>(it - s.times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - s.times[lo]) / (s.times[hi] - s.times[lo]);
    return s.values[lo] + w * (s.values[hi] - s.values[lo]);
}

// Antiderivative of a square wave, measured from 0.
inline double square_wave_antiderivative(const SquareWave& w, double t) {
    const double per_period = w.period * (w.low * w.duty + w.high * (1.0 - w.duty));
    const double j = std::floor(t / w.period);
    const double s = t - j * w.period;
    const double cut = w.duty * w.period;
    const double partial = (s <= cut) ? w.low * s : w.low * cut + w.high * (s - cut);
    return j * per_period + partial;
}

// Definite integral of sin^{2k} by the Wallis reduction
// I_m = [-cos t sin^{m-1} t]/m + (m-1)/m I_{m-2}, run upward from I_0.
inline double sin_power_integral(int k, double a, double b) {
    const double sa = std::sin(a), ca = std::cos(a);
    const double sb = std::sin(b), cb = std::cos(b);
    double integral = b - a;  // I_0
    double pow_a = sa, pow_b = sb;  // sin^{m-1} at the endpoints
    for (int m = 2; m <= 2 * k; m += 2) {
        integral = (ca * pow_a - cb * pow_b) / m + (m - 1.0) / m * integral;
        pow_a *= sa * sa;
        pow_b *= sb * sb;
    }
    return integral;
}

inline double sampled_integral(const Sampled& s, double a, double b) {
    if (a < s.times.front() || b > s.times.back())
        throw std::domain_error("sampled signal: integration limits outside the grid span");
    auto value_at = [&](double t) { return eval_sampled(s, t); };
    // Trapezoid over the grid cells, exact for piecewise-linear data.
    double sum = 0.0;
    auto it = std::upper_bound(s.times.begin(), s.times.end(), a);
    std::size_t idx = static_cast<std::size_t>(it - s.times.begin());
    double t_prev = a;
    double v_prev = value_at(a);
    while (idx < s.times.size() && s.times[idx] < b) {
        sum += 0.5 * (v_prev + s.values[idx]) * (s.times[idx] - t_prev);
        t_prev = s.times[idx];
        v_prev = s.values[idx];
        ++idx;
    }
    sum += 0.5 * (v_prev + value_at(b)) * (b - t_prev);
    return sum;
}

}  // namespace sig

inline double ScalarSignal::eval(double t) const {
    if (!std::isfinite(t)) throw std::invalid_argument("ScalarSignal::eval: t must be finite");
    return std::visit(
        [t](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, sig::Constant>) {
                return n.value;
            } else if constexpr (std::is_same_v<T, sig::SquareWave>) {
                return sig::eval_square_wave(n, t);
            } else if constexpr (std::is_same_v<T, sig::TCosTSquared>) {
                return t * std::cos(t * t);
            } else if constexpr (std::is_same_v<T, sig::SinPower>) {
                return sig::eval_sin_power(n, t);
            } else if constexpr (std::is_same_v<T, sig::Sampled>) {
                return sig::eval_sampled(n, t);
            } else {
                double sum = 0.0;
                for (const auto& [c, child] : n.terms) sum += c * child.eval(t);
                return sum;
            }
        },
        *node_);
}

inline std::optional<double> ScalarSignal::period() const {
    return std::visit(
        [](const auto& n) -> std::optional<double> {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, sig::Constant>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, sig::SquareWave>) {
                return n.period;
            } else if constexpr (std::is_same_v<T, sig::SinPower>) {
                return std::acos(-1.0);
            } else if constexpr (std::is_same_v<T, sig::AffineSum>) {
                std::vector<double> periods;
                for (const auto& [c, child] : n.terms) {
                    (void)c;
                    auto p = child.period();
                    if (!p) return std::nullopt;
                    if (*p > 0.0) periods.push_back(*p);
                }
                if (periods.empty()) return 0.0;
                const double base = *std::max_element(periods.begin(), periods.end());
                for (int mult = 1; mult <= 64; ++mult) {
                    const double candidate = mult * base;
                    bool ok = true;
                    for (double p : periods) {
                        const double ratio = candidate / p;
                        if (std::fabs(ratio - std::round(ratio)) > 1e-9 * ratio) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) return candidate;
                }
                return std::nullopt;
            } else {
                return std::nullopt;
            }
        },
        *node_);
}

inline bool ScalarSignal::piecewise_constant() const {
    return std::visit(
        [](const auto& n) -> bool {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, sig::Constant> || std::is_same_v<T, sig::SquareWave>) {
                return true;
            } else if constexpr (std::is_same_v<T, sig::AffineSum>) {
                for (const auto& [c, child] : n.terms) {
                    (void)c;
                    if (!child.piecewise_constant()) return false;
                }
                return true;
            } else {
                return false;
            }
        },
        *node_);
}

inline std::vector<double> ScalarSignal::breakpoints(double a, double b) const {
    std::vector<double> out;
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, sig::SquareWave>) {
                // Jumps at j*period and (j + duty)*period.
                const double w = n.period;
                for (double base = std::floor(a / w) * w; base < b + w; base += w) {
                    for (double p : {base, base + n.duty * w})
                        if (p > a && p < b) out.push_back(p);
                }
            } else if constexpr (std::is_same_v<T, sig::Sampled>) {
                for (double t : n.times)
                    if (t > a && t < b) out.push_back(t);
            } else if constexpr (std::is_same_v<T, sig::AffineSum>) {
                for (const auto& [c, child] : n.terms) {
                    (void)c;
                    auto bp = child.breakpoints(a, b);
                    out.insert(out.end(), bp.begin(), bp.end());
                }
            }
        },
        *node_);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace detail {

inline std::optional<double> closed_form_integral(const ScalarSignal& s, double a, double b) {
    return std::visit(
        [&](const auto& n) -> std::optional<double> {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, sig::Constant>) {
                return n.value * (b - a);
            } else if constexpr (std::is_same_v<T, sig::SquareWave>) {
                return sig::square_wave_antiderivative(n, b) - sig::square_wave_antiderivative(n, a);
            } else if constexpr (std::is_same_v<T, sig::TCosTSquared>) {
                return 0.5 * (std::sin(b * b) - std::sin(a * a));
            } else if constexpr (std::is_same_v<T, sig::SinPower>) {
                return n.scale * sig::sin_power_integral(n.k, a, b);
            } else if constexpr (std::is_same_v<T, sig::Sampled>) {
                return sig::sampled_integral(n, a, b);
            } else {
                double sum = 0.0;
                for (const auto& [c, child] : n.terms) {
                    auto part = closed_form_integral(child, a, b);
                    if (!part) return std::nullopt;
                    sum += c * *part;
                }
                return sum;
            }
        },
        s.node());
}

}  // namespace detail

/// Forced quadrature route (cross-check for the closed forms).
inline double integrate_numeric(const ScalarSignal& s, double a, double b,
                                const QuadratureOptions& opts = {}) {
    if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
    auto hints = s.breakpoints(a, b);
    return integrate_adaptive([&](double t) { return s.eval(t); }, a, b, opts,
                              hints.empty() ? nullptr : &hints);
}

/// Definite integral; exact closed form where the family allows it,
/// adaptive quadrature otherwise.
inline double integrate(const ScalarSignal& s, double a, double b,
                        const QuadratureOptions& opts = {}) {
    if (!(a <= b)) throw std::invalid_argument("integrate: requires a <= b");
    if (auto cf = detail::closed_form_integral(s, a, b)) return *cf;
    return integrate_numeric(s, a, b, opts);
}

/// Integral of max(signal, 0). Exact on piecewise-constant signals,
/// quadrature elsewhere. `extra_hints` seeds the subdivision where the
/// caller knows the clipped integrand kinks or spikes.
inline double integrate_positive_part(const ScalarSignal& s, double a, double b,
                                      const QuadratureOptions& opts = {},
                                      const std::vector<double>* extra_hints = nullptr) {
    if (!(a <= b)) throw std::invalid_argument("integrate_positive_part: requires a <= b");
    if (a == b) return 0.0;
    if (s.piecewise_constant()) {
        auto cuts = s.breakpoints(a, b);
        cuts.insert(cuts.begin(), a);
        cuts.push_back(b);
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            // Sample at the segment midpoint: a cut computed in floating
            // point can sit one ulp on the wrong side of the jump.
            const double v = s.eval(0.5 * (cuts[i] + cuts[i + 1]));
            if (v > 0.0) sum += v * (cuts[i + 1] - cuts[i]);
        }
        return sum;
    }
    auto hints = s.breakpoints(a, b);
    if (extra_hints != nullptr)
        hints.insert(hints.end(), extra_hints->begin(), extra_hints->end());
    std::sort(hints.begin(), hints.end());
    return integrate_adaptive([&](double t) { return std::max(s.eval(t), 0.0); }, a, b, opts,
                              hints.empty() ? nullptr : &hints);
}

/// max over sampled t in [0, horizon] of the windowed integral
/// int_t^{t+T} s. Periodic signals are scanned over a single period; the
/// grid argmax is refined by three rounds of local bisection.
inline double sup_window_integral(const ScalarSignal& s, double T, double horizon,
                                  double grid_step) {
    if (!(T > 0.0)) throw std::invalid_argument("sup_window_integral: T must be positive");
    if (!(horizon >= T)) throw std::invalid_argument("sup_window_integral: horizon must cover T");
    if (!(grid_step > 0.0)) throw std::invalid_argument("sup_window_integral: grid_step must be positive");

    auto p = s.period();
    if (p && *p == 0.0) return integrate(s, 0.0, T);
    const double scan_end = (p && *p > 0.0) ? *p : horizon;

    std::vector<double> candidates;
    for (double t = 0.0; t <= scan_end + 0.5 * grid_step; t += grid_step)
        candidates.push_back(std::min(t, scan_end));
    if (s.piecewise_constant()) {
        for (double bp : s.breakpoints(0.0, scan_end + T)) {
            if (bp <= scan_end) candidates.push_back(bp);
            if (bp - T >= 0.0 && bp - T <= scan_end) candidates.push_back(bp - T);
        }
    }

    double best = -std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    for (double t : candidates) {
        const double v = integrate(s, t, t + T);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }

    double radius = grid_step;
    for (int round = 0; round < 3; ++round) {
        const double lo = std::max(0.0, best_t - radius);
        const double hi = std::min(scan_end, best_t + radius);
        const double step = (hi - lo) / 16.0;
        if (step <= 0.0) break;
        for (double t = lo; t <= hi + 0.5 * step; t += step) {
            const double v = integrate(s, t, t + T);
            if (v > best) {
                best = v;
                best_t = t;
            }
        }
        radius = step;
    }
    return best;
}

/// sup of the signal over [a, b]. Exact for piecewise-constant and sampled
/// families, grid scan with local refinement otherwise.
inline double sup_on_interval(const ScalarSignal& s, double a, double b) {
    if (!(a <= b)) throw std::invalid_argument("sup_on_interval: requires a <= b");
    if (a == b) return s.eval(a);

    if (s.piecewise_constant()) {
        auto cuts = s.breakpoints(a, b);
        cuts.insert(cuts.begin(), a);
        cuts.push_back(b);
        double best = s.eval(a);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            best = std::max(best, s.eval(0.5 * (cuts[i] + cuts[i + 1])));
        return best;
    }
    if (std::holds_alternative<sig::Sampled>(s.node())) {
        double best = std::max(s.eval(a), s.eval(b));
        for (double t : s.breakpoints(a, b)) best = std::max(best, s.eval(t));
        return best;
    }

    const int n = 512;
    const double step = (b - a) / n;
    double best = -std::numeric_limits<double>::infinity();
    double best_t = a;
    for (int i = 0; i <= n; ++i) {
        const double t = a + i * step;
        const double v = s.eval(t);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    double radius = step;
    for (int round = 0; round < 3; ++round) {
        const double lo = std::max(a, best_t - radius);
        const double hi = std::min(b, best_t + radius);
        const double fine = (hi - lo) / 16.0;
        if (fine <= 0.0) break;
        for (double t = lo; t <= hi + 0.5 * fine; t += fine) {
            const double v = s.eval(t);
            if (v > best) {
                best = v;
                best_t = t;
            }
        }
        radius = fine;
    }
    return best;
}

}  // namespace sdstab
