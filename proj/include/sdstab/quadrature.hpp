#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdstab {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    std::size_t max_intervals = 200000;
};

/// Thrown when adaptive refinement runs out of interval budget before
/// reaching the requested absolute tolerance.
class QuadratureError : public std::runtime_error {
  public:
    QuadratureError(const std::string& msg, double achieved)
        : std::runtime_error(msg + " (achieved tolerance " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}

    double achieved_tolerance() const { return achieved_; }

  private:
    double achieved_;
};

namespace detail {

// Gauss 7 / Kronrod 15 pair on [-1, 1]: {abscissa, gauss weight, kronrod weight}.
// Rows 0..3 are the shared Gauss nodes, rows 4..7 are Kronrod-only.
inline constexpr double kG7K15[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

template <class F>
double g7k15(const F& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double f0 = f(mid);
    double g7 = kG7K15[0][1] * f0;
    double k15 = kG7K15[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kG7K15[i][0];
        const double fi = f(mid + dx) + f(mid - dx);
        g7 += kG7K15[i][1] * fi;
        k15 += kG7K15[i][2] * fi;
    }
    g7 *= half;
    k15 *= half;

    err = 200.0 * std::fabs(g7 - k15);
    err *= std::sqrt(err);
    return k15;
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b] with interval
/// bisection. `split_hints` seeds the initial subdivision (known breakpoints
/// of the integrand make discontinuities cheap instead of slow).
template <class F>
double integrate_adaptive(const F& f, double a, double b,
                          const QuadratureOptions& opts = {},
                          const std::vector<double>* split_hints = nullptr) {
    if (!(a <= b)) throw std::invalid_argument("integrate_adaptive: requires a <= b");
    if (a == b) return 0.0;

    struct Interval {
        double a, b, value, err;
    };

    std::vector<Interval> work;
    auto push = [&](double lo, double hi) {
        Interval iv{lo, hi, 0.0, 0.0};
        iv.value = detail::g7k15(f, lo, hi, iv.err);
        work.push_back(iv);
    };

    if (split_hints != nullptr && !split_hints->empty()) {
        std::vector<double> cuts;
        cuts.push_back(a);
        for (double h : *split_hints)
            if (h > a && h < b) cuts.push_back(h);
        cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            if (cuts[i + 1] > cuts[i]) push(cuts[i], cuts[i + 1]);
    } else {
        push(a, b);
    }

    const double span = b - a;
    const double min_width = 64.0 * std::numeric_limits<double>::epsilon() * std::fabs(span);

    double sum = 0.0;
    double err_converged = 0.0;
    std::size_t used = work.size();
    while (!work.empty()) {
        Interval iv = work.back();
        work.pop_back();
        const double local_tol = opts.abs_tol * (iv.b - iv.a) / span;
        if (iv.err <= local_tol || (iv.b - iv.a) <= min_width) {
            sum += iv.value;
            err_converged += iv.err;
            continue;
        }
        if (used + 2 > opts.max_intervals) {
            double pending = iv.err;
            for (const Interval& w : work) pending += w.err;
            throw QuadratureError("integrate_adaptive: interval budget exhausted",
                                  err_converged + pending);
        }
        const double mid = 0.5 * (iv.a + iv.b);
        push(iv.a, mid);
        push(mid, iv.b);
        used += 2;
    }
    return sum;
}

}  // namespace sdstab
