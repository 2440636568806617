#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sdstab/sdde.hpp"

namespace sdstab {

/// Sample mean of |x(t)|^p over an ensemble, with 95% normal-approximation
/// confidence half-widths. Trajectories that blow up are excluded and
/// counted; more than 1% of them marks the estimate unreliable.
struct MomentEstimate {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> ci_half;
    double p = 2.0;
    std::size_t n_total = 0;
    std::size_t n_valid = 0;
    double truncated_fraction = 0.0;
    bool unreliable = false;
    bool heavy_tailed = false;    // sample kurtosis above 20 somewhere
    double max_kurtosis = 0.0;
    std::vector<double> tail_averages;  // per-trajectory mean over the tail window
    double tail_window_start = 0.0;
};

struct EnsembleOptions {
    std::size_t n = 1000;
    double p = 2.0;
    int threads = 0;               // 0 = hardware concurrency
    double tail_window_frac = 0.2;
};

namespace detail {

struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// Per-block accumulators. Blocks have a fixed size, each block is filled in
// trajectory order and blocks are merged in index order, so the result does
// not depend on how many worker threads ran.
struct BlockAccum {
    std::vector<KahanSum> s1, s2, s3, s4;
    std::vector<double> tail_avgs;  // indexed by position within the block
    std::size_t truncated = 0;
    std::size_t valid = 0;
};

inline constexpr std::size_t kBlockSize = 256;

}  // namespace detail

/// Runs N trajectories with independent Brownian and regime streams keyed
/// by (master_seed, trajectory index) and reduces per-grid-point moments.
/// Deterministic for a fixed (seed, dt, N) regardless of thread count.
inline MomentEstimate run_ensemble(const SddeModel& model, const SimConfig& cfg,
                                   const EnsembleOptions& opts) {
    if (opts.n < 2) throw std::invalid_argument("run_ensemble: need at least two trajectories");
    if (!(opts.p > 0.0)) throw std::invalid_argument("run_ensemble: moment order must be positive");

    const auto steps = static_cast<std::size_t>(std::llround((cfg.t1 - cfg.t0) / cfg.dt));
    const std::size_t grid = steps + 1;
    const std::size_t n_blocks = (opts.n + detail::kBlockSize - 1) / detail::kBlockSize;

    const RegimeGenerator generator(model.generator);
    const double tail_start = cfg.t1 - opts.tail_window_frac * (cfg.t1 - cfg.t0);

    std::vector<detail::BlockAccum> blocks(n_blocks);
    for (auto& blk : blocks) {
        blk.s1.resize(grid);
        blk.s2.resize(grid);
        blk.s3.resize(grid);
        blk.s4.resize(grid);
    }

    std::atomic<std::size_t> next_block{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t bi = next_block.fetch_add(1);
            if (bi >= n_blocks) return;
            auto& blk = blocks[bi];
            const std::size_t lo = bi * detail::kBlockSize;
            const std::size_t hi = std::min(lo + detail::kBlockSize, opts.n);
            blk.tail_avgs.assign(hi - lo, std::numeric_limits<double>::quiet_NaN());
            for (std::size_t i = lo; i < hi; ++i) {
                PhiloxRng brownian(cfg.master_seed, 2 * i);
                PhiloxRng regime_rng(cfg.master_seed, 2 * i + 1);
                RegimePath path = (generator.size() > 1)
                                      ? sample_path(generator, cfg.t0, cfg.t1, cfg.initial_regime,
                                                    regime_rng)
                                      : RegimePath{cfg.t0, cfg.t1, {}, {cfg.initial_regime}};
                Trajectory traj = simulate(model, cfg, path, brownian);
                if (traj.truncated) {
                    ++blk.truncated;
                    continue;
                }
                ++blk.valid;
                detail::KahanSum tail_sum;
                std::size_t tail_count = 0;
                for (std::size_t k = 0; k < grid; ++k) {
                    const double v = std::pow(traj.norm(k), opts.p);
                    blk.s1[k].add(v);
                    const double v2 = v * v;
                    blk.s2[k].add(v2);
                    blk.s3[k].add(v2 * v);
                    blk.s4[k].add(v2 * v2);
                    if (traj.times[k] >= tail_start - 1e-12) {
                        tail_sum.add(v);
                        ++tail_count;
                    }
                }
                if (tail_count > 0) blk.tail_avgs[i - lo] = tail_sum.sum / tail_count;
            }
        }
    };

    unsigned n_threads = opts.threads > 0 ? static_cast<unsigned>(opts.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(n_blocks));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    // Merge in block order.
    MomentEstimate est;
    est.p = opts.p;
    est.n_total = opts.n;
    est.tail_window_start = tail_start;
    est.times.resize(grid);
    for (std::size_t k = 0; k < grid; ++k)
        est.times[k] = (k == steps) ? cfg.t1 : cfg.t0 + static_cast<double>(k) * cfg.dt;

    std::vector<detail::KahanSum> s1(grid), s2(grid), s3(grid), s4(grid);
    std::size_t truncated = 0, valid = 0;
    for (const auto& blk : blocks) {
        truncated += blk.truncated;
        valid += blk.valid;
        for (std::size_t k = 0; k < grid; ++k) {
            s1[k].add(blk.s1[k].sum);
            s2[k].add(blk.s2[k].sum);
            s3[k].add(blk.s3[k].sum);
            s4[k].add(blk.s4[k].sum);
        }
        for (double ta : blk.tail_avgs)
            if (std::isfinite(ta)) est.tail_averages.push_back(ta);
    }
    est.n_valid = valid;
    est.truncated_fraction = static_cast<double>(truncated) / static_cast<double>(opts.n);
    est.unreliable = est.truncated_fraction > 0.01 || valid < 2;

    est.mean.assign(grid, std::numeric_limits<double>::quiet_NaN());
    est.ci_half.assign(grid, std::numeric_limits<double>::quiet_NaN());
    if (valid >= 2) {
        const auto nv = static_cast<double>(valid);
        for (std::size_t k = 0; k < grid; ++k) {
            const double m = s1[k].sum / nv;
            double var = (s2[k].sum - nv * m * m) / (nv - 1.0);
            var = std::max(var, 0.0);
            est.mean[k] = m;
            est.ci_half[k] = 1.96 * std::sqrt(var / nv);
            // Excess-free kurtosis from raw power sums; diagnostic only.
            const double m2 = s2[k].sum / nv - m * m;
            if (m2 > 1e-300 && valid >= 8) {
                const double m4 = s4[k].sum / nv - 4.0 * m * s3[k].sum / nv +
                                  6.0 * m * m * s2[k].sum / nv - 3.0 * m * m * m * m;
                const double kurt = m4 / (m2 * m2);
                est.max_kurtosis = std::max(est.max_kurtosis, kurt);
            }
        }
        est.heavy_tailed = est.max_kurtosis > 20.0;
    }
    return est;
}

/// Least-squares exponential fit on a window: log(mean) regressed on t.
struct DecayFit {
    double alpha = 0.0;        // decay rate, minus the fitted slope
    double beta = 0.0;         // prefactor exp(intercept)
    double alpha_ci_half = 0.0;
    double r_squared = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

inline DecayFit fit_decay(const MomentEstimate& est, double window_lo, double window_hi) {
    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < est.times.size(); ++k) {
        const double t = est.times[k];
        if (t < window_lo - 1e-12 || t > window_hi + 1e-12) continue;
        const double v = est.mean[k];
        if (!(v > 0.0))
            throw std::domain_error("fit_decay: moment estimate must be positive on the window");
        ts.push_back(t);
        ys.push_back(std::log(v));
    }
    if (ts.size() < 3) throw std::invalid_argument("fit_decay: window holds fewer than 3 points");

    const auto n = static_cast<double>(ts.size());
    double st = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sy += ys[i];
    }
    const double mt = st / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double dt = ts[i] - mt;
        const double dy = ys[i] - my;
        sxx += dt * dt;
        sxy += dt * dy;
        syy += dy * dy;
    }
    DecayFit fit;
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    const double slope = (sxx > 0.0) ? sxy / sxx : 0.0;
    fit.alpha = -slope;
    fit.beta = std::exp(my - slope * mt);
    double ss_res = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double r = ys[i] - (my + slope * (ts[i] - mt));
        ss_res += r * r;
    }
    fit.r_squared = (syy > 0.0) ? std::max(0.0, 1.0 - ss_res / syy) : 0.0;
    if (ts.size() > 2 && sxx > 0.0) {
        const double se = std::sqrt(ss_res / (n - 2.0) / sxx);
        fit.alpha_ci_half = 1.96 * se;
    }
    return fit;
}

/// Mann-Kendall style trend statistic on a (subsampled) series: the sign
/// statistic normalized to an approximate z-score.
inline double trend_z_score(const std::vector<double>& values) {
    std::vector<double> v;
    const std::size_t stride = std::max<std::size_t>(1, values.size() / 60);
    for (std::size_t i = 0; i < values.size(); i += stride) v.push_back(values[i]);
    const std::size_t n = v.size();
    if (n < 4) return 0.0;
    long s = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (v[j] > v[i]) ++s;
            else if (v[j] < v[i]) --s;
        }
    const double nn = static_cast<double>(n);
    const double var = nn * (nn - 1.0) * (2.0 * nn + 5.0) / 18.0;
    if (var <= 0.0) return 0.0;
    const double sd = std::sqrt(var);
    if (s > 0) return (static_cast<double>(s) - 1.0) / sd;
    if (s < 0) return (static_cast<double>(s) + 1.0) / sd;
    return 0.0;
}

struct ProbeRow {
    double level = 0.0;
    double steady_moment = 0.0;
    double ci_half = 0.0;
    bool settled = true;
    bool unreliable = false;
    double trend_z = 0.0;
};

struct ProbeTable {
    std::vector<ProbeRow> rows;
};

/// Runs the ensemble at each constant input level and reports the
/// steady-state moment as the tail-window average. A level is flagged
/// non-settled when the tail still carries a materially monotone trend.
inline ProbeTable iss_gain_probe(const SddeModel& model, const SimConfig& base_cfg,
                                 const std::vector<double>& levels, const EnsembleOptions& opts) {
    if (!model.has_input) throw std::invalid_argument("iss_gain_probe: model has no input channel");
    ProbeTable table;
    for (double level : levels) {
        SimConfig cfg = base_cfg;
        cfg.input = ScalarSignal::constant(std::fabs(level));
        MomentEstimate est = run_ensemble(model, cfg, opts);

        ProbeRow row;
        row.level = std::fabs(level);
        row.unreliable = est.unreliable;
        const auto n_tail = static_cast<double>(est.tail_averages.size());
        if (n_tail >= 2.0) {
            double s = 0.0;
            for (double v : est.tail_averages) s += v;
            const double m = s / n_tail;
            double var = 0.0;
            for (double v : est.tail_averages) var += (v - m) * (v - m);
            var /= (n_tail - 1.0);
            row.steady_moment = m;
            row.ci_half = 1.96 * std::sqrt(var / n_tail);
        } else {
            row.unreliable = true;
        }

        // Trend over the tail window of the moment curve.
        std::vector<double> tail_curve;
        double drift_lo = 0.0, drift_hi = 0.0;
        double peak = 0.0;
        for (std::size_t k = 0; k < est.times.size(); ++k) {
            if (std::isfinite(est.mean[k])) peak = std::max(peak, est.mean[k]);
            if (est.times[k] >= est.tail_window_start - 1e-12 && std::isfinite(est.mean[k]))
                tail_curve.push_back(est.mean[k]);
        }
        if (tail_curve.size() >= 4) {
            row.trend_z = trend_z_score(tail_curve);
            const std::size_t q = tail_curve.size() / 4;
            double head = 0.0, tail = 0.0;
            for (std::size_t k = 0; k < q; ++k) {
                head += tail_curve[k];
                tail += tail_curve[tail_curve.size() - 1 - k];
            }
            drift_lo = head / static_cast<double>(q);
            drift_hi = tail / static_cast<double>(q);
        }
        // A trend only counts against settling when it is material next to
        // the estimator noise AND the overall dynamics scale; a moment
        // decaying toward zero trends forever in relative terms.
        const double drift = std::fabs(drift_hi - drift_lo);
        const bool material = drift > 4.0 * row.ci_half &&
                              drift > 0.01 * std::fabs(row.steady_moment) && drift > 1e-4 * peak;
        row.settled = !(std::fabs(row.trend_z) > 3.0 && material);
        if (row.unreliable) row.settled = false;
        table.rows.push_back(row);
    }
    return table;
}

}  // namespace sdstab
