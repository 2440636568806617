#pragma once

#include <cmath>
#include <stdexcept>

#include "sdstab/sdde.hpp"

namespace sdstab {

/// Square-wave diffusion gain used by the two-regime delay example:
/// 0 on [j, j+c), e on [j+c, j+1).
inline ScalarSignal example1_gain_signal(double c, double e) {
    return ScalarSignal::square_wave(0.0, e, c, 1.0);
}

/// Two-regime scalar delay-SDE with sign-preserving fractional drift in
/// regime 0 and square-wave-modulated multiplicative noise on the delayed
/// state:
///   f(t,x,0) = -x/2 - |sin t| |x|^{1/4} cbrt(x),   f(t,x,1) = -x/2
///   g(t,y,0) = -sqrt(|b(t)|) y cos t,              g(t,y,1) = sqrt(|b(t)|) y sin t
/// with b the square wave above and generator [[-1,1],[2,-2]].
inline SddeModel make_example1_model(double c, double e, double tau) {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("example1: c must lie in (0,1)");
    if (e < 0.0) throw std::invalid_argument("example1: e must be nonnegative");
    if (tau < 0.0) throw std::invalid_argument("example1: tau must be nonnegative");

    SddeModel model;
    model.state_dim = 1;
    model.noise_dim = 1;
    model.tau = tau;
    model.generator = {{-1.0, 1.0}, {2.0, -2.0}};
    model.name = "example1";
    ScalarSignal b = example1_gain_signal(c, e);

    model.drift = [](double t, const StateVec& x, const StateVec&, int regime, double,
                     StateVec& out) {
        const double xv = x[0];
        double f = -0.5 * xv;
        if (regime == 0) {
            // |x|^{1/4} * cbrt(x) = sign(x) |x|^{7/12}, continuous at 0.
            f -= std::fabs(std::sin(t)) * std::copysign(std::pow(std::fabs(xv), 7.0 / 12.0), xv);
        }
        out[0] = f;
    };
    model.diffusion = [b](double t, const StateVec&, const StateVec& y, int regime, double,
                          std::vector<double>& out) {
        const double gain = std::sqrt(std::fabs(b.eval(t)));
        out[0] = (regime == 0) ? -gain * y[0] * std::cos(t) : gain * y[0] * std::sin(t);
    };
    model.delay = [tau](double, int) { return tau; };
    return model;
}

inline double sin_pow_int(double t, int k) {
    const double s = std::sin(t);
    const double mag = std::pow(std::fabs(s), static_cast<double>(k));
    return (s < 0.0 && (k % 2 != 0)) ? -mag : mag;
}

/// Two-regime scalar delay-SDE with an input channel modulated by t cos t^2
/// and sin^k-shaped noise on the delayed state:
///   f(t,x,0,u) = -(lambda/2) x - x^3/2 + t cos(t^2)/(1+x^2) u
///   f(t,x,1,u) = (t cos(t^2) - lambda) x / 4 + t cos(t^2)/(2(1+x^2)) u
///   g(t,x,y,0) = x^2 - sqrt(l/2) sin^k(t) y
///   g(t,y,1)   = sqrt(l/2) sin^k(t) y
/// with generator [[-1,1],[1,-1]].
inline SddeModel make_example2_model(double lambda, double l, int k, double tau) {
    if (!(lambda > 1.0 / (2.0 * 3.14159265358979323846)))
        throw std::invalid_argument("example2: lambda must exceed 1/(2 pi)");
    if (!(l > 0.0)) throw std::invalid_argument("example2: l must be positive");
    if (k < 1) throw std::invalid_argument("example2: k must be a positive integer");
    if (tau < 0.0) throw std::invalid_argument("example2: tau must be nonnegative");

    SddeModel model;
    model.state_dim = 1;
    model.noise_dim = 1;
    model.tau = tau;
    model.generator = {{-1.0, 1.0}, {1.0, -1.0}};
    model.has_input = true;
    model.name = "example2";

    model.drift = [lambda](double t, const StateVec& x, const StateVec&, int regime, double u,
                           StateVec& out) {
        const double xv = x[0];
        const double tc = t * std::cos(t * t);
        if (regime == 0) {
            out[0] = -0.5 * lambda * xv - 0.5 * xv * xv * xv + tc / (1.0 + xv * xv) * u;
        } else {
            out[0] = 0.25 * (tc - lambda) * xv + tc / (2.0 * (1.0 + xv * xv)) * u;
        }
    };
    const double noise_coeff = std::sqrt(0.5 * l);
    model.diffusion = [noise_coeff, k](double t, const StateVec& x, const StateVec& y, int regime,
                                       double, std::vector<double>& out) {
        const double sk = sin_pow_int(t, k);
        if (regime == 0) {
            out[0] = x[0] * x[0] - noise_coeff * sk * y[0];
        } else {
            out[0] = noise_coeff * sk * y[0];
        }
    };
    model.delay = [tau](double, int) { return tau; };
    return model;
}

/// Scalar linear test model dx = (a x + input_gain u) dt + b x dw with no
/// delay and a single regime. Covers the geometric-Brownian oracle
/// (input_gain = 0) and simple forced variants.
inline SddeModel make_linear_model(double a, double b, double input_gain = 0.0) {
    SddeModel model;
    model.state_dim = 1;
    model.noise_dim = 1;
    model.tau = 0.0;
    model.generator = {{0.0}};
    model.has_input = input_gain != 0.0;
    model.name = "linear";
    model.drift = [a, input_gain](double, const StateVec& x, const StateVec&, int, double u,
                                  StateVec& out) { out[0] = a * x[0] + input_gain * u; };
    model.diffusion = [b](double, const StateVec& x, const StateVec&, int, double,
                          std::vector<double>& out) { out[0] = b * x[0]; };
    model.delay = [](double, int) { return 0.0; };
    return model;
}

}  // namespace sdstab
