#pragma once

// Dormand-Prince 5(4) for autonomous complex scalar ODEs y' = f(y).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "freeflow/errors.hpp"

namespace freeflow {

struct OdeConfig {
  double absTol = 1e-10;
  double relTol = 1e-9;
  double minStep = 1e-12;
  double initialStep = 1e-2;
  long maxSteps = 1'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
};

// Integrates from y0 over a time span T >= 0. Any step whose stages or
// result fail `admissible` is rejected and halved; a step size below
// cfg.minStep raises StepUnderflow.
inline cplx integrateDopri(const std::function<cplx(cplx)>& f, cplx y0, double T,
                           const OdeConfig& cfg, const std::function<bool(cplx)>& admissible,
                           OdeStats* stats = nullptr) {
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  if (!(T >= 0.0)) throw DomainError("ODE time span must be >= 0");
  if (T == 0.0) return y0;
  auto ok = [&](cplx y) { return std::isfinite(y.real()) && std::isfinite(y.imag()) &&
                                 (!admissible || admissible(y)); };
  if (!ok(y0)) throw DomainError("ODE initial value " + toString(y0) + " is not admissible");

  double t = 0.0;
  double h = std::min(cfg.initialStep, T);
  cplx y = y0;
  cplx k1 = f(y);
  long steps = 0;
  while (t < T) {
    if (++steps > cfg.maxSteps) throw StepUnderflow("ODE step budget exhausted");
    const bool last = t + h >= T;
    if (last) h = T - t;
    bool good = false;
    double errNorm = std::numeric_limits<double>::infinity();
    cplx y5{}, k7{};
    do {
      const cplx s2 = y + h * a21 * k1;
      if (!ok(s2)) break;
      const cplx k2 = f(s2);
      const cplx s3 = y + h * (a31 * k1 + a32 * k2);
      if (!ok(s3)) break;
      const cplx k3 = f(s3);
      const cplx s4 = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      if (!ok(s4)) break;
      const cplx k4 = f(s4);
      const cplx s5 = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      if (!ok(s5)) break;
      const cplx k5 = f(s5);
      const cplx s6 = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      if (!ok(s6)) break;
      const cplx k6 = f(s6);
      y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      if (!ok(y5)) break;
      k7 = f(y5);
      const cplx err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double sc = cfg.absTol + cfg.relTol * std::max(std::abs(y), std::abs(y5));
      errNorm = std::abs(err) / sc;
      good = std::isfinite(errNorm);
    } while (false);

    if (good && errNorm <= 1.0) {
      t = last ? T : t + h;
      y = y5;
      k1 = k7;
      if (stats) ++stats->accepted;
      const double fac = errNorm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(errNorm, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      if (stats) ++stats->rejected;
      h *= good ? std::clamp(0.9 * std::pow(errNorm, -0.25), 0.1, 0.5) : 0.5;
      if (h < cfg.minStep)
        throw StepUnderflow("ODE step fell below " + std::to_string(cfg.minStep) + " at t = " +
                            std::to_string(t) + ", y = " + toString(y));
    }
  }
  return y;
}

}  // namespace freeflow
