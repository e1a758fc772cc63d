#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "freeflow/errors.hpp"

namespace freeflow::newton {

struct Options {
  int maxIter = 80;
  double relTol = 1e-12;      // on the step, relative to max(1, |z|)
  double residualTol = 0.0;   // absolute residual accepted outright
  double damping = 0.5;       // step shrink factor on overshoot
  int maxHalvings = 50;
};

struct Outcome {
  cplx root;
  int iterations = 0;
  double residual = 0.0;
};

// Damped Newton for residual(z) = 0. `admissible` confines the iterates
// (e.g. to the upper half-plane); an inadmissible or non-decreasing trial
// step is shrunk by `damping`. Returns nullopt on failure, appending the
// iterates to `trace` when given.
inline std::optional<Outcome> solve(const std::function<cplx(cplx)>& residual,
                                    const std::function<cplx(cplx)>& slope, cplx z0,
                                    const std::function<bool(cplx)>& admissible,
                                    const Options& opt = {}, std::vector<cplx>* trace = nullptr) {
  cplx z = z0;
  if (admissible && !admissible(z)) return std::nullopt;
  cplx r = residual(z);
  if (!std::isfinite(std::abs(r))) return std::nullopt;
  for (int it = 0; it < opt.maxIter; ++it) {
    if (trace) trace->push_back(z);
    if (std::abs(r) <= opt.residualTol) return Outcome{z, it, std::abs(r)};
    const cplx d = slope(z);
    if (!(std::abs(d) > 0.0) || !std::isfinite(std::abs(d))) return std::nullopt;
    const cplx step = -r / d;
    if (!std::isfinite(std::abs(step))) return std::nullopt;
    const double scale = std::max(1.0, std::abs(z));
    if (std::abs(step) <= opt.relTol * scale) {
      const cplx last = z + step;
      if (!admissible || admissible(last)) z = last;
      return Outcome{z, it + 1, std::abs(r)};
    }
    double lambda = 1.0;
    bool accepted = false;
    cplx trial{}, rt{};
    for (int h = 0; h <= opt.maxHalvings; ++h, lambda *= opt.damping) {
      trial = z + lambda * step;
      if (admissible && !admissible(trial)) continue;
      rt = residual(trial);
      if (!std::isfinite(std::abs(rt))) continue;
      if (std::abs(rt) < std::abs(r)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Stalled at round-off level counts as converged.
      if (std::abs(step) <= 1e3 * opt.relTol * scale)
        return Outcome{z, it, std::abs(r)};
      return std::nullopt;
    }
    z = trial;
    r = rt;
  }
  return std::nullopt;
}

inline bool upperHalfPlane(cplx z) { return z.imag() > 0.0; }

}  // namespace freeflow::newton
