#pragma once

#include <complex>
#include <random>
#include <vector>

#include "doctest.h"
#include "freeflow/errors.hpp"

namespace testing {

using freeflow::cplx;

inline void checkClose(cplx got, cplx want, double tol) {
  INFO("got " << got << ", want " << want);
  CHECK(std::abs(got - want) <= tol);
}

// Random points in C+ with log-uniform modulus in [rMin, rMax].
inline std::vector<cplx> upperPoints(int n, unsigned seed, double rMin = 0.05, double rMax = 20.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lr(std::log(rMin), std::log(rMax));
  std::uniform_real_distribution<double> ang(0.02, 3.12);
  std::vector<cplx> out;
  for (int i = 0; i < n; ++i) out.push_back(std::polar(std::exp(lr(rng)), ang(rng)));
  return out;
}

}  // namespace testing
