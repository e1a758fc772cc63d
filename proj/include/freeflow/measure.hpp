#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "freeflow/errors.hpp"
#include "freeflow/quadrature.hpp"

namespace freeflow {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Atom {
  double position = 0.0;
  double mass = 0.0;
};

// One absolutely continuous piece: density on [lo, hi] (either end may be
// infinite). An unbounded side needs `tailExponent` p, meaning the density
// decays like |u|^-p there; p > 1 is required for finite mass.
struct AcPiece {
  double lo = 0.0;
  double hi = 0.0;
  std::function<double(double)> density;
  std::optional<double> tailExponent;
  double scale = 1.0;

  // Serialization tag: builtin name such as "semicircle(1)", "sqrtNeg",
  // "invSqrtNeg", "cauchy(1,0)" or "table". Empty for ad-hoc lambdas.
  std::string label;
  std::vector<std::pair<double, double>> table;

  double operator()(double u) const { return scale * density(u); }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
};

// Finite positive measure on the real line: atoms plus a.c. pieces.
// Immutable after construction.
class Measure {
public:
  Measure() = default;
  Measure(std::vector<Atom> atoms, std::vector<AcPiece> pieces);

  static Measure dirac(double x, double mass = 1.0) { return Measure({{x, mass}}, {}); }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<AcPiece>& pieces() const noexcept { return pieces_; }
  bool empty() const noexcept { return atoms_.empty() && pieces_.empty(); }
  bool compactlySupported() const;
  bool purelyAtomic() const noexcept { return pieces_.empty(); }

  double totalMass(const quad::Options& opt = {}) const;

  // Integral of u^k (k in {0,1,2}) against the measure, optionally over
  // u > 0 only. Divergence is decided from the tail metadata.
  double moment(int k, bool positivePartOnly = false, const quad::Options& opt = {}) const;

  Measure scaled(double c) const;
  Measure unitedWith(const Measure& other) const;

  // Integral of f(u) dm(u). `breaks` are hints (e.g. the real part of a
  // nearby singularity) forwarded to the adaptive quadrature.
  template <class F>
  auto integrate(F&& f, const quad::Options& opt = {}, std::span<const double> breaks = {}) const;

private:
  std::vector<Atom> atoms_;
  std::vector<AcPiece> pieces_;
};

// Builtin densities.
namespace densities {
// sqrt(4t - (u-c)^2) / (2 pi t) on [c - 2 sqrt t, c + 2 sqrt t].
AcPiece semicircle(double t = 1.0, double center = 0.0);
// sqrt(-u) / (2 pi (1 + u^2)) on (-inf, 0), tail exponent 3/2.
AcPiece sqrtNeg();
// 1 / (2 pi sqrt(-u) (1 + u^2)) on (-inf, 0), tail exponent 5/2.
AcPiece invSqrtNeg();
// scale / (pi ((u-c)^2 + scale^2)) on the whole line, tail exponent 2.
AcPiece cauchy(double scale = 1.0, double center = 0.0);
// c / (1 + u^2) on [lo, hi]; used to extrapolate recovered densities past
// the sampling window. Tail exponent 2 on unbounded sides.
AcPiece lorentzTail(double c, double lo, double hi);
// Piecewise-linear interpolation of (u, value) pairs; u strictly increasing.
AcPiece table(std::vector<std::pair<double, double>> points);
}  // namespace densities

template <class F>
auto Measure::integrate(F&& f, const quad::Options& opt, std::span<const double> breaks) const {
  using T = std::decay_t<decltype(f(0.0))>;
  T total{};
  for (const auto& a : atoms_) total += f(a.position) * a.mass;
  quad::Options popt = opt;
  popt.smoothEnds = true;
  for (const auto& p : pieces_) {
    auto g = [&](double u) -> T {
      const double d = p(u);
      if (d == 0.0) return T{};
      return f(u) * d;
    };
    std::vector<double> anchors;
    for (double b : breaks)
      if (b > p.lo && b < p.hi) anchors.push_back(b);
    for (const auto& e : p.table) anchors.push_back(e.first);
    if (std::isfinite(p.lo)) anchors.push_back(p.lo);
    if (std::isfinite(p.hi)) anchors.push_back(p.hi);
    if (anchors.empty()) anchors.push_back(0.0);
    std::sort(anchors.begin(), anchors.end());
    const double first = anchors.front();
    const double last = anchors.back();
    if (!std::isfinite(p.lo)) total += quad::integrateLowerTail(g, first, popt).value;
    if (last > first) total += quad::integrate(g, first, last, popt, anchors).value;
    if (!std::isfinite(p.hi)) total += quad::integrateUpperTail(g, last, popt).value;
  }
  return total;
}

}  // namespace freeflow
