#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature with interval bisection.
// The 7-point Gauss-Legendre rule is embedded in the 15-point Kronrod rule;
// their difference drives refinement. Works for real or complex integrands.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "freeflow/errors.hpp"

namespace freeflow::quad {

struct Options {
  double absTol = 1e-10;
  double relTol = 1e-12;
  int maxIntervals = 4000;
  // Map each initial segment through u = a + (b - a)(3t^2 - 2t^3), which
  // flattens algebraic endpoint singularities such as |u - a|^-1/2.
  bool smoothEnds = false;
  // When the interval budget runs out, a result whose error estimate is
  // within stallRelTol * max(1, |value|) is still returned.
  double stallRelTol = 1e-7;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  int intervals = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class T, class F>
Segment<T> kronrod(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  std::array<T, 15> fv;
  fv[7] = f(c);
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    fv[j] = f(c - dx);
    fv[14 - j] = f(c + dx);
  }
  T resK = fv[7] * kWgk[7];
  T resG = fv[7] * kWg[3];
  double resAbs = magnitude(fv[7]) * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    resK += (fv[j] + fv[14 - j]) * kWgk[j];
    resAbs += (magnitude(fv[j]) + magnitude(fv[14 - j])) * kWgk[j];
    if (j % 2 == 1) resG += (fv[j] + fv[14 - j]) * kWg[j / 2];
  }
  const T mean = resK * 0.5;
  double resAsc = magnitude(fv[7] - mean) * kWgk[7];
  for (int j = 0; j < 7; ++j)
    resAsc += (magnitude(fv[j] - mean) + magnitude(fv[14 - j] - mean)) * kWgk[j];
  resK *= h;
  resG *= h;
  resAbs *= std::abs(h);
  resAsc *= std::abs(h);
  // QUADPACK error scaling.
  double err = magnitude(resK - resG);
  if (resAsc != 0.0 && err != 0.0) err = resAsc * std::min(1.0, std::pow(200.0 * err / resAsc, 1.5));
  constexpr double epmach = std::numeric_limits<double>::epsilon();
  if (resAbs > std::numeric_limits<double>::min() / (50.0 * epmach))
    err = std::max(50.0 * epmach * resAbs, err);
  if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
  return {a, b, resK, err};
}

}  // namespace detail

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

template <class T, class F>
Result<T> adaptive(F&& f, const std::vector<double>& cuts, const Options& opt) {
  Result<T> out;
  const double a = cuts.front(), b = cuts.back();
  std::priority_queue<detail::Segment<T>> heap;
  T total{};
  double totalErr = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto s = detail::kronrod<T>(f, cuts[i], cuts[i + 1]);
    total += s.value;
    totalErr += s.error;
    heap.push(s);
  }
  const int initial = static_cast<int>(heap.size());
  int count = initial;
  auto done = [&] {
    return totalErr <= std::max(opt.absTol, opt.relTol * detail::magnitude(total));
  };
  while (!done()) {
    if (count >= opt.maxIntervals + initial) {
      if (totalErr <= opt.stallRelTol * std::max(1.0, detail::magnitude(total))) break;
      throw QuadratureFailure("adaptive quadrature on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "] stalled at error " +
                              detail::sci(totalErr) + " after " +
                              std::to_string(count) + " intervals");
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval below machine resolution; accept what we have.
      total -= worst.value;
      totalErr -= worst.error;
      worst.error = 0.0;
      total += worst.value;
      heap.push(worst);
      continue;
    }
    auto left = detail::kronrod<T>(f, worst.a, mid);
    auto right = detail::kronrod<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    totalErr += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  if (!std::isfinite(detail::magnitude(total)))
    throw QuadratureFailure("non-finite integral on [" + std::to_string(a) + ", " +
                            std::to_string(b) + "]");
  // Re-sum to shed accumulated round-off from the running updates.
  T resum{};
  double errsum = 0.0;
  while (!heap.empty()) {
    resum += heap.top().value;
    errsum += heap.top().error;
    heap.pop();
  }
  out.value = resum;
  out.error = errsum;
  out.intervals = count;
  return out;
}

}  // namespace detail

// Integrate f over the finite interval [a, b]. Interior breakpoints (for
// kinks or near-singular peaks) seed the initial partition.
template <class F>
auto integrate(F&& f, double a, double b, const Options& opt = {},
               std::span<const double> breaks = {}) {
  using T = std::decay_t<decltype(f(a))>;
  if (!(b > a)) return Result<T>{};

  std::vector<double> cuts{a};
  for (double x : breaks)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  if (opt.smoothEnds) {
    Options plain = opt;
    plain.smoothEnds = false;
    const int n = static_cast<int>(cuts.size()) - 1;
    auto g = [&](double t) -> T {
      const int k = std::clamp(static_cast<int>(std::floor(t)), 0, n - 1);
      const double tau = t - k;
      const double w = cuts[k + 1] - cuts[k];
      const double jac = 6.0 * tau * (1.0 - tau) * w;
      if (jac == 0.0) return T{};
      return f(cuts[k] + w * tau * tau * (3.0 - 2.0 * tau)) * jac;
    };
    std::vector<double> tc{0.0};
    for (int k = 1; k <= n; ++k) tc.push_back(k);
    return detail::adaptive<T>(g, tc, plain);
  }

  return detail::adaptive<T>(f, cuts, opt);
}

// Integral over [lo, +inf) via u = lo + (1 - s)/s, s in (0, 1].
template <class F>
auto integrateUpperTail(F&& f, double lo, const Options& opt = {}) {
  auto g = [&](double s) {
    using T = std::decay_t<decltype(f(lo))>;
    if (s <= 0.0) return T{};
    const double u = lo + (1.0 - s) / s;
    return f(u) * (1.0 / (s * s));
  };
  return integrate(g, 0.0, 1.0, opt);
}

// Integral over (-inf, hi] via u = hi - (1 - s)/s.
template <class F>
auto integrateLowerTail(F&& f, double hi, const Options& opt = {}) {
  auto g = [&](double s) {
    using T = std::decay_t<decltype(f(hi))>;
    if (s <= 0.0) return T{};
    const double u = hi - (1.0 - s) / s;
    return f(u) * (1.0 / (s * s));
  };
  return integrate(g, 0.0, 1.0, opt);
}

}  // namespace freeflow::quad
