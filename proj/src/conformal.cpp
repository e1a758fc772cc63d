#include "freeflow/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include "freeflow/newton.hpp"

namespace freeflow {

using std::numbers::pi;

namespace {

constexpr cplx kI{0.0, 1.0};

// Signed zero matters for boundary values: x + 0i must read as the limit
// from C+.
cplx canon(cplx z) { return z.imag() == 0.0 ? cplx{z.real(), 0.0} : z; }

// log(1 + d) - d, accurate for small d.
cplx logm1(cplx d) {
  if (std::abs(d) < 0.25) {
    cplx term = d;
    cplx sum{};
    for (int k = 2; k < 60; ++k) {
      term *= -d;
      const cplx add = term / static_cast<double>(k);
      sum += add;
      if (std::abs(add) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::log(1.0 + d) - d;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

cplx specPrimitive(const NevanlinnaSpec& s, cplx z, const quad::Options& opt) {
  const cplx dz = z - kI;
  const double x = z.real(), y = z.imag();
  const std::vector<double> breaks{-10.0, -1.0, 0.0, 1.0, 10.0, x - 10.0 * y, x - y, x,
                                   x + y, x + 10.0 * y};
  const cplx integral = s.nu.integrate(
      [dz](double u) {
        const cplx d = dz / cplx{-u, 1.0};
        return -kI * dz + (1.0 + u * u) * logm1(d);
      },
      opt, breaks);
  return -s.alpha * (z * z + 1.0) / 2.0 - s.beta * dz - integral;
}

}  // namespace

AnalyticFn psiFunction(const PsiSource& src, const quad::Options& opt) {
  return std::visit(
      [&](const auto& s) -> AnalyticFn {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NevanlinnaSpec>) {
          return fns::canonical(s, opt);
        } else if constexpr (std::is_same_v<T, RationalNevanlinna>) {
          return fns::rational(s);
        } else if constexpr (std::is_same_v<T, PowerPsi>) {
          if (!(s.sigma > 0.0 && s.sigma <= 1.0))
            throw InvalidInput("power psi needs 0 < sigma <= 1, got " + num(s.sigma));
          return fns::negPow(s.sigma);
        } else {
          if (s.c.imag() > 0.0) throw NotNevanlinna("constant psi needs Im c <= 0");
          return fns::constant(s.c);
        }
      },
      src);
}

std::string describe(const PsiSource& src) {
  if (std::holds_alternative<NevanlinnaSpec>(src)) return "spec";
  return psiFunction(src).name();
}

ContainmentCertificate containsHalfplaneTranslate(const NevanlinnaSpec& psi, double tol,
                                                  const quad::Options& opt) {
  psi.validate();
  ContainmentCertificate c;
  c.alpha = psi.alpha;
  c.m2plus = psi.nu.moment(2, true, opt);
  try {
    c.decisiveRaw = psi.beta + psi.nu.moment(1, false, opt);
  } catch (const DomainError&) {
    c.decisiveRaw = std::numeric_limits<double>::quiet_NaN();
  }
  c.decisive = std::abs(c.decisiveRaw) <= tol ? 0.0 : c.decisiveRaw;
  if (!std::isfinite(c.m2plus)) {
    c.reason = "second moment of nu on (0, inf) is infinite";
  } else if (c.alpha < 0.0) {
    c.contains = true;
    c.reason = "alpha < 0";
  } else if (c.decisive < 0.0) {
    c.contains = true;
    c.reason = "alpha = 0 and beta + int u dnu < 0";
  } else {
    c.reason = std::isnan(c.decisive) ? "first moment of nu is undefined"
                                      : "alpha = 0 and beta + int u dnu >= 0";
  }
  return c;
}

ContainmentCertificate containsHalfplaneTranslate(const PsiSource& psi, double tol) {
  if (const auto* s = std::get_if<NevanlinnaSpec>(&psi)) return containsHalfplaneTranslate(*s, tol);
  if (const auto* r = std::get_if<RationalNevanlinna>(&psi))
    return containsHalfplaneTranslate(rationalToCanonical(*r), tol);
  ContainmentCertificate c;
  if (const auto* p = std::get_if<PowerPsi>(&psi)) {
    (void)psiFunction(psi);
    c.contains = true;
    if (p->sigma == 1.0) {
      c.alpha = -1.0;
      c.reason = "alpha < 0";
    } else {
      c.decisive = c.decisiveRaw = -kInf;
      c.reason = "alpha = 0 and beta + int u dnu = -inf";
    }
    return c;
  }
  const cplx k = std::get<ConstantPsi>(psi).c;
  c.decisive = c.decisiveRaw = k.real();
  c.reason = "constant psi: the image is a half-plane through 0";
  c.contains = false;
  return c;
}

ConformalPair::ConformalPair(PsiSource psi, InvertOptions opt, const quad::Options& quadOpt)
    : src_(std::move(psi)), opt_(opt), quad_(quadOpt), cache_(std::make_shared<Cache>()) {
  if (auto* s = std::get_if<NevanlinnaSpec>(&src_)) s->validate();
  psi_ = psiFunction(src_, quad_);
  if (const auto* c = std::get_if<ConstantPsi>(&src_); c && c->c == cplx{})
    throw InvalidInput("psi = 0 has a constant primitive");
}

cplx ConformalPair::raw(cplx z) const {
  z = canon(z);
  if (z.imag() < 0.0 && !std::holds_alternative<ConstantPsi>(src_))
    throw DomainError("Psi is defined on the closed upper half-plane only");
  return std::visit(
      [&](const auto& s) -> cplx {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, NevanlinnaSpec>) {
          if (!(z.imag() > 0.0))
            throw DomainError("Psi of a general spec needs Im z > 0, got " + toString(z));
          return specPrimitive(s, z, quad_);
        } else if constexpr (std::is_same_v<T, RationalNevanlinna>) {
          cplx v = -s.a * z * z / 2.0 - s.b * z;
          for (std::size_t k = 0; k < s.poles.size(); ++k) {
            const cplx d = canon(z - s.poles[k]);
            if (std::abs(d) < 1e-9) throw PoleOnPath("Psi evaluated at pole " + num(s.poles[k]));
            v -= s.residues[k] * std::log(d);
          }
          return v;
        } else if constexpr (std::is_same_v<T, PowerPsi>) {
          if (z == cplx{}) return {};
          return std::pow(z, s.sigma + 1.0) / (s.sigma + 1.0);
        } else {
          return -s.c * z;
        }
      },
      src_);
}

bool ConformalPair::admissible(cplx z) const {
  if (std::holds_alternative<NevanlinnaSpec>(src_))
    return z.imag() > 1e-9 * std::max(1.0, std::abs(z));
  return z.imag() >= 0.0;
}

std::optional<cplx> ConformalPair::newtonFrom(cplx target, cplx seed) const {
  if (!admissible(seed)) return std::nullopt;
  newton::Options nopt;
  nopt.maxIter = 60;
  auto safeRaw = [this](cplx z) -> cplx {
    try {
      return raw(z);
    } catch (const Error&) {
      return {kInf, kInf};
    }
  };
  auto safeSlope = [this](cplx z) -> cplx {
    try {
      return -psi_(canon(z));
    } catch (const Error&) {
      return {kInf, kInf};
    }
  };
  auto res = newton::solve([&](cplx z) { return safeRaw(z) - target; }, safeSlope, seed,
                           [this](cplx z) { return admissible(canon(z)); }, nopt);
  if (!res) return std::nullopt;
  const cplx z = canon(res->root);
  const double r = std::abs(safeRaw(z) - target);
  if (!(r <= opt_.residualTol * std::max(1.0, std::abs(target)))) return std::nullopt;
  return z;
}

std::optional<cplx> ConformalPair::continuation(cplx from, cplx fromZ, cplx to) const {
  double s = 0.0, h = 1.0;
  cplx z = fromZ;
  while (s < 1.0) {
    const double next = std::min(1.0, s + h);
    if (auto r = newtonFrom(from + next * (to - from), z)) {
      z = *r;
      s = next;
      h = std::min(1.0, 2.0 * h);
    } else {
      h *= 0.5;
      if (h < 1e-4) return std::nullopt;
    }
  }
  return z;
}

std::optional<cplx> ConformalPair::cachedSeed(cplx target) const {
  if (!opt_.useCache) return std::nullopt;
  std::shared_lock lock(cache_->mutex);
  std::optional<cplx> best;
  double bestDist = kInf;
  for (const auto& [w, z] : cache_->entries) {
    const double d = std::abs(w - target);
    if (d < bestDist) {
      bestDist = d;
      best = z;
    }
  }
  return best;
}

void ConformalPair::remember(cplx target, cplx z) const {
  if (!opt_.useCache) return;
  std::unique_lock lock(cache_->mutex);
  if (cache_->entries.size() < opt_.cacheCapacity) cache_->entries.emplace_back(target, z);
}

cplx ConformalPair::Phi(cplx w) const {
  const cplx target = w - shift_;
  if (const auto* c = std::get_if<ConstantPsi>(&src_)) return -target / c->c;

  if (auto seed = cachedSeed(target))
    if (auto z = newtonFrom(target, *seed)) return *z;

  const cplx w0 = raw(kI);
  std::optional<cplx> z = continuation(w0, kI, target);
  if (!z) {
    // Omega - t lies in Omega for t > 0, so a path that first runs left is
    // admissible far more often than the straight one.
    const double x = std::min(w0.real(), target.real()) - 2.0 * (1.0 + std::abs(target - w0));
    const cplx a{x, w0.imag()}, b{x, target.imag()};
    if (auto za = continuation(w0, kI, a))
      if (auto zb = continuation(a, *za, b)) z = continuation(b, *zb, target);
  }
  if (!z) throw OutsideImage(toString(w) + " does not appear to lie in Psi(C+)");
  remember(target, *z);
  return *z;
}

ConformalPair ConformalPair::withNormalization(cplx shift) const {
  ConformalPair out = *this;
  out.shift_ = shift;
  out.cache_ = std::make_shared<Cache>();
  return out;
}

ConformalPair ConformalPair::withoutCache() const {
  ConformalPair out = *this;
  out.opt_.useCache = false;
  out.cache_ = std::make_shared<Cache>();
  return out;
}

ConformalPair ConformalPair::normalized() const {
  if (std::holds_alternative<ConstantPsi>(src_)) return withNormalization({});
  const auto cert = containsHalfplaneTranslate(src_);
  if (!cert.contains) throw NotContaining("Psi(C+) contains no translate of C+: " + cert.reason);
  if (closedForm()) return withNormalization({});

  // Im Psi along the boundary increases with x; its limit at +inf is
  //   h = beta + \int [u + (1 + u^2) arg(i - u)] dnu.
  const auto& s = std::get<NevanlinnaSpec>(src_);
  const double h =
      s.beta + s.nu.integrate(
                   [](double u) { return u + (1.0 + u * u) * std::atan2(1.0, -u); }, quad_,
                   std::vector<double>{-1.0, 0.0, 1.0});
  auto probesInvert = [&](const ConformalPair& p) {
    for (double y : {0.05, 1.0, 10.0})
      for (double x : {-10.0, -1.0, 0.0, 1.0, 10.0}) {
        try {
          (void)p.Phi({x, y});
        } catch (const OutsideImage&) {
          return false;
        }
      }
    return true;
  };
  for (double extra : {0.0, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8, 25.6, 51.2, 102.4}) {
    ConformalPair p = withNormalization(cplx{0.0, -(h + extra)});
    if (probesInvert(p)) return p;
  }
  throw NotContaining("no vertical shift up to 100 makes the probe grid invertible");
}

cplx primitiveEval(const ConformalPair& pair, cplx z) { return pair.Psi(z); }

cplx invertPrimitive(const ConformalPair& pair, cplx w) { return pair.Phi(w); }

double SlitImage::rayBound(double q, double tol) const {
  for (const auto& s : slits)
    if (std::abs(s.height - q) <= tol) return s.tip;
  return kInf;
}

double SlitImage::distance(cplx w) const {
  double best = kInf;
  for (const auto& s : slits) {
    const double dx = std::max(0.0, s.tip - w.real());
    best = std::min(best, std::hypot(dx, w.imag() - s.height));
  }
  return best;
}

SlitImage slitImage(const RationalNevanlinna& r) {
  r.validate();
  if (!(r.a < 0.0)) throw InvalidInput("slitImage needs a < 0");
  const std::size_t n = r.poles.size();
  const ConformalPair pair(r);
  SlitImage out;
  for (std::size_t j = 0; j <= n; ++j) {
    double q = 0.0;
    for (std::size_t k = j; k < n; ++k) q -= pi * r.residues[k];

    // psi is real and strictly decreasing on (lo, hi), from +inf to -inf.
    auto f = [&r](double x) { return r(cplx{x, 0.0}).real(); };
    double lo = j == 0 ? -kInf : r.poles[j - 1];
    double hi = j == n ? kInf : r.poles[j];
    double a, b;
    if (std::isfinite(lo) && std::isfinite(hi)) {
      a = lo;
      b = hi;
    } else if (std::isfinite(hi)) {
      b = hi;
      double step = 1.0;
      a = hi - step;
      while (f(a) <= 0.0) a = hi - (step *= 2.0);
    } else if (std::isfinite(lo)) {
      a = lo;
      double step = 1.0;
      b = lo + step;
      while (f(b) >= 0.0) b = lo + (step *= 2.0);
    } else {
      double step = 1.0;
      a = -step;
      b = step;
      while (f(a) <= 0.0 || f(b) >= 0.0) {
        step *= 2.0;
        a = -step;
        b = step;
      }
    }
    // Bisection: f(a) > 0 > f(b), open at pole endpoints.
    for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
      const double m = 0.5 * (a + b);
      if (m <= a || m >= b) break;
      (f(m) > 0.0 ? a : b) = m;
    }
    const double xs = 0.5 * (a + b);
    out.slits.push_back({q, pair.Psi(cplx{xs, 0.0}).real()});
  }
  std::sort(out.slits.begin(), out.slits.end(),
            [](const Slit& x, const Slit& y) { return x.height < y.height; });
  return out;
}

std::vector<Polyline> flowlineGrid(const ConformalPair& pair, const FlowlineOptions& opt) {
  if (opt.imLines < 1 || opt.reLines < 1 || opt.samples < 2 || !(opt.reMax > opt.reMin) ||
      !(opt.imMax > 0.0))
    throw InvalidInput("flowline grid needs positive line counts, samples >= 2 and a range");
  std::vector<Polyline> out;
  int id = 0;
  const double yMin = 1e-3 * opt.imMax;
  for (int k = 1; k <= opt.imLines; ++k) {
    Polyline line{id++, "im", opt.imMax * k / opt.imLines, {}};
    for (int i = 0; i < opt.samples; ++i) {
      const double x = opt.reMin + (opt.reMax - opt.reMin) * i / (opt.samples - 1);
      line.points.push_back({x, pair.Psi({x, line.level})});
    }
    out.push_back(std::move(line));
  }
  for (int k = 0; k < opt.reLines; ++k) {
    const double x = opt.reLines == 1
                         ? 0.5 * (opt.reMin + opt.reMax)
                         : opt.reMin + (opt.reMax - opt.reMin) * k / (opt.reLines - 1);
    Polyline line{id++, "re", x, {}};
    for (int i = 0; i < opt.samples; ++i) {
      // Geometric spacing resolves the approach to the boundary.
      const double y = yMin * std::pow(opt.imMax / yMin, static_cast<double>(i) / (opt.samples - 1));
      try {
        line.points.push_back({y, pair.Psi({x, y})});
      } catch (const PoleOnPath&) {
      }
    }
    out.push_back(std::move(line));
  }
  return out;
}

std::vector<Polyline> boundaryTrace(const ConformalPair& pair, double reMin, double reMax,
                                    int samples) {
  if (!pair.boundaryDefined())
    throw InvalidInput("boundary values need a closed-form primitive");
  if (samples < 2 || !(reMax > reMin)) throw InvalidInput("boundary trace needs a range");
  std::vector<double> cuts{reMin};
  if (const auto* r = std::get_if<RationalNevanlinna>(&pair.source()))
    for (double p : r->poles)
      if (p > reMin && p < reMax) cuts.push_back(p);
  cuts.push_back(reMax);
  std::vector<Polyline> out;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    Polyline line{static_cast<int>(j), "boundary", 0.0, {}};
    const double a = cuts[j] + (j > 0 ? 1e-6 : 0.0);
    const double b = cuts[j + 1] - (j + 2 < cuts.size() ? 1e-6 : 0.0);
    for (int i = 0; i < samples; ++i) {
      const double x = a + (b - a) * i / (samples - 1);
      line.points.push_back({x, pair.Psi({x, 0.0})});
    }
    line.level = line.points.front().w.imag();
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace freeflow
