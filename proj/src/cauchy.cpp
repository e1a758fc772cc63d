#include "freeflow/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace freeflow {

using std::numbers::pi;

namespace {

std::vector<double> breaksNear(cplx z) {
  const double x = z.real();
  const double y = std::abs(z.imag());
  return {x - 100.0 * y, x - 10.0 * y, x - y, x, x + y, x + 10.0 * y, x + 100.0 * y};
}

// w in C+ with w + t phi(w) = zeta.
cplx solveSubordination(const AnalyticFn& phi, double t, cplx zeta, const newton::Options& opt) {
  auto attempt = [&](double s, cplx target, cplx seed) -> std::optional<cplx> {
    auto res = newton::solve([&](cplx w) { return w + s * phi(w) - target; },
                             [&](cplx w) { return 1.0 + s * phi.derivative(w); }, seed,
                             newton::upperHalfPlane, opt);
    if (!res) return std::nullopt;
    const cplx w = res->root;
    const double resid = std::abs(w + s * phi(w) - target);
    if (!(resid <= 1e-9 * std::max(1.0, std::abs(target)))) return std::nullopt;
    return w;
  };

  if (auto w = attempt(t, zeta, zeta)) return *w;

  // Continuation in t from the identity at t = 0.
  {
    double s = 0.0, h = std::min(0.1, t);
    cplx w = zeta;
    bool ok = true;
    while (s < t) {
      const double next = std::min(t, s + h);
      if (auto r = attempt(next, zeta, w)) {
        w = *r;
        s = next;
        h = std::min(0.1, 2.0 * h);
      } else {
        h *= 0.5;
        if (h < 1e-7) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return w;
  }

  // Continuation down from high above the real axis.
  {
    const double top = 10.0 * (1.0 + std::abs(zeta)) * std::max(1.0, t);
    cplx target{zeta.real(), zeta.imag() + top};
    std::optional<cplx> w = attempt(t, target, target);
    double lift = top;
    while (w && lift > 0.0) {
      double next = lift * 0.5;
      if (next < 1e-3 * zeta.imag()) next = 0.0;
      const cplx tgt{zeta.real(), zeta.imag() + next};
      auto r = attempt(t, tgt, *w);
      if (!r) {
        w.reset();
        break;
      }
      w = r;
      lift = next;
    }
    if (w) return *w;
  }
  throw NewtonDivergence("no root of w + t phi(w) = zeta in C+ for zeta = " + toString(zeta) +
                         ", t = " + std::to_string(t));
}

}  // namespace

CauchySampler CauchySampler::fromMeasure(Measure m, const quad::Options& opt) {
  const double mass = m.totalMass(opt);
  if (std::abs(mass - 1.0) > 1e-6)
    throw InvalidInput("Cauchy transform needs a probability measure (mass " +
                       std::to_string(mass) + ")");
  CauchySampler s;
  s.measure_ = m;
  s.g_ = [m, opt](cplx zeta) {
    const auto br = breaksNear(zeta);
    return m.integrate([zeta](double u) { return 1.0 / (zeta - u); }, opt, br);
  };
  s.dg_ = [m, opt](cplx zeta) {
    const auto br = breaksNear(zeta);
    return m.integrate(
        [zeta](double u) {
          const cplx d = zeta - u;
          return -1.0 / (d * d);
        },
        opt, br);
  };
  return s;
}

CauchySampler CauchySampler::fromFunction(AnalyticFn g) {
  CauchySampler s;
  s.g_ = [g](cplx z) { return g(z); };
  s.dg_ = [g](cplx z) { return g.derivative(z); };
  return s;
}

CauchySampler CauchySampler::fromVoiculescu(AnalyticFn phi) {
  CauchySampler s;
  s.g_ = [phi](cplx zeta) { return 1.0 / solveSubordination(phi, 1.0, zeta, {}); };
  s.dg_ = [phi](cplx zeta) {
    const cplx w = solveSubordination(phi, 1.0, zeta, {});
    const cplx dw = 1.0 / (1.0 + phi.derivative(w));
    return -dw / (w * w);
  };
  return s;
}

cplx CauchySampler::operator()(cplx zeta) const {
  if (zeta.imag() == 0.0) throw DomainError("Cauchy transform needs zeta off the real line");
  if (zeta.imag() < 0.0) return std::conj(g_(std::conj(zeta)));
  return g_(zeta);
}

cplx CauchySampler::derivative(cplx zeta) const {
  if (zeta.imag() == 0.0) throw DomainError("Cauchy transform needs zeta off the real line");
  if (zeta.imag() < 0.0) return std::conj(dg_(std::conj(zeta)));
  return dg_(zeta);
}

void InversionDomain::validate() const {
  if (!(gamma > 0.0) || !(lambda > 0.0))
    throw InvalidInput("inversion domain needs gamma, lambda > 0");
}

bool InversionDomain::contains(cplx z) const {
  return z.imag() > 0.0 && std::abs(z.real()) < gamma * z.imag() && std::abs(z) >= lambda;
}

cplx cauchyTransform(const Measure& m, cplx zeta, const quad::Options& opt) {
  if (zeta.imag() == 0.0) throw DomainError("Cauchy transform needs zeta off the real line");
  return CauchySampler::fromMeasure(m, opt)(zeta);
}

cplx voiculescuTransform(const CauchySampler& g, cplx z, const newton::Options& opt) {
  if (!(z.imag() > 0.0)) throw OutsideInversionDomain("Voiculescu transform needs Im z > 0");
  std::vector<cplx> trace;
  auto res = newton::solve(
      [&](cplx w) { return 1.0 / g(w) - z; },
      [&](cplx w) {
        const cplx gw = g(w);
        return -g.derivative(w) / (gw * gw);
      },
      z, newton::upperHalfPlane, opt, &trace);
  if (!res || !(std::abs(1.0 / g(res->root) - z) <= 1e-9 * std::max(1.0, std::abs(z))))
    throw NewtonDivergence("F(w) = z did not converge for z = " + toString(z), std::move(trace));
  return res->root - z;
}

cplx voiculescuTransform(const CauchySampler& g, cplx z, const InversionDomain& domain,
                         const newton::Options& opt) {
  domain.validate();
  if (!domain.contains(z))
    throw OutsideInversionDomain(toString(z) + " is outside Gamma_{" +
                                 std::to_string(domain.gamma) + "," +
                                 std::to_string(domain.lambda) + "}");
  return voiculescuTransform(g, z, opt);
}

cplx voiculescuTransform(const Measure& m, cplx z, const newton::Options& opt) {
  return voiculescuTransform(CauchySampler::fromMeasure(m), z, opt);
}

InversionDomain estimateInversionDomain(const CauchySampler& g, double gamma) {
  if (!(gamma > 0.0)) throw InvalidInput("gamma must be positive");
  const double half = std::atan(gamma);
  for (int k = -3; k <= 24; ++k) {
    const double lambda = std::ldexp(1.0, k);
    bool ok = true;
    for (int j = -3; j <= 3 && ok; ++j) {
      const double a = pi / 2 + 0.95 * half * j / 3.0;
      for (double r : {lambda, 2.0 * lambda, 8.0 * lambda}) {
        if (j != -3 && j != 3 && r != lambda) continue;
        try {
          (void)voiculescuTransform(g, std::polar(r, a));
        } catch (const Error&) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return {gamma, lambda};
  }
  throw OutsideInversionDomain("no inversion domain found up to lambda = 2^24");
}

DensityTable stieltjesInvert(const std::function<cplx(cplx)>& g, const std::vector<double>& xGrid,
                             double eps) {
  if (!(eps > 0.0)) throw InvalidInput("Stieltjes inversion needs eps > 0");
  DensityTable out;
  out.eps = eps;
  out.x = xGrid;
  out.density.resize(xGrid.size());
  out.flags.assign(xGrid.size(), PointFlag::Ok);
  for (std::size_t i = 0; i < xGrid.size(); ++i) {
    const double x = xGrid[i];
    const cplx g1 = g(cplx{x, eps}), g2 = g(cplx{x, eps / 2}), g4 = g(cplx{x, eps / 4});
    const bool finite = std::isfinite(std::abs(g1)) && std::isfinite(std::abs(g2)) &&
                        std::isfinite(std::abs(g4));
    if (!finite) {
      out.flags[i] = PointFlag::NonFinite;
      out.density[i] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double d1 = -g1.imag() / pi, d2 = -g2.imag() / pi, d4 = -g4.imag() / pi;
    const double r1 = 2.0 * d2 - d1;
    const double r2 = 2.0 * d4 - d2;
    // Smooth densities give consistent extrapolants; disagreement means
    // structure on the eps scale, typically an atom.
    const double big = std::max(std::abs(r1), std::abs(r2));
    if (std::abs(r1 - r2) > 0.1 * big && big > 1e-9) {
      out.flags[i] = PointFlag::Atom;
      out.density[i] = 0.0;
      continue;
    }
    out.density[i] = r1;
  }
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < xGrid.size(); ++i) {
    const double a = out.flags[i] == PointFlag::Ok ? out.density[i] : 0.0;
    const double b = out.flags[i + 1] == PointFlag::Ok ? out.density[i + 1] : 0.0;
    mass += 0.5 * (a + b) * (xGrid[i + 1] - xGrid[i]);
  }
  out.massDeficit = 1.0 - mass;
  return out;
}

AnalyticFn freeConvolve(const AnalyticFn& phi1, const AnalyticFn& phi2) {
  return fns::sum(phi1, phi2);
}

cplx semigroupMarginal(const AnalyticFn& phi, double t, cplx zeta, const newton::Options& opt) {
  if (t < 0.0) throw DomainError("semigroup time must be >= 0");
  if (!(zeta.imag() > 0.0)) throw DomainError("semigroupMarginal needs zeta in C+");
  if (t == 0.0) return 1.0 / zeta;
  return 1.0 / solveSubordination(phi, t, zeta, opt);
}

}  // namespace freeflow
