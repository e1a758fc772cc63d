#pragma once

// Cauchy / Voiculescu transform calculus:
//   G(zeta) = \int (zeta - u)^-1 dmu,   F = 1/G,   phi(z) = F^-1(z) - z.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "freeflow/measure.hpp"
#include "freeflow/nevanlinna.hpp"
#include "freeflow/newton.hpp"

namespace freeflow {

// Source of a Cauchy transform: a probability measure (quadrature) or a
// directly supplied analytic G on C+. Values on C- come from conjugation.
class CauchySampler {
public:
  static CauchySampler fromMeasure(Measure m, const quad::Options& opt = {});
  static CauchySampler fromFunction(AnalyticFn g);
  // G of the law whose Voiculescu transform is phi (solves w + phi(w) = zeta).
  static CauchySampler fromVoiculescu(AnalyticFn phi);

  cplx operator()(cplx zeta) const;
  cplx derivative(cplx zeta) const;
  const std::optional<Measure>& measure() const noexcept { return measure_; }

private:
  std::function<cplx(cplx)> g_;
  std::function<cplx(cplx)> dg_;
  std::optional<Measure> measure_;
};

// Gamma_{gamma,lambda} = {x + iy : y > 0, |x| < gamma y, |z| >= lambda}.
struct InversionDomain {
  double gamma = 1.0;
  double lambda = 1.0;

  void validate() const;
  bool contains(cplx z) const;
};

cplx cauchyTransform(const Measure& m, cplx zeta, const quad::Options& opt = {});

// Probes Newton convergence on the boundary of Gamma_{gamma,lambda} for a
// doubling ladder of lambda; returns the first lambda where all probes
// invert consistently.
InversionDomain estimateInversionDomain(const CauchySampler& g, double gamma = 1.0);

cplx voiculescuTransform(const CauchySampler& g, cplx z, const newton::Options& opt = {});
cplx voiculescuTransform(const CauchySampler& g, cplx z, const InversionDomain& domain,
                         const newton::Options& opt = {});
cplx voiculescuTransform(const Measure& m, cplx z, const newton::Options& opt = {});

enum class PointFlag { Ok, NonFinite, Atom };

struct DensityTable {
  std::vector<double> x;
  std::vector<double> density;
  std::vector<PointFlag> flags;
  double massDeficit = 0.0;
  double eps = 0.0;
};

// density(x) = -(1/pi) Im g(x + i eps), Richardson-extrapolated over
// (eps, eps/2). A second extrapolant over (eps/2, eps/4) must agree within
// 10%; points where it does not (atoms, eps-scale structure) are flagged
// Atom and zeroed, and the missing mass shows up in massDeficit.
DensityTable stieltjesInvert(const std::function<cplx(cplx)>& g, const std::vector<double>& xGrid,
                             double eps = 1e-3);
inline DensityTable stieltjesInvert(const CauchySampler& g, const std::vector<double>& xGrid,
                                    double eps = 1e-3) {
  return stieltjesInvert([&g](cplx z) { return g(z); }, xGrid, eps);
}

AnalyticFn freeConvolve(const AnalyticFn& phi1, const AnalyticFn& phi2);

// Solves w + t phi(w) = zeta in C+ and returns 1/w = G_{mu_t}(zeta).
// Direct Newton first, then continuation in t (steps <= 0.1), then
// continuation in Im zeta.
cplx semigroupMarginal(const AnalyticFn& phi, double t, cplx zeta,
                       const newton::Options& opt = {});

}  // namespace freeflow
