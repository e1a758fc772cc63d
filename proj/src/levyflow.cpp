#include "freeflow/levyflow.hpp"

#include <cmath>
#include <sstream>

#include "freeflow/newton.hpp"

namespace freeflow {

namespace {

bool inUpper(cplx z) { return z.imag() > 0.0; }

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void requireUpper(cplx z, const char* what) {
  if (!(z.imag() > 0.0)) throw DomainError(std::string(what) + " needs Im z > 0, got " + toString(z));
}

// Newton on F_t(zeta) = z with dF_t/dzeta = phi(F_t(zeta)) / phi(zeta).
std::optional<cplx> inverseByOde(const FlowField& ff, cplx z, double t) {
  struct Eval {
    cplx zeta, value;
  };
  std::optional<Eval> last;
  auto forward = [&](cplx zeta) -> cplx {
    if (last && last->zeta == zeta) return last->value;
    cplx v;
    try {
      v = flowOde(ff, zeta, t);
    } catch (const Error&) {
      v = {kInf, kInf};
    }
    last = Eval{zeta, v};
    return v;
  };
  newton::Options nopt;
  nopt.relTol = 1e-11;
  nopt.maxIter = 60;
  std::vector<cplx> seeds;
  try {
    const cplx s = z + t * ff.phi()(z);
    if (inUpper(s)) seeds.push_back(s);
  } catch (const Error&) {
  }
  if (inUpper(z)) seeds.push_back(z);
  seeds.push_back({z.real(), std::max(1.0, std::abs(z.imag()))});
  for (cplx seed : seeds) {
    auto res = newton::solve([&](cplx zeta) { return forward(zeta) - z; },
                             [&](cplx zeta) { return ff.phi()(forward(zeta)) / ff.phi()(zeta); },
                             seed, inUpper, nopt);
    if (!res) continue;
    if (std::abs(forward(res->root) - z) <= 1e-7 * std::max(1.0, std::abs(z))) return res->root;
  }
  return std::nullopt;
}

SamplingPlan coarsePlan() {
  SamplingPlan p;
  p.radial = 24;
  p.angular = 24;
  p.boundaryLevels = 3;
  p.refineRounds = 2;
  return p;
}

}  // namespace

cplx PowerConjugacy::Phi(cplx w) const {
  return -std::pow(w, 1.0 - theta) / (coef * (1.0 - theta));
}

cplx PowerConjugacy::Psi(cplx zeta) const {
  return std::pow(-coef * (1.0 - theta) * zeta, 1.0 / (1.0 - theta));
}

cplx PowerConjugacy::phiAfterInverse(cplx w, double t) const {
  if (theta == 0.0) return coef;
  return coef * std::pow(-coef * (1.0 - theta) * (Phi(w) - t), theta / (1.0 - theta));
}

FlowField::FlowField(AnalyticFn phi, std::shared_ptr<const ConformalPair> pair, OdeConfig ode)
    : phi_(std::move(phi)), pair_(std::move(pair)), ode_(ode) {
  if (!phi_) throw InvalidInput("flow field needs a generator");
  if (const auto& p = phi_.powerLaw(); p && p->exponent < 1.0 && p->coef != cplx{})
    conj_ = PowerConjugacy{p->coef, p->exponent};
}

void FlowField::validate(const SamplingPlan& plan) const {
  const auto chk = isNevanlinnaNumeric(phi_, plan);
  if (chk.verdict == Verdict::Fail)
    throw NotNevanlinna("generator has Im phi > 0 at " + toString(*chk.witness));
  // phi(iy)/(iy) -> 0: small at y = 1e6, or visibly decaying along a ladder.
  double r[3];
  const double ys[3] = {1e4, 1e5, 1e6};
  for (int k = 0; k < 3; ++k) r[k] = std::abs(phi_(cplx{0.0, ys[k]}) / cplx{0.0, ys[k]});
  const bool small = r[2] <= 1e-4;
  const bool decaying = r[2] <= 0.9 * r[1] && r[1] <= 0.9 * r[0] && r[2] < 1e-2;
  if (!small && !decaying)
    throw InvalidInput("phi(iy)/(iy) does not vanish as y -> inf (" + num(r[2]) + " at y = 1e6)");
}

FlowField buildFal2(const PsiSource& psi, const BuildOptions& opt) {
  if (const auto* c = std::get_if<ConstantPsi>(&psi)) {
    if (!(c->c.imag() < 0.0)) throw NotContaining("constant psi needs Im c < 0");
    auto pair = std::make_shared<const ConformalPair>(psi, opt.invert);
    return FlowField(fns::constant(c->c), pair);
  }
  auto pair = std::make_shared<const ConformalPair>(ConformalPair(psi, opt.invert).normalized());
  const auto cert = containsHalfplaneTranslate(psi);
  AnalyticFn phi(
      [pair](cplx w) { return pair->psi()(pair->Phi(w)); }, "fal2[" + describe(psi) + "]",
      DomainTag::UpperHalfPlane, [pair](cplx w) {
        const cplx z = pair->Phi(w);
        return pair->psi().derivative(z) / -pair->psi()(z);
      });
  if (const auto* p = std::get_if<PowerPsi>(&psi)) {
    // Psi = z^(s+1)/(s+1) gives phi(w) = -((s+1) w)^(s/(s+1)).
    const double theta = p->sigma / (p->sigma + 1.0);
    phi.withPowerLaw({-std::pow(p->sigma + 1.0, theta), theta});
  }
  FlowField ff(std::move(phi), pair);
  ff.withCertificate(cert);
  if (opt.validate) ff.validate(coarsePlan());
  return ff;
}

cplx flowConformal(const FlowField& ff, cplx z, double t) {
  if (t == 0.0) return z;
  if (t < 0.0) return flowInverse(ff, z, -t);
  requireUpper(z, "flowConformal");
  if (const auto& p = ff.pair()) return p->Psi(p->Phi(z) + t);
  if (const auto& c = ff.conjugacy()) return c->Psi(c->Phi(z) + t);
  throw InvalidInput("flow field has no conformal route");
}

cplx flowOde(const FlowField& ff, cplx z, double t) {
  if (t < 0.0) throw DomainError("flowOde needs t >= 0");
  if (t == 0.0) return z;
  requireUpper(z, "flowOde");
  const AnalyticFn& phi = ff.phi();
  return integrateDopri([&phi](cplx y) { return -phi(y); }, z, t, ff.ode(), inUpper);
}

cplx flow(const FlowField& ff, cplx z, double t) {
  return ff.hasConformalRoute() ? flowConformal(ff, z, t) : flowOde(ff, z, t);
}

cplx flowInverse(const FlowField& ff, cplx z, double t) {
  if (t < 0.0) throw DomainError("flowInverse needs t >= 0");
  if (t == 0.0) return z;
  cplx v;
  if (const auto& p = ff.pair()) {
    v = p->Psi(p->Phi(z) - t);
  } else if (const auto& c = ff.conjugacy()) {
    v = c->Psi(c->Phi(z) - t);
  } else {
    auto r = inverseByOde(ff, z, t);
    if (!r) throw OutsideImage(toString(z) + " is not in F_t(C+) for t = " + num(t));
    v = *r;
  }
  if (!(v.imag() > 0.0) || !std::isfinite(std::abs(v)))
    throw OutsideImage(toString(z) + " is not in F_t(C+) for t = " + num(t));
  return v;
}

std::vector<double> defaultFal2Times() { return {0.1, 0.5, 1.0, 5.0}; }

SamplingPlan fal2Plan() {
  SamplingPlan p;
  p.tolerance = 1e-8;
  return p;
}

Fal2Result fal2Check(const FlowField& ff, const std::vector<double>& tSamples,
                     const SamplingPlan& plan) {
  if (tSamples.empty()) throw InvalidInput("fal2Check needs at least one time");
  for (double t : tSamples)
    if (!(t > 0.0)) throw InvalidInput("fal2Check times must be positive");
  if (const auto& p = ff.phi().powerLaw(); p && p->exponent >= 1.0)
    throw InvalidInput("power generators need exponent < 1");

  Fal2Result out;
  std::function<std::optional<cplx>(cplx, double)> g;
  if (const auto& pair = ff.pair()) {
    // phi(F_t^-1(w)) = psi(Phi(w) - t).
    out.route = "pair";
    g = [pair](cplx w, double t) -> std::optional<cplx> {
      try {
        return pair->psi()(pair->Phi(w) - t);
      } catch (const Error&) {
        return std::nullopt;
      }
    };
  } else if (const auto& c = ff.conjugacy()) {
    out.route = "conjugacy";
    g = [c](cplx w, double t) -> std::optional<cplx> { return c->phiAfterInverse(w, t); };
  } else {
    out.route = "ode";
    g = [&ff](cplx w, double t) -> std::optional<cplx> {
      auto z = inverseByOde(ff, w, t);
      if (!z) return std::nullopt;
      try {
        return ff.phi()(*z);
      } catch (const Error&) {
        return std::nullopt;
      }
    };
  }

  bool inconclusive = false;
  for (double t : tSamples) {
    auto chk = scanUpperHalfPlane([&](cplx w) { return g(w, t); }, plan);
    out.perTime.push_back(chk);
    if (chk.verdict == Verdict::Fail) {
      out.verdict = Verdict::Fail;
      out.t = t;
      out.witness = chk.witness;
      out.value = g(*chk.witness, t);
      return out;
    }
    inconclusive = inconclusive || chk.verdict == Verdict::Inconclusive;
  }
  out.verdict = inconclusive ? Verdict::Inconclusive : Verdict::Pass;
  return out;
}

Fal2Result fal2Check(const AnalyticFn& phi, const std::vector<double>& tSamples,
                     const SamplingPlan& plan) {
  return fal2Check(FlowField(phi), tSamples, plan);
}

KernelSlice marginalLaw(const FlowField& ff, double t, const std::vector<double>& xGrid,
                        double eps) {
  if (t < 0.0) throw DomainError("marginalLaw needs t >= 0");
  KernelSlice out;
  out.t = t;
  out.table = stieltjesInvert([&](cplx zeta) { return 1.0 / flow(ff, zeta, t); }, xGrid, eps);
  return out;
}

KernelSlice transitionKernel(const FlowField& ff, double t, double x,
                             const std::vector<double>& uGrid, double eps) {
  if (t < 0.0) throw DomainError("transitionKernel needs t >= 0");
  KernelSlice out;
  out.t = t;
  out.x = x;
  out.table =
      stieltjesInvert([&](cplx zeta) { return 1.0 / (flow(ff, zeta, t) - x); }, uGrid, eps);
  return out;
}

cplx incrementTransform(const FlowField& ff, double s, double t, cplx z) {
  if (!(s >= 0.0) || !(t >= s)) throw DomainError("incrementTransform needs 0 <= s <= t");
  if (s == t) return {};
  return flowInverse(ff, z, t) - flowInverse(ff, z, s);
}

}  // namespace freeflow
