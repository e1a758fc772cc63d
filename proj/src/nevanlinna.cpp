#include "freeflow/nevanlinna.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace freeflow {

using std::numbers::pi;

namespace {

constexpr cplx kI{0.0, 1.0};

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Breakpoints that bracket the Poisson-kernel peak of 1/(z - u) near Re z.
std::vector<double> peakBreaks(cplx z) {
  const double x = z.real();
  const double y = std::max(z.imag(), 1e-300);
  return {x - 100.0 * y, x - 10.0 * y, x - y, x, x + y, x + 10.0 * y, x + 100.0 * y};
}

}  // namespace

void NevanlinnaSpec::validate() const {
  if (!(alpha <= 0.0)) throw InvalidInput("Nevanlinna alpha must be <= 0");
  if (!std::isfinite(alpha) || !std::isfinite(beta))
    throw InvalidInput("Nevanlinna alpha and beta must be finite");
}

void RationalNevanlinna::validate() const {
  if (!(a <= 0.0)) throw InvalidInput("rational Nevanlinna leading coefficient must be <= 0");
  if (poles.size() != residues.size())
    throw InvalidInput("poles and residues must have the same length");
  for (std::size_t k = 0; k < poles.size(); ++k) {
    if (!(residues[k] > 0.0)) throw InvalidInput("residues must be strictly positive");
    if (k > 0 && !(poles[k] > poles[k - 1]))
      throw InvalidInput("poles must be strictly increasing");
  }
}

cplx RationalNevanlinna::operator()(cplx z) const {
  cplx v = a * z + b;
  for (std::size_t k = 0; k < poles.size(); ++k) v += residues[k] / (z - poles[k]);
  return v;
}

cplx RationalNevanlinna::derivative(cplx z) const {
  cplx v = a;
  for (std::size_t k = 0; k < poles.size(); ++k) {
    const cplx d = z - poles[k];
    v -= residues[k] / (d * d);
  }
  return v;
}

cplx AnalyticFn::derivative(cplx z) const {
  if (df_) return df_(z);
  double h = 1e-3 * std::max(1.0, std::abs(z));
  if (z.imag() > 0.0) h = std::min(h, 0.2 * z.imag());
  const cplx f1 = f_(z + h), f_1 = f_(z - h), f2 = f_(z + 2.0 * h), f_2 = f_(z - 2.0 * h);
  return (-f2 + 8.0 * f1 - 8.0 * f_1 + f_2) / (12.0 * h);
}

namespace fns {

AnalyticFn powerLaw(PowerLaw p) {
  const cplx c = p.coef;
  const double e = p.exponent;
  std::ostringstream name;
  name << "powerLaw(" << num(c.real()) << "," << num(c.imag()) << "," << num(e) << ")";
  AnalyticFn f(
      [c, e](cplx z) { return e == 0.0 ? c : c * std::pow(z, e); }, name.str(),
      DomainTag::PlaneMinusLeftRay,
      [c, e](cplx z) { return e == 0.0 ? cplx{} : c * e * std::pow(z, e - 1.0); });
  f.withPowerLaw(p);
  return f;
}

AnalyticFn negPow(double rho) {
  AnalyticFn f(
      [rho](cplx z) { return -std::pow(z, rho); }, "negPow(" + num(rho) + ")",
      DomainTag::PlaneMinusLeftRay, [rho](cplx z) { return -rho * std::pow(z, rho - 1.0); });
  f.withPowerLaw({cplx{-1.0, 0.0}, rho});
  return f;
}

AnalyticFn pow(double theta) {
  AnalyticFn f(
      [theta](cplx z) { return std::pow(z, theta); }, "pow(" + num(theta) + ")",
      DomainTag::PlaneMinusLeftRay,
      [theta](cplx z) { return theta * std::pow(z, theta - 1.0); });
  f.withPowerLaw({cplx{1.0, 0.0}, theta});
  return f;
}

AnalyticFn constant(cplx c) {
  AnalyticFn f([c](cplx) { return c; }, "const(" + num(c.real()) + "," + num(c.imag()) + ")",
               DomainTag::UpperHalfPlane, [](cplx) { return cplx{}; });
  f.withPowerLaw({c, 0.0});
  return f;
}

AnalyticFn rational(const RationalNevanlinna& r) {
  r.validate();
  std::ostringstream name;
  name << "rational(a=" << num(r.a) << ",b=" << num(r.b) << ",poles=[";
  for (std::size_t k = 0; k < r.poles.size(); ++k) name << (k ? "," : "") << num(r.poles[k]);
  name << "],residues=[";
  for (std::size_t k = 0; k < r.residues.size(); ++k)
    name << (k ? "," : "") << num(r.residues[k]);
  name << "])";
  AnalyticFn f([r](cplx z) { return r(z); }, name.str(), DomainTag::UpperHalfPlane,
               [r](cplx z) { return r.derivative(z); });
  if (r.poles.empty() && r.a == 0.0) f.withPowerLaw({cplx{r.b, 0.0}, 0.0});
  return f;
}

AnalyticFn canonical(const NevanlinnaSpec& spec, const quad::Options& opt) {
  spec.validate();
  return AnalyticFn([spec, opt](cplx z) { return evalNevanlinna(spec, z, opt); }, "canonical",
                    DomainTag::UpperHalfPlane,
                    [spec, opt](cplx z) { return evalNevanlinnaDerivative(spec, z, opt); });
}

AnalyticFn sum(const AnalyticFn& f, const AnalyticFn& g) {
  AnalyticFn out([f, g](cplx z) { return f(z) + g(z); }, f.name() + "+" + g.name(),
                 DomainTag::UpperHalfPlane,
                 [f, g](cplx z) { return f.derivative(z) + g.derivative(z); });
  const auto& pf = f.powerLaw();
  const auto& pg = g.powerLaw();
  if (pf && pg && pf->exponent == pg->exponent)
    out.withPowerLaw({pf->coef + pg->coef, pf->exponent});
  return out;
}

AnalyticFn scaled(const AnalyticFn& f, double t) {
  AnalyticFn out([f, t](cplx z) { return t * f(z); }, num(t) + "*" + f.name(), f.domain(),
                 [f, t](cplx z) { return t * f.derivative(z); });
  if (const auto& p = f.powerLaw()) out.withPowerLaw({t * p->coef, p->exponent});
  return out;
}

}  // namespace fns

cplx evalNevanlinna(const NevanlinnaSpec& spec, cplx z, const quad::Options& opt) {
  if (!(z.imag() > 0.0)) throw DomainError("evalNevanlinna needs Im z > 0, got " + toString(z));
  const auto breaks = peakBreaks(z);
  const cplx integral = spec.nu.integrate(
      [z](double u) { return (1.0 + u * z) / (z - u); }, opt, breaks);
  return spec.alpha * z + spec.beta + integral;
}

cplx evalNevanlinnaDerivative(const NevanlinnaSpec& spec, cplx z, const quad::Options& opt) {
  if (!(z.imag() > 0.0)) throw DomainError("evalNevanlinna needs Im z > 0, got " + toString(z));
  const auto breaks = peakBreaks(z);
  const cplx integral = spec.nu.integrate(
      [z](double u) {
        const cplx d = z - u;
        return (1.0 + u * u) / (d * d);
      },
      opt, breaks);
  return spec.alpha - integral;
}

NevanlinnaSpec rationalToCanonical(const RationalNevanlinna& r) {
  r.validate();
  std::vector<Atom> atoms;
  double beta = r.b;
  for (std::size_t k = 0; k < r.poles.size(); ++k) {
    const double xi = r.poles[k];
    const double m = r.residues[k] / (1.0 + xi * xi);
    atoms.push_back({xi, m});
    beta -= m * xi;
  }
  return {r.a, beta, Measure(std::move(atoms), {})};
}

RecoveredNevanlinna recoverParameters(const AnalyticFn& f, const RecoveryOptions& opt) {
  RecoveredNevanlinna out;
  const cplx fi = f(kI);
  if (fi.imag() > opt.tolerance)
    throw NotNevanlinna("Im f(i) = " + num(fi.imag()) + " > 0");
  if (std::abs(fi.imag()) < 1e-12) {
    out.realConstant = true;
    out.beta = fi.real();
    return out;
  }

  // alpha = lim f(iv)/(iv), two-point Richardson on a doubling ladder.
  std::vector<double> ratios;
  for (int e = opt.ladderMinExp; e <= opt.ladderMaxExp; ++e) {
    const double v = std::ldexp(1.0, e);
    const cplx fv = f(cplx{0.0, v});
    if (fv.imag() > opt.tolerance * std::max(1.0, std::abs(fv)))
      throw NotNevanlinna("Im f(" + num(v) + "i) > 0");
    ratios.push_back((fv / cplx{0.0, v}).real());
  }
  std::vector<double> extrap;
  for (std::size_t k = 0; k + 1 < ratios.size(); ++k)
    extrap.push_back(2.0 * ratios[k + 1] - ratios[k]);
  if (extrap.empty()) throw ExtrapolationUnstable("ladder needs at least two rungs");
  if (extrap.size() >= 2) {
    const double delta = std::abs(extrap.back() - extrap[extrap.size() - 2]);
    if (!std::isfinite(delta) || delta > opt.ladderTolerance)
      throw ExtrapolationUnstable("alpha ladder did not settle (last change " + num(delta) + ")");
  }
  double alpha = extrap.back();
  if (alpha > opt.ladderTolerance) throw NotNevanlinna("recovered alpha " + num(alpha) + " > 0");
  out.alpha = std::min(alpha, 0.0);

  // The canonical integrand at z = i is identically -i, so Re f(i) = beta
  // and Im f(i) = alpha - nu(R).
  out.beta = fi.real();
  out.massFromIdentity = out.alpha - fi.imag();

  // Boundary values: density = -Im f(u + i eps) / (pi (1 + u^2)).
  const int n = std::max(opt.gridPoints, 3);
  std::vector<std::pair<double, double>> table;
  table.reserve(n);
  auto densityAt = [&](double u, double eps) {
    const cplx val = f(cplx{u, eps});
    if (val.imag() > opt.tolerance * std::max(1.0, std::abs(val)) + 1e-12)
      throw NotNevanlinna("Im f > 0 at " + toString(cplx{u, eps}));
    return -val.imag() / (pi * (1.0 + u * u));
  };
  for (int k = 0; k < n; ++k) {
    const double theta = -pi / 2 + (k + 1) * pi / (n + 1);
    const double u = std::tan(theta);
    const double d1 = densityAt(u, opt.eps);
    const double d2 = densityAt(u, 0.5 * opt.eps);
    table.emplace_back(u, std::max(0.0, 2.0 * d2 - d1));
  }
  std::vector<AcPiece> pieces;
  const auto [uLo, dLo] = table.front();
  const auto [uHi, dHi] = table.back();
  if (dLo > 0.0) pieces.push_back(densities::lorentzTail(dLo * (1.0 + uLo * uLo), -kInf, uLo));
  if (dHi > 0.0) pieces.push_back(densities::lorentzTail(dHi * (1.0 + uHi * uHi), uHi, kInf));
  pieces.push_back(densities::table(std::move(table)));
  out.nu = Measure({}, std::move(pieces));

  const double recovered = out.nu.totalMass();
  out.massDeficit = out.massFromIdentity - recovered;
  out.atomicWarning = std::abs(out.massDeficit) > 5e-3 * std::max(1.0, out.massFromIdentity);
  return out;
}

const char* verdictName(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::vector<cplx> SamplingPlan::basePoints() const {
  std::vector<double> angles;
  for (int j = 0; j < angular; ++j) angles.push_back((j + 0.5) * pi / angular);
  for (int k = 1; k <= boundaryLevels; ++k) {
    const double d = pi * std::pow(10.0, -k - 1);
    angles.push_back(d);
    angles.push_back(pi - d);
  }
  std::sort(angles.begin(), angles.end());
  std::vector<cplx> pts;
  pts.reserve(angles.size() * radial);
  const double lr0 = std::log(rMin), lr1 = std::log(rMax);
  for (int i = 0; i < radial; ++i) {
    const double r = std::exp(lr0 + (lr1 - lr0) * i / std::max(1, radial - 1));
    for (double a : angles) pts.push_back(std::polar(r, a));
  }
  return pts;
}

NevanlinnaCheck scanUpperHalfPlane(const std::function<std::optional<cplx>(cplx)>& g,
                                   const SamplingPlan& plan, double failureFraction) {
  NevanlinnaCheck out;
  cplx worst{0.0, 1.0};
  auto visit = [&](cplx z) {
    ++out.evaluated;
    const auto v = g(z);
    if (!v || !std::isfinite(v->real()) || !std::isfinite(v->imag())) {
      ++out.nonFinite;
      return;
    }
    if (v->imag() > out.maxImag) {
      out.maxImag = v->imag();
      worst = z;
    }
  };
  for (cplx z : plan.basePoints()) visit(z);

  // Zoom around the least negative point in log-polar coordinates.
  double dlr = (std::log(plan.rMax) - std::log(plan.rMin)) / std::max(1, plan.radial - 1);
  double dth = pi / plan.angular;
  for (int round = 0; round < plan.refineRounds && out.maxImag <= plan.tolerance; ++round) {
    const cplx centre = worst;
    const double lr = std::log(std::abs(centre));
    const double th = std::arg(centre);
    for (int i = -4; i <= 4; ++i) {
      for (int j = -4; j <= 4; ++j) {
        if (i == 0 && j == 0) continue;
        const double a = th + j * dth / 4.0;
        if (!(a > 0.0 && a < pi)) continue;
        visit(std::polar(std::exp(lr + i * dlr / 4.0), a));
      }
    }
    dlr /= 4.0;
    dth /= 4.0;
  }

  if (out.maxImag > plan.tolerance) {
    out.verdict = Verdict::Fail;
    out.witness = worst;
  } else if (out.nonFinite > failureFraction * out.evaluated) {
    out.verdict = Verdict::Inconclusive;
  } else {
    out.verdict = Verdict::Pass;
  }
  return out;
}

NevanlinnaCheck isNevanlinnaNumeric(const AnalyticFn& f, const SamplingPlan& plan) {
  return scanUpperHalfPlane(
      [&f](cplx z) -> std::optional<cplx> {
        try {
          return f(z);
        } catch (const std::exception& e) {
          throw EvaluatorFailure(std::string("evaluator failed: ") + e.what(), z);
        }
      },
      plan);
}

}  // namespace freeflow
