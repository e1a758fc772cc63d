#pragma once

// Nevanlinna functions in the convention used throughout this library:
// analytic on the upper half-plane C+ with values in the closed lower
// half-plane. Canonical form
//     phi(z) = alpha z + beta + \int (1 + u z) / (z - u) nu(du),  alpha <= 0.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "freeflow/errors.hpp"
#include "freeflow/measure.hpp"

namespace freeflow {

struct NevanlinnaSpec {
  double alpha = 0.0;
  double beta = 0.0;
  Measure nu;

  void validate() const;
};

// a z + b + sum_k residues[k] / (z - poles[k]).
struct RationalNevanlinna {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> poles;
  std::vector<double> residues;

  void validate() const;
  cplx operator()(cplx z) const;
  cplx derivative(cplx z) const;
};

enum class DomainTag { UpperHalfPlane, PlaneMinusLeftRay, Sector };

// coef * z^exponent on the principal branch.
struct PowerLaw {
  cplx coef{1.0, 0.0};
  double exponent = 0.0;
};

// Black-box analytic function. The optional PowerLaw descriptor lets
// algorithms that need closed-form primitives recognise the family.
class AnalyticFn {
public:
  using Fn = std::function<cplx(cplx)>;

  AnalyticFn() = default;
  AnalyticFn(Fn f, std::string name = {}, DomainTag domain = DomainTag::UpperHalfPlane,
             Fn derivative = {})
      : f_(std::move(f)), df_(std::move(derivative)), name_(std::move(name)), domain_(domain) {}

  cplx operator()(cplx z) const { return f_(z); }
  // Analytic derivative when supplied, else a five-point stencil along the
  // real direction (never steps across the real axis).
  cplx derivative(cplx z) const;
  bool hasDerivative() const noexcept { return static_cast<bool>(df_); }
  explicit operator bool() const noexcept { return static_cast<bool>(f_); }

  const std::string& name() const noexcept { return name_; }
  DomainTag domain() const noexcept { return domain_; }
  const std::optional<PowerLaw>& powerLaw() const noexcept { return power_; }
  AnalyticFn& withPowerLaw(PowerLaw p) {
    power_ = p;
    return *this;
  }

private:
  Fn f_;
  Fn df_;
  std::string name_;
  DomainTag domain_ = DomainTag::UpperHalfPlane;
  std::optional<PowerLaw> power_;
};

namespace fns {
AnalyticFn negPow(double rho);      // -z^rho
AnalyticFn pow(double theta);       // z^theta
AnalyticFn constant(cplx c);
AnalyticFn rational(const RationalNevanlinna& r);
AnalyticFn powerLaw(PowerLaw p);    // coef * z^exponent
AnalyticFn canonical(const NevanlinnaSpec& spec, const quad::Options& opt = {});
AnalyticFn sum(const AnalyticFn& f, const AnalyticFn& g);
AnalyticFn scaled(const AnalyticFn& f, double t);
}  // namespace fns

cplx evalNevanlinna(const NevanlinnaSpec& spec, cplx z, const quad::Options& opt = {});
// Derivative of the canonical form, used by Newton solvers.
cplx evalNevanlinnaDerivative(const NevanlinnaSpec& spec, cplx z, const quad::Options& opt = {});

NevanlinnaSpec rationalToCanonical(const RationalNevanlinna& r);

struct RecoveryOptions {
  int ladderMinExp = 6;   // v ladder 2^min .. 2^max for alpha
  int ladderMaxExp = 20;
  double eps = 1e-3;      // boundary offset, Richardson pair (eps, eps/2)
  int gridPoints = 4001;  // u = tan(theta), theta uniform on (-pi/2, pi/2)
  double tolerance = 1e-9;
  double ladderTolerance = 1e-3;
};

struct RecoveredNevanlinna {
  double alpha = 0.0;
  double beta = 0.0;
  Measure nu;                    // table + Lorentzian tails
  double massFromIdentity = 0.0; // alpha - Im f(i)
  double massDeficit = 0.0;      // massFromIdentity - nu.totalMass()
  bool realConstant = false;
  bool atomicWarning = false;

  NevanlinnaSpec spec() const { return {alpha, beta, nu}; }
};

RecoveredNevanlinna recoverParameters(const AnalyticFn& f, const RecoveryOptions& opt = {});

enum class Verdict { Pass, Fail, Inconclusive };
const char* verdictName(Verdict v);

// Log-polar grid over C+ with extra angular nodes near the real axis.
struct SamplingPlan {
  int radial = 64;
  int angular = 64;
  double rMin = 1e-3;
  double rMax = 1e3;
  int boundaryLevels = 6;   // extra angles pi*10^-(k+1) and pi(1 - 10^-(k+1))
  int refineRounds = 4;     // local zoom rounds around the worst point
  double tolerance = 1e-9;

  std::vector<cplx> basePoints() const;
};

struct NevanlinnaCheck {
  Verdict verdict = Verdict::Pass;
  std::optional<cplx> witness;
  double maxImag = -kInf;
  int evaluated = 0;
  int nonFinite = 0;
  // Passing is only a necessary-condition certificate.
  static constexpr const char* kPassMeaning = "necessary-condition certificate only";
};

NevanlinnaCheck isNevanlinnaNumeric(const AnalyticFn& f, const SamplingPlan& plan = {});

// Shared scanner: evaluates `g` on the plan's points (nullopt = evaluation
// failed) and zooms in around the largest imaginary part found. Fails when
// Im g > plan.tolerance somewhere; inconclusive when more than
// `failureFraction` of the evaluations failed.
NevanlinnaCheck scanUpperHalfPlane(const std::function<std::optional<cplx>(cplx)>& g,
                                   const SamplingPlan& plan, double failureFraction = 0.05);

}  // namespace freeflow
