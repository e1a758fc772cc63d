#pragma once

// Flows F_t solving dF_t/dt + phi(F_t) = 0, F_0 = id, for Nevanlinna
// generators phi, and the Markov semigroup they induce (started at delta_0).

#include <memory>
#include <optional>
#include <vector>

#include "freeflow/cauchy.hpp"
#include "freeflow/conformal.hpp"
#include "freeflow/nevanlinna.hpp"
#include "freeflow/ode.hpp"

namespace freeflow {

// For phi(w) = C w^theta (theta < 1) the flow conjugates to a translation:
//   Phi_c(w) = -w^(1-theta) / (C (1-theta)),  Psi_c = Phi_c^-1,
//   F_t = Psi_c(Phi_c + t). Principal branches throughout.
struct PowerConjugacy {
  cplx coef;
  double theta = 0.0;

  cplx Phi(cplx w) const;
  cplx Psi(cplx zeta) const;
  // phi(F_t^-1(w)) = phi(Psi_c(Phi_c(w) - t)), as one principal power.
  cplx phiAfterInverse(cplx w, double t) const;
};

class FlowField {
public:
  explicit FlowField(AnalyticFn phi, std::shared_ptr<const ConformalPair> pair = nullptr,
                     OdeConfig ode = {});

  const AnalyticFn& phi() const noexcept { return phi_; }
  const std::shared_ptr<const ConformalPair>& pair() const noexcept { return pair_; }
  const std::optional<PowerConjugacy>& conjugacy() const noexcept { return conj_; }
  const std::optional<ContainmentCertificate>& certificate() const noexcept { return cert_; }
  const OdeConfig& ode() const noexcept { return ode_; }
  bool hasConformalRoute() const noexcept { return pair_ || conj_; }

  FlowField& withCertificate(ContainmentCertificate c) {
    cert_ = std::move(c);
    return *this;
  }
  FlowField withOde(OdeConfig c) const {
    FlowField f = *this;
    f.ode_ = c;
    return f;
  }
  // phi passes isNevanlinnaNumeric and phi(iy)/(iy) -> 0.
  void validate(const SamplingPlan& plan = {}) const;

private:
  AnalyticFn phi_;
  std::shared_ptr<const ConformalPair> pair_;
  std::optional<PowerConjugacy> conj_;
  std::optional<ContainmentCertificate> cert_;
  OdeConfig ode_;
};

struct BuildOptions {
  bool validate = true;
  InvertOptions invert;
};

// phi = psi o Phi for the normalized pair; the constant branch passes
// through. Throws NotContaining when Psi(C+) contains no translate of C+.
FlowField buildFal2(const PsiSource& psi, const BuildOptions& opt = {});

cplx flowConformal(const FlowField& ff, cplx z, double t);
cplx flowOde(const FlowField& ff, cplx z, double t);
// Conformal route when available, else the ODE.
cplx flow(const FlowField& ff, cplx z, double t);
cplx flowInverse(const FlowField& ff, cplx z, double t);

struct Fal2Result {
  Verdict verdict = Verdict::Pass;
  std::optional<double> t;
  std::optional<cplx> witness;
  std::optional<cplx> value;  // phi(F_t^-1(witness))
  std::string route;          // "pair", "conjugacy" or "ode"
  std::vector<NevanlinnaCheck> perTime;
};

std::vector<double> defaultFal2Times();
// Default scan plan with the violation threshold Im > 1e-8.
SamplingPlan fal2Plan();
Fal2Result fal2Check(const FlowField& ff, const std::vector<double>& tSamples = defaultFal2Times(),
                     const SamplingPlan& plan = fal2Plan());
Fal2Result fal2Check(const AnalyticFn& phi,
                     const std::vector<double>& tSamples = defaultFal2Times(),
                     const SamplingPlan& plan = fal2Plan());

struct KernelSlice {
  double t = 0.0;
  double x = 0.0;
  DensityTable table;
};

KernelSlice marginalLaw(const FlowField& ff, double t, const std::vector<double>& xGrid,
                        double eps = 1e-3);
KernelSlice transitionKernel(const FlowField& ff, double t, double x,
                             const std::vector<double>& uGrid, double eps = 1e-3);

// phi_{mu_{s,t}}(z) = phi_{mu_t}(z) - phi_{mu_s}(z).
cplx incrementTransform(const FlowField& ff, double s, double t, cplx z);

}  // namespace freeflow
