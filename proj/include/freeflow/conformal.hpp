#pragma once

// Primitives Psi of -psi for Nevanlinna psi. Psi maps C+ univalently onto a
// domain starlike at -infinity; Phi = Psi^-1 is computed by Newton.

#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "freeflow/nevanlinna.hpp"

namespace freeflow {

// psi(z) = -z^sigma, 0 < sigma <= 1.
struct PowerPsi {
  double sigma = 0.5;
};

// psi(z) = c with Im c <= 0.
struct ConstantPsi {
  cplx c{0.0, -1.0};
};

using PsiSource = std::variant<NevanlinnaSpec, RationalNevanlinna, PowerPsi, ConstantPsi>;

AnalyticFn psiFunction(const PsiSource& src, const quad::Options& opt = {});
std::string describe(const PsiSource& src);

struct ContainmentCertificate {
  bool contains = false;
  double m2plus = 0.0;     // \int_{u>0} u^2 dnu
  double alpha = 0.0;
  double decisive = 0.0;   // beta + \int u dnu, snapped to 0 within tolerance
  double decisiveRaw = 0.0;
  std::string reason;
};

// Psi(C+) contains a translate of C+ iff \int_{u>0} u^2 dnu < inf and either
// alpha < 0, or alpha = 0 and beta + \int u dnu < 0.
ContainmentCertificate containsHalfplaneTranslate(const NevanlinnaSpec& psi, double tol = 1e-8,
                                                  const quad::Options& opt = {});
ContainmentCertificate containsHalfplaneTranslate(const PsiSource& psi, double tol = 1e-8);

struct InvertOptions {
  bool useCache = true;
  std::size_t cacheCapacity = 4096;
  double residualTol = 1e-11;  // relative to max(1, |w|)
};

class ConformalPair {
public:
  explicit ConformalPair(PsiSource psi, InvertOptions opt = {}, const quad::Options& quadOpt = {});

  const PsiSource& source() const noexcept { return src_; }
  const AnalyticFn& psi() const noexcept { return psi_; }

  // Normalized primitive: Psi(z) = Psi_raw(z) + normalization().
  cplx Psi(cplx z) const { return raw(z) + shift_; }
  cplx PsiPrime(cplx z) const { return -psi_(z); }
  // Phi = Psi^-1 on the image; OutsideImage when Newton does not converge.
  cplx Phi(cplx w) const;
  cplx normalization() const noexcept { return shift_; }

  // Closed forms exist for rational, power and constant psi; otherwise Psi
  // is a single nu-quadrature anchored at Psi(i) = 0.
  bool closedForm() const noexcept { return !std::holds_alternative<NevanlinnaSpec>(src_); }
  // Boundary values (Im z = 0) are available for the closed forms.
  bool boundaryDefined() const noexcept { return closedForm(); }

  // Copy shifted so that the image contains C+ (only needed for general
  // spec sources; closed forms already satisfy it). Throws NotContaining.
  ConformalPair normalized() const;
  ConformalPair withNormalization(cplx shift) const;
  ConformalPair withoutCache() const;

private:
  struct Cache {
    mutable std::shared_mutex mutex;
    std::vector<std::pair<cplx, cplx>> entries;  // (raw w, z)
  };

  cplx raw(cplx z) const;
  std::optional<cplx> newtonFrom(cplx target, cplx seed) const;
  std::optional<cplx> continuation(cplx from, cplx fromZ, cplx to) const;
  std::optional<cplx> cachedSeed(cplx target) const;
  void remember(cplx target, cplx z) const;
  bool admissible(cplx z) const;

  PsiSource src_;
  AnalyticFn psi_;
  InvertOptions opt_;
  quad::Options quad_;
  cplx shift_{};
  std::shared_ptr<Cache> cache_;
};

cplx primitiveEval(const ConformalPair& pair, cplx z);
cplx invertPrimitive(const ConformalPair& pair, cplx w);

struct Slit {
  double height = 0.0;
  double tip = 0.0;
};

// Image of C+ under Psi for rational psi with a < 0: the plane minus the
// half-lines {p + i q_j : p >= p_j}.
struct SlitImage {
  std::vector<Slit> slits;  // sorted by height

  // Starlike description: Omega = {p + iq : p < rayBound(q)}.
  double rayBound(double q, double tol = 1e-12) const;
  double distance(cplx w) const;
  bool contains(cplx w, double tol = 1e-12) const { return distance(w) > tol; }
};

SlitImage slitImage(const RationalNevanlinna& r);

struct PolylinePoint {
  double s = 0.0;  // parameter along the source line
  cplx w;
};

struct Polyline {
  int id = 0;
  std::string kind;  // "im", "re", "boundary"
  double level = 0.0;
  std::vector<PolylinePoint> points;
};

struct FlowlineOptions {
  int imLines = 8;
  int reLines = 8;
  double reMin = -3.0;
  double reMax = 3.0;
  double imMax = 3.0;
  int samples = 200;
};

// Images under Psi of the lines Im z = const and Re z = const.
std::vector<Polyline> flowlineGrid(const ConformalPair& pair, const FlowlineOptions& opt = {});
// Images of the real axis pieces between poles (closed forms only).
std::vector<Polyline> boundaryTrace(const ConformalPair& pair, double reMin = -5.0,
                                    double reMax = 5.0, int samples = 400);

}  // namespace freeflow
