#include "freeflow/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace freeflow {

std::string toString(cplx z) {
  std::ostringstream os;
  os.precision(12);
  os << "(" << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i)";
  return os.str();
}

Measure::Measure(std::vector<Atom> atoms, std::vector<AcPiece> pieces)
    : atoms_(std::move(atoms)), pieces_(std::move(pieces)) {
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const auto& a = atoms_[i];
    if (!std::isfinite(a.position) || !(a.mass > 0.0) || !std::isfinite(a.mass))
      throw InvalidInput("atom masses must be positive and finite, positions finite");
    if (i > 0 && atoms_[i - 1].position == a.position)
      throw InvalidInput("atom positions must be pairwise distinct");
  }
  for (const auto& p : pieces_) {
    if (!(p.lo < p.hi)) throw InvalidInput("a.c. piece needs lo < hi");
    if (!p.density) throw InvalidInput("a.c. piece has no density evaluator");
    if (!(p.scale > 0.0) || !std::isfinite(p.scale))
      throw InvalidInput("a.c. piece scale must be positive");
    if (!p.bounded() && p.tailExponent && !(*p.tailExponent > 1.0))
      throw InvalidInput("tail exponent must exceed 1 for a finite measure");
  }
}

bool Measure::compactlySupported() const {
  return std::all_of(pieces_.begin(), pieces_.end(), [](const AcPiece& p) { return p.bounded(); });
}

double Measure::totalMass(const quad::Options& opt) const {
  return integrate([](double) { return 1.0; }, opt);
}

double Measure::moment(int k, bool positivePartOnly, const quad::Options& opt) const {
  if (k < 0 || k > 2) throw DomainError("moment order must be 0, 1 or 2");

  bool divergesUp = false;
  bool divergesDown = false;
  for (const auto& p : pieces_) {
    const bool upper = !std::isfinite(p.hi);
    const bool lower = !std::isfinite(p.lo) && !positivePartOnly;
    if (!upper && !lower) continue;
    if (!p.tailExponent)
      throw MissingTailMetadata("unbounded a.c. piece without tail exponent");
    if (*p.tailExponent - k <= 1.0) {
      divergesUp = divergesUp || upper;
      divergesDown = divergesDown || lower;
    }
  }
  if (divergesUp || divergesDown) {
    if (k == 0) throw DomainError("measure has infinite mass");
    if (k == 2) return kInf;
    if (divergesUp && divergesDown)
      throw DomainError("first moment is of the form +inf - inf");
    return divergesUp ? kInf : -kInf;
  }

  auto power = [k](double u) { return k == 0 ? 1.0 : (k == 1 ? u : u * u); };
  if (!positivePartOnly) return integrate(power, opt);

  double total = 0.0;
  for (const auto& a : atoms_)
    if (a.position > 0.0) total += power(a.position) * a.mass;
  for (const auto& p : pieces_) {
    if (p.hi <= 0.0) continue;
    AcPiece clipped = p;
    clipped.lo = std::max(p.lo, 0.0);
    total += Measure({}, {clipped}).integrate(power, opt);
  }
  return total;
}

Measure Measure::scaled(double c) const {
  if (!(c > 0.0)) throw InvalidInput("scaling factor must be positive");
  auto atoms = atoms_;
  for (auto& a : atoms) a.mass *= c;
  auto pieces = pieces_;
  for (auto& p : pieces) p.scale *= c;
  return Measure(std::move(atoms), std::move(pieces));
}

Measure Measure::unitedWith(const Measure& other) const {
  std::vector<Atom> atoms = atoms_;
  for (const auto& a : other.atoms_) {
    auto it = std::find_if(atoms.begin(), atoms.end(),
                           [&](const Atom& b) { return b.position == a.position; });
    if (it != atoms.end())
      it->mass += a.mass;
    else
      atoms.push_back(a);
  }
  auto pieces = pieces_;
  pieces.insert(pieces.end(), other.pieces_.begin(), other.pieces_.end());
  return Measure(std::move(atoms), std::move(pieces));
}

namespace densities {

using std::numbers::pi;

static std::string fmtNum(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

AcPiece semicircle(double t, double center) {
  if (!(t > 0.0)) throw InvalidInput("semicircle variance must be positive");
  const double r = 2.0 * std::sqrt(t);
  AcPiece p;
  p.lo = center - r;
  p.hi = center + r;
  p.density = [t, center](double u) {
    const double x = u - center;
    const double v = 4.0 * t - x * x;
    return v > 0.0 ? std::sqrt(v) / (2.0 * pi * t) : 0.0;
  };
  p.label = center == 0.0 ? "semicircle(" + fmtNum(t) + ")"
                          : "semicircle(" + fmtNum(t) + "," + fmtNum(center) + ")";
  return p;
}

AcPiece sqrtNeg() {
  AcPiece p;
  p.lo = -kInf;
  p.hi = 0.0;
  p.density = [](double u) { return u < 0.0 ? std::sqrt(-u) / (2.0 * pi * (1.0 + u * u)) : 0.0; };
  p.tailExponent = 1.5;
  p.label = "sqrtNeg";
  return p;
}

AcPiece invSqrtNeg() {
  AcPiece p;
  p.lo = -kInf;
  p.hi = 0.0;
  p.density = [](double u) {
    return u < 0.0 ? 1.0 / (2.0 * pi * std::sqrt(-u) * (1.0 + u * u)) : 0.0;
  };
  p.tailExponent = 2.5;
  p.label = "invSqrtNeg";
  return p;
}

AcPiece cauchy(double scale, double center) {
  if (!(scale > 0.0)) throw InvalidInput("Cauchy scale must be positive");
  AcPiece p;
  p.lo = -kInf;
  p.hi = kInf;
  p.density = [scale, center](double u) {
    const double x = u - center;
    return scale / (pi * (x * x + scale * scale));
  };
  p.tailExponent = 2.0;
  p.label = "cauchy(" + fmtNum(scale) + "," + fmtNum(center) + ")";
  return p;
}

AcPiece lorentzTail(double c, double lo, double hi) {
  if (!(c > 0.0)) throw InvalidInput("lorentzTail coefficient must be positive");
  AcPiece p;
  p.lo = lo;
  p.hi = hi;
  p.density = [c](double u) { return c / (1.0 + u * u); };
  if (!p.bounded()) p.tailExponent = 2.0;
  p.label = "lorentzTail(" + fmtNum(c) + ")";
  return p;
}

AcPiece table(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw InvalidInput("density table needs at least two points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second))
      throw InvalidInput("density table entries must be finite");
    if (points[i].second < 0.0) throw InvalidInput("density table values must be >= 0");
    if (i > 0 && !(points[i].first > points[i - 1].first))
      throw InvalidInput("density table abscissae must be strictly increasing");
  }
  AcPiece p;
  p.lo = points.front().first;
  p.hi = points.back().first;
  p.table = points;
  p.density = [pts = std::move(points)](double u) {
    if (u < pts.front().first || u > pts.back().first) return 0.0;
    auto it = std::upper_bound(pts.begin(), pts.end(), u,
                               [](double x, const auto& e) { return x < e.first; });
    if (it == pts.end()) return pts.back().second;
    if (it == pts.begin()) return pts.front().second;
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    const double w = (u - x0) / (x1 - x0);
    return (1.0 - w) * y0 + w * y1;
  };
  p.label = "table";
  return p;
}

}  // namespace densities
}  // namespace freeflow
