#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "freeflow/nevanlinna.hpp"
#include "support.hpp"

using namespace freeflow;
using std::numbers::pi;
using testing::checkClose;

namespace {
const cplx I{0.0, 1.0};

NevanlinnaSpec mixedSpec() {
  return {-0.3, 0.7,
          Measure({{-1.0, 0.25}, {2.0, 0.1}},
                  {densities::semicircle(0.5, 0.4), densities::cauchy(1.5, -2.0)})};
}
}  // namespace

TEST_CASE("canonical evaluation") {
  const NevanlinnaSpec delta{0.0, 0.0, Measure::dirac(0.0)};
  checkClose(evalNevanlinna(delta, I), -I, 1e-14);
  checkClose(evalNevanlinna(delta, 2.0 * I), -I / 2.0, 1e-14);
  const NevanlinnaSpec lin{-1.0, 0.0, Measure()};
  checkClose(evalNevanlinna(lin, {1.0, 1.0}), {-1.0, -1.0}, 1e-14);
  CHECK_THROWS_AS(evalNevanlinna(lin, 1.0), DomainError);
  CHECK_THROWS_AS(evalNevanlinna(lin, {0.0, -1.0}), DomainError);
}

TEST_CASE("value at i reads off alpha, beta and the mass") {
  const auto s = mixedSpec();
  const double mass = s.nu.totalMass();
  checkClose(evalNevanlinna(s, I), s.alpha * I + s.beta - I * mass, 1e-8);
}

TEST_CASE("imaginary part stays non-positive") {
  const auto s = mixedSpec();
  double worst = -kInf;
  for (cplx z : testing::upperPoints(200, 7, 1e-3, 1e3)) worst = std::max(worst, evalNevanlinna(s, z).imag());
  CHECK(worst <= 1e-9);
}

TEST_CASE("canonical triples of the power examples") {
  // -z^{1/2} = -1/sqrt2 + \int (1+uz)/(z-u) 2 sqrtNeg(u) du.
  AcPiece p = densities::sqrtNeg();
  p.scale = 2.0;
  const NevanlinnaSpec sq{0.0, -1.0 / std::sqrt(2.0), Measure({}, {p})};
  AcPiece q = densities::invSqrtNeg();
  q.scale = 2.0;
  const NevanlinnaSpec inv{0.0, 1.0 / std::sqrt(2.0), Measure({}, {q})};
  for (cplx z : testing::upperPoints(20, 3)) {
    checkClose(evalNevanlinna(sq, z), -std::sqrt(z), 1e-8 * std::max(1.0, std::abs(z)));
    checkClose(evalNevanlinna(inv, z), 1.0 / std::sqrt(z), 1e-8 * std::max(1.0, std::abs(1.0 / std::sqrt(z))));
  }
}

TEST_CASE("rational to canonical") {
  auto s = rationalToCanonical({-1.0, 0.0, {0.0}, {1.0}});
  CHECK(s.alpha == -1.0);
  CHECK(s.beta == 0.0);
  REQUIRE(s.nu.atoms().size() == 1);
  CHECK(s.nu.atoms()[0].position == 0.0);
  CHECK(s.nu.atoms()[0].mass == 1.0);

  s = rationalToCanonical({0.0, -1.0, {}, {}});
  CHECK(s.alpha == 0.0);
  CHECK(s.beta == -1.0);
  CHECK(s.nu.empty());

  s = rationalToCanonical({0.0, 0.0, {1.0}, {2.0}});
  CHECK(s.beta == doctest::Approx(-1.0));
  CHECK(s.nu.atoms()[0].mass == doctest::Approx(1.0));

  const RationalNevanlinna r{-0.5, 0.3, {-2.0, 0.5, 3.0}, {1.0, 0.2, 2.5}};
  const auto c = rationalToCanonical(r);
  for (cplx z : testing::upperPoints(100, 11)) checkClose(evalNevanlinna(c, z), r(z), 1e-10);
  CHECK_THROWS_AS(rationalToCanonical({0.0, 0.0, {1.0, 0.0}, {1.0, 1.0}}), InvalidInput);
  CHECK_THROWS_AS(rationalToCanonical({0.0, 0.0, {1.0}, {-1.0}}), InvalidInput);
  CHECK_THROWS_AS(rationalToCanonical({1.0, 0.0, {}, {}}), InvalidInput);
}

TEST_CASE("derivative evaluators match central differences") {
  const auto s = mixedSpec();
  const auto f = fns::canonical(s);
  const double h = 1e-5;
  for (cplx z : testing::upperPoints(10, 5, 0.2, 5.0)) {
    const cplx fd = (f(z + h) - f(z - h)) / (2.0 * h);
    CHECK(std::abs(f.derivative(z) - fd) <= 1e-5 * std::abs(fd));
  }
  const auto g = fns::negPow(0.3);
  for (cplx z : testing::upperPoints(10, 6)) {
    const cplx fd = (g(z + h) - g(z - h)) / (2.0 * h);
    CHECK(std::abs(g.derivative(z) - fd) <= 1e-5 * std::abs(fd));
  }
  const AnalyticFn bare([](cplx z) { return std::exp(-I * z); });
  for (cplx z : testing::upperPoints(10, 8, 0.2, 3.0))
    CHECK(std::abs(bare.derivative(z) + I * std::exp(-I * z)) <= 1e-8 * std::abs(std::exp(-I * z)));
}

TEST_CASE("recovering a constant") {
  const auto r = recoverParameters(fns::constant(-I));
  CHECK(std::abs(r.alpha) < 1e-6);
  CHECK(std::abs(r.beta) < 1e-12);
  // The recovered density is 1/(pi (1 + u^2)), total mass 1.
  CHECK(std::abs(r.nu.totalMass() - 1.0) < 1e-3);
  checkClose(evalNevanlinna(r.spec(), I), -I, 1e-3);

  const auto c = recoverParameters(fns::constant(2.5));
  CHECK(c.realConstant);
  CHECK(c.beta == 2.5);
}

TEST_CASE("recovering a linear function") {
  const auto r = recoverParameters(AnalyticFn([](cplx z) { return -z; }));
  CHECK(std::abs(r.alpha + 1.0) < 1e-3);
  CHECK(std::abs(r.beta) < 1e-12);
  for (const auto& piece : r.nu.pieces())
    for (const auto& [u, d] : piece.table) CHECK(d <= 1e-6);
}

TEST_CASE("roundtrip through the canonical evaluator") {
  AcPiece sc = densities::semicircle();
  sc.scale = 0.3;
  const NevanlinnaSpec s{-0.5, 1.0, Measure({}, {sc})};
  const auto r = recoverParameters(fns::canonical(s));
  CHECK(std::abs(r.alpha + 0.5) < 1e-3);
  CHECK(std::abs(r.beta - 1.0) < 1e-3);
  CHECK(std::abs(r.nu.totalMass() - 0.3) < 1e-3);
  CHECK(std::abs(r.massFromIdentity - 0.3) < 1e-3);
  CHECK_FALSE(r.atomicWarning);
}

TEST_CASE("atoms leave a mass deficit") {
  const NevanlinnaSpec s{0.0, 0.0, Measure::dirac(0.5, 0.4)};
  const auto r = recoverParameters(fns::canonical(s));
  CHECK(std::abs(r.massFromIdentity - 0.4) < 1e-3);
}

TEST_CASE("recovery rejects non-Nevanlinna input") {
  CHECK_THROWS_AS(recoverParameters(AnalyticFn([](cplx z) { return z; })), NotNevanlinna);
  CHECK_THROWS_AS(recoverParameters(AnalyticFn([](cplx z) { return -I + 0.5 * z; })),
                  NotNevanlinna);
}

TEST_CASE("numeric Nevanlinna verdicts") {
  auto v = isNevanlinnaNumeric(fns::negPow(0.5));
  CHECK(v.verdict == Verdict::Pass);
  v = isNevanlinnaNumeric(AnalyticFn([](cplx z) { return z; }));
  CHECK(v.verdict == Verdict::Fail);
  REQUIRE(v.witness);
  CHECK(v.witness->imag() > 1e-9);
  v = isNevanlinnaNumeric(fns::pow(-0.5));
  CHECK(v.verdict == Verdict::Pass);
  // -z^rho leaves the lower half-plane once rho > 1.
  v = isNevanlinnaNumeric(fns::negPow(1.2));
  CHECK(v.verdict == Verdict::Fail);
}

TEST_CASE("evaluator failures carry the offending point") {
  const AnalyticFn bad([](cplx z) -> cplx {
    if (std::abs(z) > 10.0) throw DomainError("too far");
    return -I;
  });
  try {
    isNevanlinnaNumeric(bad);
    FAIL("expected EvaluatorFailure");
  } catch (const EvaluatorFailure& e) {
    CHECK(std::abs(e.point()) > 10.0);
  }
}

TEST_CASE("unevaluable points make the verdict inconclusive") {
  auto chk = scanUpperHalfPlane(
      [](cplx z) -> std::optional<cplx> {
        if (z.real() > 0.0) return std::nullopt;
        return cplx{0.0, -1.0};
      },
      SamplingPlan{});
  CHECK(chk.verdict == Verdict::Inconclusive);
}
