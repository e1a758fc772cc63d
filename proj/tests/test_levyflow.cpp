#include <cmath>
#include <numbers>

#include "doctest.h"
#include "freeflow/levyflow.hpp"
#include "support.hpp"

using namespace freeflow;
using std::numbers::pi;
using testing::checkClose;

namespace {
const cplx I{0.0, 1.0};

// psi = -z gives phi(w) = -sqrt(2w) and F_t(z) = z + t sqrt(2z) + t^2/2.
cplx sqrtFlow(cplx z, double t) { return z + t * std::sqrt(2.0 * z) + t * t / 2.0; }
cplx sqrtFlowInverse(cplx z, double t) { return z - t * std::sqrt(2.0 * z) + t * t / 2.0; }

const FlowField& sqrtField() {
  static const FlowField ff = buildFal2(RationalNevanlinna{-1.0, 0.0, {}, {}});
  return ff;
}
const FlowField& cubeField() {
  static const FlowField ff = buildFal2(PowerPsi{0.5});
  return ff;
}
const FlowField& constField() {
  static const FlowField ff = buildFal2(ConstantPsi{-I});
  return ff;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

std::vector<cplx> grid20() {
  std::vector<cplx> g;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) g.push_back({-3.0 + 6.0 * i / 19.0, 0.1 + 3.0 * j / 19.0});
  return g;
}
}  // namespace

TEST_CASE("buildFal2 outputs") {
  for (cplx w : testing::upperPoints(30, 5)) {
    checkClose(cubeField().phi()(w), -std::pow(1.5 * w, 1.0 / 3.0), 1e-8 * std::max(1.0, std::abs(w)));
    checkClose(sqrtField().phi()(w), -std::sqrt(2.0 * w), 1e-8 * std::max(1.0, std::abs(w)));
    checkClose(constField().phi()(w), -I, 0.0);
  }
  REQUIRE(cubeField().certificate());
  CHECK(cubeField().certificate()->contains);
  CHECK_THROWS_AS(buildFal2(RationalNevanlinna{0.0, 0.0, {0.0}, {1.0}}), NotContaining);
  CHECK_THROWS_AS(buildFal2(ConstantPsi{1.0}), NotContaining);
}

TEST_CASE("FlowField invariants") {
  CHECK_NOTHROW(sqrtField().validate());
  CHECK_NOTHROW(cubeField().validate());
  CHECK_NOTHROW(constField().validate());
  CHECK_THROWS_AS(FlowField(AnalyticFn([](cplx z) { return z; })).validate(), NotNevanlinna);
  CHECK_THROWS_AS(FlowField(AnalyticFn([](cplx z) { return -0.5 * z; })).validate(), InvalidInput);
}

TEST_CASE("conformal flow") {
  checkClose(flowConformal(sqrtField(), I, 1.0), {1.5, 2.0}, 1e-10);
  checkClose(flowConformal(constField(), I, 2.0), 3.0 * I, 1e-14);
  const cplx z{0.3, 0.8};
  CHECK(flowConformal(cubeField(), z, 0.0) == z);
  CHECK(flowOde(cubeField(), z, 0.0) == z);
}

TEST_CASE("ODE flow") {
  checkClose(flowOde(sqrtField(), I, 1.0), {1.5, 2.0}, 1e-6);
  const FlowField inv(AnalyticFn([](cplx w) { return 1.0 / w; }, "inv", DomainTag::UpperHalfPlane,
                                 [](cplx w) { return -1.0 / (w * w); }));
  checkClose(flowOde(inv, 3.0 * I, 1.0), I * std::sqrt(11.0), 1e-6);
  CHECK_THROWS_AS(flowOde(inv, 3.0 * I, -1.0), DomainError);
  CHECK_THROWS_AS(flowOde(inv, -I, 1.0), DomainError);
}

TEST_CASE("ODE safeguard stops at the boundary") {
  // phi = i is not Nevanlinna: F' = -i drives every point into the real axis.
  const FlowField down(AnalyticFn([](cplx) { return I; }));
  CHECK_THROWS_AS(flowOde(down, {0.0, 0.5}, 2.0), StepUnderflow);
}

TEST_CASE("flow inverse") {
  checkClose(flowInverse(constField(), 3.0 * I, 2.0), I, 1e-14);
  checkClose(flowInverse(sqrtField(), {1.5, 2.0}, 1.0), I, 1e-8);
  for (cplx z : testing::upperPoints(50, 77, 0.1, 10.0))
    checkClose(flowInverse(cubeField(), flowConformal(cubeField(), z, 0.7), 0.7), z, 1e-7);
  // Points below F_t(C+) have no preimage in C+.
  CHECK_THROWS_AS(flowInverse(constField(), 0.5 * I, 2.0), OutsideImage);
  CHECK_THROWS_AS(flowConformal(constField(), 0.5 * I, -2.0), OutsideImage);
}

TEST_CASE("ODE inverse without a conformal route") {
  const FlowField bare(AnalyticFn([](cplx w) { return -std::sqrt(2.0 * w); }));
  REQUIRE_FALSE(bare.hasConformalRoute());
  for (cplx z : {cplx{1.5, 2.0}, cplx{-1.0, 3.0}, cplx{4.0, 1.0}})
    checkClose(flowInverse(bare, z, 1.0), sqrtFlowInverse(z, 1.0), 1e-6);
}

TEST_CASE("flow routes agree with the closed form") {
  for (double t : {0.25, 1.0, 2.0}) {
    for (cplx z : grid20()) {
      const cplx want = sqrtFlow(z, t);
      checkClose(flowConformal(sqrtField(), z, t), want, 1e-6);
      checkClose(flowOde(sqrtField(), z, t), want, 1e-6);
    }
  }
}

TEST_CASE("semigroup law, monotone imaginary part, normalization") {
  const auto pts = testing::upperPoints(50, 81, 0.1, 5.0);
  for (const FlowField* ff : {&sqrtField(), &cubeField(), &constField()}) {
    for (double s : {0.3, 0.7, 1.1}) {
      for (double t : {0.3, 0.7, 1.1}) {
        for (cplx z : pts) {
          const cplx a = flowConformal(*ff, z, s + t);
          checkClose(flowConformal(*ff, flowConformal(*ff, z, t), s), a, 1e-6 * std::max(1.0, std::abs(a)));
          checkClose(flowOde(*ff, flowOde(*ff, z, t), s), a, 1e-6 * std::max(1.0, std::abs(a)));
          CHECK(a.imag() >= z.imag() - 1e-9);
        }
      }
    }
    const cplx big{0.0, 1e10};
    CHECK(std::abs(flowConformal(*ff, big, 1.0) / big - 1.0) < 1e-4);
  }
}

TEST_CASE("route agreement for every built field") {
  for (const FlowField* ff : {&sqrtField(), &cubeField(), &constField()}) {
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 20; ++j) {
        const cplx z{-3.0 + 6.0 * i / 19.0, 0.1 + 3.0 * j / 19.0};
        const double t = 2.0 * ((i + j) % 9) / 8.0;
        const cplx a = flowConformal(*ff, z, t);
        CHECK(std::abs(a - flowOde(*ff, z, t)) <= 1e-6 * std::max(1.0, std::abs(a)));
      }
    }
  }
}

TEST_CASE("generator scaling") {
  // psi(z) -> c psi(z/c) for psi = -z leaves psi unchanged; in the closed
  // form z -> cz, t -> sqrt(c) t rescales the flow by c.
  const double c = 2.0;
  for (cplx z : testing::upperPoints(20, 83, 0.1, 5.0)) {
    for (double t : {0.3, 1.0}) {
      checkClose(flowConformal(sqrtField(), c * z, std::sqrt(c) * t), c * flowConformal(sqrtField(), z, t), 1e-8 * std::abs(c * z + 1.0));
    }
  }
}

TEST_CASE("FAL2 verdicts") {
  CHECK(fal2Check(constField()).verdict == Verdict::Pass);
  CHECK(fal2Check(cubeField()).verdict == Verdict::Pass);
  CHECK(fal2Check(fns::constant(-I)).verdict == Verdict::Pass);
  CHECK(fal2Check(fns::powerLaw({-std::pow(1.5, 1.0 / 3.0), 1.0 / 3.0})).verdict == Verdict::Pass);

  const auto bad = fal2Check(fns::pow(-0.5));
  CHECK(bad.verdict == Verdict::Fail);
  REQUIRE(bad.witness);
  REQUIRE(bad.value);
  CHECK(bad.value->imag() > 1e-8);
  CHECK(bad.witness->imag() > 0.0);
  CHECK_THROWS_AS(fal2Check(fns::negPow(0.5), {0.0}), InvalidInput);
  CHECK_THROWS_AS(fal2Check(fns::negPow(1.0)), InvalidInput);
}

TEST_CASE("the z^(-1/2) witness sits near a genuine branch point") {
  // phi(F_t^-1(w)) = (w^{3/2} + 3t/2)^{-1/3} blows up at w0 = (3t/2)^{2/3} e^{2 pi i/3}.
  const auto bad = fal2Check(fns::pow(-0.5), {1.0});
  REQUIRE(bad.witness);
  const cplx w = *bad.witness;
  const cplx v = std::pow(w, 1.5) + 1.5;
  CHECK(v.imag() < 0.0);
  CHECK(std::arg(w) > pi / 2);
}

TEST_CASE("FAL2 check through the ODE route") {
  SamplingPlan plan;
  plan.radial = 10;
  plan.angular = 10;
  plan.boundaryLevels = 1;
  plan.refineRounds = 1;
  plan.rMin = 0.1;
  plan.rMax = 10.0;
  plan.tolerance = 1e-8;
  const FlowField bare(fns::constant(-I));
  CHECK(fal2Check(bare, {0.5}, plan).route == "conjugacy");
  const FlowField sq(AnalyticFn([](cplx w) { return -std::sqrt(2.0 * w); }));
  const auto r = fal2Check(sq, {0.5}, plan);
  CHECK(r.route == "ode");
  CHECK(r.verdict != Verdict::Fail);
}

TEST_CASE("marginal laws") {
  const auto c = marginalLaw(constField(), 1.0, {0.0});
  CHECK(std::abs(c.table.density[0] - 1.0 / pi) < 1e-4);
  // G_{mu_1}(x) = 1/(x + sqrt(2x) + 1/2), sqrt(2x) = 2i at x = -2.
  const auto s = marginalLaw(sqrtField(), 1.0, {-2.0});
  CHECK(std::abs(s.table.density[0] - 2.0 / (6.25 * pi)) < 1e-4);

  const auto grid = linspace(-30.0, 4.0, 4001);
  const auto full = marginalLaw(sqrtField(), 1.0, grid);
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    mass += 0.5 * (full.table.density[i] + full.table.density[i + 1]) * (grid[i + 1] - grid[i]);
  // Density ~ |x|^{-3/2} on the left: add the tail beyond -30 analytically.
  const double tail = 2.0 * std::sqrt(2.0) / pi / std::sqrt(30.0);
  CHECK(std::abs(mass + tail - 1.0) < 1e-2);

  const auto zero = marginalLaw(sqrtField(), 0.0, linspace(-3.0, 3.0, 100));
  for (std::size_t i = 0; i < zero.table.x.size(); ++i)
    if (zero.table.flags[i] == PointFlag::Ok) CHECK(std::abs(zero.table.density[i]) < 1e-3);
  CHECK(zero.table.massDeficit > 0.99);
}

TEST_CASE("transition kernels") {
  const auto grid = linspace(-5.0, 5.0, 101);
  for (double t : {0.5, 2.0}) {
    for (double x : {-1.0, 0.7}) {
      const auto k = transitionKernel(constField(), t, x, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = grid[i];
        CHECK(std::abs(k.table.density[i] - t / (pi * ((u - x) * (u - x) + t * t))) < 1e-4);
      }
    }
  }
  const auto z = transitionKernel(sqrtField(), 0.0, 0.4, linspace(-2.0, 2.0, 50));
  CHECK(z.table.massDeficit > 0.99);

  const auto a = transitionKernel(sqrtField(), 1.0, 0.0, linspace(-4.0, 4.0, 41));
  const auto b = marginalLaw(sqrtField(), 1.0, linspace(-4.0, 4.0, 41));
  for (std::size_t i = 0; i < a.table.x.size(); ++i) CHECK(std::abs(a.table.density[i] - b.table.density[i]) < 1e-8);
}

TEST_CASE("kernel positivity and normalization") {
  const auto grid = linspace(-200.0, 200.0, 40001);
  const auto k = transitionKernel(constField(), 1.0, 0.3, grid);
  double mass = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(k.table.density[i] >= -1e-9);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    mass += 0.5 * (k.table.density[i] + k.table.density[i + 1]) * (grid[i + 1] - grid[i]);
  // Cauchy tails beyond |u| = 200 carry about 2/(200 pi).
  CHECK(std::abs(mass + 2.0 / (200.0 * pi) - 1.0) < 1e-3);
  CHECK(std::abs(k.table.massDeficit - 2.0 / (200.0 * pi)) < 1e-3);
}

TEST_CASE("increment transforms") {
  const cplx z{0.5, 20.0};
  checkClose(incrementTransform(constField(), 0.5, 2.0, z), -1.5 * I, 1e-12);
  checkClose(incrementTransform(sqrtField(), 0.5, 2.0, z),
             -1.5 * std::sqrt(2.0 * z) + (4.0 - 0.25) / 2.0, 1e-8);
  CHECK(incrementTransform(sqrtField(), 1.0, 1.0, z) == cplx{});
  // Same t - s, different (s, t): increments are not homogeneous.
  CHECK(std::abs(incrementTransform(sqrtField(), 0.0, 1.0, z) - incrementTransform(sqrtField(), 1.0, 2.0, z)) > 0.5);
  CHECK_THROWS_AS(incrementTransform(sqrtField(), 2.0, 1.0, z), DomainError);
}

TEST_CASE("open question probe runs for rho > 1/2") {
  for (double rho : {0.6, 0.75, 0.9}) {
    const auto r = fal2Check(fns::negPow(rho));
    CHECK(r.verdict != Verdict::Inconclusive);
  }
  for (double rho : {0.2, 1.0 / 3.0, 0.5}) CHECK(fal2Check(fns::negPow(rho)).verdict == Verdict::Pass);
}
