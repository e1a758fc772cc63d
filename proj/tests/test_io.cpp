#include <cmath>
#include <sstream>

#include "doctest.h"
#include "freeflow/io.hpp"

using namespace freeflow;

TEST_CASE("number syntax") {
  CHECK(io::parseNumber("0.5") == 0.5);
  CHECK(io::parseNumber(" -2 ") == -2.0);
  CHECK(io::parseNumber("+3e2") == 300.0);
  CHECK(std::abs(io::parseNumber("1/3") - 1.0 / 3.0) < 1e-16);
  CHECK(std::abs(io::parseNumber("-1/4") + 0.25) < 1e-16);
  CHECK(std::abs(io::parseNumber("0.333\xE2\x80\xA6") - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(io::parseNumber("0.333...") - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(io::parseNumber("-0.1666...") + 1.0 / 6.0) < 1e-15);
  CHECK_THROWS_AS(io::parseNumber("abc"), InvalidInput);
  CHECK_THROWS_AS(io::parseNumber("1/0"), InvalidInput);
  CHECK_THROWS_AS(io::parseNumber("3..."), InvalidInput);
  CHECK_THROWS_AS(io::parseNumber(""), InvalidInput);
}

TEST_CASE("grids") {
  const auto g = io::parseGrid("-1:1:5");
  REQUIRE(g.size() == 5);
  CHECK(g.front() == -1.0);
  CHECK(g.back() == 1.0);
  CHECK(g[2] == 0.0);
  CHECK_THROWS_AS(io::parseGrid("0:1:1"), ConfigError);
  CHECK_THROWS_AS(io::parseGrid("1:0:5"), ConfigError);
  CHECK_THROWS_AS(io::parseGrid("0:1"), ConfigError);
  CHECK_THROWS_AS(io::parseGrid("0:1:2.5"), ConfigError);
}

TEST_CASE("double formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1.0, 0.0}) {
    const std::string s = io::formatDouble(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(io::formatDouble(-0.0) == "0");
  CHECK(io::formatDouble(std::nan("")) == "nan");
  CHECK(io::formatDouble(-INFINITY) == "-inf");
}

TEST_CASE("function specs") {
  const cplx z{0.3, 1.7};
  CHECK(std::abs(io::parseFunction("negPow(1/2)")(z) + std::sqrt(z)) < 1e-15);
  CHECK(std::abs(io::parseFunction("pow(-0.5)")(z) - std::pow(z, -0.5)) < 1e-15);
  CHECK(io::parseFunction("const(0,-1)")(z) == cplx{0.0, -1.0});
  const auto r = io::parseFunction("rational(a=-1, b=0.5, poles=[0, 2], residues=[1, 1/2])");
  CHECK(std::abs(r(z) - (-z + 0.5 + 1.0 / z + 0.5 / (z - 2.0))) < 1e-14);
  CHECK_THROWS_AS(io::parseFunction("rational(a=1,b=0,poles=[],residues=[])"), InvalidInput);
  CHECK_THROWS_AS(io::parseFunction("bogus(1)"), InvalidInput);
  CHECK_THROWS_AS(io::parseFunction("negPow(1,2)"), InvalidInput);
  CHECK_THROWS_AS(io::parseFunction("negPow(1"), InvalidInput);

  CHECK(std::holds_alternative<PowerPsi>(io::parsePsi("negPow(0.5)")));
  CHECK(std::holds_alternative<ConstantPsi>(io::parsePsi("const(0,-1)")));
  CHECK(std::holds_alternative<RationalNevanlinna>(io::parsePsi("rational(a=-1,b=0,poles=[0],residues=[1])")));
  CHECK(std::holds_alternative<NevanlinnaSpec>(
      io::parsePsi(R"({"alpha":0,"beta":-0.7,"nu":{"ac":[{"density":"sqrtNeg","scale":2}]}})")));
}

TEST_CASE("measure JSON round trip") {
  const char* text = R"J({
  "atoms": [{"u": -2, "mass": 0.3}],
  "ac": [
    {"density": "semicircle(0.5,-0.5)", "scale": 0.4},
    {"density": "sqrtNeg"},
    {"density": "table", "table": [[0, 0], [1, 2], [2, 0]]},
    {"density": "lorentzTail(0.1)", "lo": 5, "hi": "inf"}
  ]
})J";
  const Measure m = io::measureFromJson(io::parseJson(text));
  CHECK(m.atoms().size() == 1);
  REQUIRE(m.pieces().size() == 4);
  CHECK(m.pieces()[1].lo == -kInf);
  const io::Json j = io::toJson(m);
  const Measure back = io::measureFromJson(io::parseJson(j.dump()));
  CHECK(std::abs(back.totalMass() - m.totalMass()) < 1e-12);
  CHECK(io::toJson(back).dump() == j.dump());
}

TEST_CASE("schema errors carry path and line") {
  const char* text = "{\n  \"atoms\": [\n    {\"u\": 0, \"mass\": -1}\n  ]\n}\n";
  try {
    io::measureFromJson(io::parseJson(text, "m.json"));
    FAIL("expected a schema error");
  } catch (const io::SchemaError& e) {
    CHECK(e.path() == "/atoms/0/mass");
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("m.json:3") == 0);
  }
  try {
    io::nevanlinnaSpecFromJson(io::parseJson("{\"alpha\": 0,\n\"gamma\": 1}", "s.json"));
    FAIL("expected a schema error");
  } catch (const io::SchemaError& e) {
    CHECK(e.path() == "/gamma");
    CHECK(e.line() == 2);
  }
  try {
    io::parseJson("{\n\"a\": [1,\n 2,,]\n}", "bad.json");
    FAIL("expected a parse error");
  } catch (const io::SchemaError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(io::rationalFromJson(io::parseJson(R"({"a":-1,"poles":[0],"residues":[]})")),
                  io::SchemaError);
  CHECK_THROWS_AS(io::measureFromJson(io::parseJson(R"({"ac":[{"density":"nope"}]})")),
                  io::SchemaError);
}

TEST_CASE("density CSV has an explicit flag column") {
  DensityTable t;
  t.x = {0.0, 1.0};
  t.density = {0.25, std::nan("")};
  t.flags = {PointFlag::Ok, PointFlag::NonFinite};
  std::ostringstream os;
  io::writeDensityCsv(os, t, "u");
  CHECK(os.str() == "u,density,flag\n0,0.25,ok\n1,nan,nonfinite\n");
}
