#include "freeflow/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "freeflow/io.hpp"
#include "freeflow/levyflow.hpp"

namespace freeflow::cli {

namespace {

using io::Json;

struct Config {
  std::string command;
  std::string phi, phi2, psi;
  std::string grid, imGrid;
  std::vector<double> t;
  std::vector<double> y;
  double s = 0.0;
  double x = 0.0;
  double eps = 1e-3;
  std::optional<double> tolAbs, tolRel;
  std::string out;
  std::uint64_t seed = 0;
  int samples = 0;
  int imLines = 8, reLines = 8;
  double imMax = 3.0;
  std::string route = "auto";
};

template <class F>
void parallelFor(std::size_t n, F&& f) {
  const std::size_t k = std::min<std::size_t>(threadCap(), n);
  if (k <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < k; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

quad::Options quadOptions(const Config& c) {
  quad::Options q;
  if (c.tolAbs) q.absTol = *c.tolAbs;
  if (c.tolRel) q.relTol = *c.tolRel;
  return q;
}

OdeConfig odeOptions(const Config& c) {
  OdeConfig o;
  if (c.tolAbs) o.absTol = *c.tolAbs;
  if (c.tolRel) o.relTol = *c.tolRel;
  return o;
}

std::vector<double> gridOr(const std::string& spec, const char* fallback) {
  return io::parseGrid(spec.empty() ? fallback : spec);
}

double singleTime(const Config& c, double fallback) {
  if (c.t.empty()) return fallback;
  if (c.t.size() != 1) throw ConfigError("--t takes a single value for " + c.command);
  return c.t.front();
}

std::vector<cplx> complexGrid(const Config& c) {
  const auto xs = gridOr(c.grid, "-3:3:7");
  const auto ys = c.imGrid.empty() ? (c.y.empty() ? std::vector<double>{1.0} : c.y)
                                   : io::parseGrid(c.imGrid);
  std::vector<cplx> pts;
  for (double yv : ys)
    for (double xv : xs) pts.push_back({xv, yv});
  return pts;
}

const char* routeName(const FlowField& ff) {
  if (ff.pair()) return "pair";
  if (ff.conjugacy()) return "conjugacy";
  return "ode";
}

FlowField makeField(const Config& c, Json& man) {
  if (c.phi.empty() == c.psi.empty()) throw ConfigError("give exactly one of --phi and --psi");
  if (!c.psi.empty()) {
    BuildOptions opt;
    opt.invert.useCache = false;
    FlowField ff = buildFal2(io::parsePsi(c.psi), opt).withOde(odeOptions(c));
    if (ff.certificate()) man["certificate"] = io::toJson(*ff.certificate());
    if (ff.pair()) man["normalization"] = io::toJson(ff.pair()->normalization());
    man["route"] = routeName(ff);
    return ff;
  }
  FlowField ff(io::parseFunction(c.phi, quadOptions(c)), nullptr, odeOptions(c));
  ff.validate();
  man["route"] = routeName(ff);
  return ff;
}

cplx flowBy(const Config& c, const FlowField& ff, cplx z, double t) {
  if (c.route == "ode") return flowOde(ff, z, t);
  if (c.route == "conformal") return flowConformal(ff, z, t);
  return flow(ff, z, t);
}

Json pointsJson(const std::vector<cplx>& pts) {
  Json a = Json::array();
  for (cplx z : pts) a.push_back(io::toJson(z));
  return a;
}

Json checkJson(const NevanlinnaCheck& chk) {
  Json j = {{"verdict", verdictName(chk.verdict)},
            {"evaluated", chk.evaluated},
            {"nonFinite", chk.nonFinite}};
  j["maxImag"] = std::isfinite(chk.maxImag) ? Json(chk.maxImag) : Json(nullptr);
  if (chk.witness) j["witness"] = io::toJson(*chk.witness);
  return j;
}

Json densityJson(const DensityTable& t, const std::function<cplx(cplx)>& g) {
  Json values = Json::array(), flags = Json::array();
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    const cplx v = g(cplx{t.x[i], t.eps});
    values.push_back(io::toJson(v));
    flags.push_back(io::flagName(t.flags[i]));
  }
  Json density = Json::array();
  for (double d : t.density) density.push_back(std::isfinite(d) ? Json(d) : Json(nullptr));
  return {{"grid", t.x},       {"eps", t.eps},        {"values", values},
          {"density", density}, {"flags", flags},     {"massDeficit", t.massDeficit}};
}

struct Output {
  std::string body;
  bool json = false;
};

// ---- commands ------------------------------------------------------------

Output nevEval(const Config& c, Json& man) {
  const AnalyticFn f = io::parseFunction(c.phi, quadOptions(c));
  auto pts = complexGrid(c);
  if (c.samples > 0) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> logr(std::log(1e-2), std::log(1e2));
    std::uniform_real_distribution<double> ang(0.0, std::acos(-1.0));
    for (int i = 0; i < c.samples; ++i) {
      const double r = std::exp(logr(rng));
      const double a = ang(rng);
      if (a > 0.0) pts.push_back(std::polar(r, a));
    }
  }
  std::vector<cplx> vals(pts.size());
  parallelFor(pts.size(), [&](std::size_t i) {
    try {
      vals[i] = f(pts[i]);
    } catch (const Error&) {
      vals[i] = {std::nan(""), std::nan("")};
    }
  });
  Json values = Json::array();
  for (cplx v : vals)
    values.push_back(std::isfinite(std::abs(v)) ? io::toJson(v) : Json(nullptr));
  Json res = {{"function", f.name()}, {"grid", pointsJson(pts)}, {"values", values}};
  man["result"] = {{"points", pts.size()}};
  return {res.dump(2) + "\n", true};
}

Output nevRecover(const Config& c, Json& man) {
  const AnalyticFn f = io::parseFunction(c.phi, quadOptions(c));
  RecoveryOptions opt;
  opt.eps = c.eps;
  const auto r = recoverParameters(f, opt);
  Json res = {{"function", f.name()},
              {"alpha", r.alpha},
              {"beta", r.beta},
              {"massFromIdentity", r.massFromIdentity},
              {"massDeficit", r.massDeficit},
              {"realConstant", r.realConstant},
              {"atomicWarning", r.atomicWarning},
              {"nu", io::toJson(r.nu)}};
  man["result"] = {{"alpha", r.alpha}, {"beta", r.beta}, {"massDeficit", r.massDeficit}};
  return {res.dump(2) + "\n", true};
}

Output densityOutput(const Config& c, Json& man, const std::function<cplx(cplx)>& g,
                     const std::vector<double>& grid, const char* column) {
  const DensityTable t = stieltjesInvert(g, grid, c.eps);
  man["result"] = {{"massDeficit", t.massDeficit}, {"points", grid.size()}};
  const bool json = c.out.size() > 5 && c.out.substr(c.out.size() - 5) == ".json";
  if (json) return {densityJson(t, g).dump(2) + "\n", true};
  std::ostringstream os;
  io::writeDensityCsv(os, t, column);
  return {os.str(), false};
}

void recordDomain(const CauchySampler& g, Json& man) {
  try {
    man["domain"] = io::toJson(estimateInversionDomain(g));
  } catch (const Error& e) {
    man["domain"] = {{"error", e.what()}};
  }
}

Output conv(const Config& c, Json& man) {
  if (c.phi.empty() || c.phi2.empty()) throw ConfigError("conv needs --phi and --phi2");
  const auto q = quadOptions(c);
  const AnalyticFn sum = freeConvolve(io::parseFunction(c.phi, q), io::parseFunction(c.phi2, q));
  const auto g = CauchySampler::fromVoiculescu(sum);
  recordDomain(g, man);
  return densityOutput(c, man, [&g](cplx z) { return g(z); }, gridOr(c.grid, "-3:3:201"), "x");
}

Output semigroup(const Config& c, Json& man) {
  const AnalyticFn phi = io::parseFunction(c.phi, quadOptions(c));
  const double t = singleTime(c, 1.0);
  if (!(t > 0.0)) throw ConfigError("semigroup needs --t > 0");
  recordDomain(CauchySampler::fromVoiculescu(fns::scaled(phi, t)), man);
  return densityOutput(c, man, [&](cplx z) { return semigroupMarginal(phi, t, z); },
                       gridOr(c.grid, "-3:3:201"), "x");
}

void writePolylines(io::CsvWriter& w, const std::vector<Polyline>& lines) {
  for (const auto& l : lines)
    for (const auto& p : l.points)
      w.cell(static_cast<double>(l.id)).cell(l.kind).cell(l.level).cell(p.s).cell(p.w.real())
          .cell(p.w.imag()).end();
}

void writeSlits(io::CsvWriter& w, const PsiSource& psi, int firstId, Json& man) {
  const auto* r = std::get_if<RationalNevanlinna>(&psi);
  if (!r || !(r->a < 0.0)) return;
  const SlitImage img = slitImage(*r);
  Json slits = Json::array();
  int id = firstId;
  for (const auto& s : img.slits) {
    w.cell(static_cast<double>(id++)).cell(std::string("slit")).cell(s.height).cell(0.0)
        .cell(s.tip).cell(s.height).end();
    slits.push_back({{"height", s.height}, {"tip", s.tip}});
  }
  man["slits"] = slits;
}

Output conformalImage(const Config& c, Json& man) {
  if (c.psi.empty()) throw ConfigError("conformal-image needs --psi");
  const PsiSource psi = io::parsePsi(c.psi);
  const ConformalPair pair(psi, InvertOptions{false});
  double lo = -5.0, hi = 5.0;
  int n = 400;
  if (!c.grid.empty()) {
    const auto g = io::parseGrid(c.grid);
    lo = g.front();
    hi = g.back();
    n = static_cast<int>(g.size());
  }
  const auto lines = boundaryTrace(pair, lo, hi, n);
  std::ostringstream os;
  io::CsvWriter w(os, {"line_id", "kind", "level", "s", "re", "im"});
  writePolylines(w, lines);
  writeSlits(w, psi, static_cast<int>(lines.size()), man);
  man["result"] = {{"polylines", lines.size()}};
  return {os.str(), false};
}

Output flowlines(const Config& c, Json& man) {
  if (c.psi.empty()) throw ConfigError("flowlines needs --psi");
  if (c.imLines < 1 || c.reLines < 1) throw ConfigError("--im-lines and --re-lines must be >= 1");
  const PsiSource psi = io::parsePsi(c.psi);
  const ConformalPair pair(psi, InvertOptions{false});
  FlowlineOptions opt;
  opt.imLines = c.imLines;
  opt.reLines = c.reLines;
  opt.imMax = c.imMax;
  if (!c.grid.empty()) {
    const auto g = io::parseGrid(c.grid);
    opt.reMin = g.front();
    opt.reMax = g.back();
    opt.samples = static_cast<int>(g.size());
  }
  const auto lines = flowlineGrid(pair, opt);
  std::ostringstream os;
  io::CsvWriter w(os, {"line_id", "kind", "level", "s", "re", "im"});
  writePolylines(w, lines);
  writeSlits(w, psi, static_cast<int>(lines.size()), man);
  man["result"] = {{"polylines", lines.size()}};
  return {os.str(), false};
}

Output fal2Build(const Config& c, Json& man) {
  if (c.psi.empty()) throw ConfigError("fal2-build needs --psi");
  Config cc = c;
  cc.phi.clear();
  const FlowField ff = makeField(cc, man);
  const auto pts = complexGrid(c);
  std::vector<cplx> vals(pts.size());
  parallelFor(pts.size(), [&](std::size_t i) {
    try {
      vals[i] = ff.phi()(pts[i]);
    } catch (const Error&) {
      vals[i] = {std::nan(""), std::nan("")};
    }
  });
  Json values = Json::array();
  for (cplx v : vals) values.push_back(std::isfinite(std::abs(v)) ? io::toJson(v) : Json(nullptr));
  Json res = {{"psi", describe(io::parsePsi(c.psi))}, {"phi", ff.phi().name()}, {"route", routeName(ff)}};
  if (ff.phi().powerLaw()) {
    const auto& p = *ff.phi().powerLaw();
    res["powerLaw"] = {{"coef", io::toJson(p.coef)}, {"exponent", p.exponent}};
  }
  if (ff.certificate()) res["certificate"] = io::toJson(*ff.certificate());
  if (ff.pair()) res["normalization"] = io::toJson(ff.pair()->normalization());
  res["grid"] = pointsJson(pts);
  res["values"] = values;
  return {res.dump(2) + "\n", true};
}

Output fal2CheckCmd(const Config& c, Json& man) {
  if (c.psi.empty() && c.phi.empty()) throw ConfigError("fal2-check needs --phi or --psi");
  if (!c.psi.empty() && !c.phi.empty()) throw ConfigError("give only one of --phi and --psi");
  FlowField ff = !c.psi.empty() ? makeField(c, man)
                                : FlowField(io::parseFunction(c.phi, quadOptions(c)), nullptr,
                                            odeOptions(c));
  const auto times = c.t.empty() ? defaultFal2Times() : c.t;
  const Fal2Result r = fal2Check(ff, times);
  Json res = {{"function", ff.phi().name()},
              {"verdict", verdictName(r.verdict)},
              {"route", r.route},
              {"times", times}};
  if (r.t) res["t"] = *r.t;
  if (r.witness) res["witness"] = io::toJson(*r.witness);
  if (r.value) res["value"] = io::toJson(*r.value);
  Json per = Json::array();
  for (std::size_t i = 0; i < r.perTime.size(); ++i) {
    Json j = checkJson(r.perTime[i]);
    j["t"] = times[i];
    per.push_back(std::move(j));
  }
  res["perTime"] = per;
  man["result"] = {{"verdict", verdictName(r.verdict)}};
  if (r.witness) man["result"]["witness"] = io::toJson(*r.witness);
  man["samplingTolerance"] = fal2Plan().tolerance;
  return {res.dump(2) + "\n", true};
}

Output flowCmd(const Config& c, Json& man) {
  const FlowField ff = makeField(c, man);
  const auto pts = complexGrid(c);
  const auto times = c.t.empty() ? std::vector<double>{1.0} : c.t;
  std::vector<std::optional<cplx>> vals(pts.size() * times.size());
  parallelFor(vals.size(), [&](std::size_t k) {
    try {
      vals[k] = flowBy(c, ff, pts[k % pts.size()], times[k / pts.size()]);
    } catch (const Error&) {
    }
  });
  std::ostringstream os;
  io::CsvWriter w(os, {"re_in", "im_in", "re_out", "im_out", "t", "flag"});
  std::size_t failed = 0;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const cplx z = pts[k % pts.size()];
    const double t = times[k / pts.size()];
    const bool ok = vals[k] && std::isfinite(std::abs(*vals[k]));
    failed += !ok;
    const cplx v = ok ? *vals[k] : cplx{std::nan(""), std::nan("")};
    w.cell(z.real()).cell(z.imag()).cell(v.real()).cell(v.imag()).cell(t)
        .cell(std::string(ok ? "ok" : "failed")).end();
  }
  man["result"] = {{"points", vals.size()}, {"failed", failed}};
  return {os.str(), false};
}

Output kernel(const Config& c, Json& man) {
  const FlowField ff = makeField(c, man);
  const double t = singleTime(c, 1.0);
  const KernelSlice k = transitionKernel(ff, t, c.x, gridOr(c.grid, "-5:5:201"), c.eps);
  man["result"] = {{"massDeficit", k.table.massDeficit}, {"t", t}, {"x", c.x}};
  std::ostringstream os;
  io::writeDensityCsv(os, k.table, "u");
  return {os.str(), false};
}

Output marginal(const Config& c, Json& man) {
  const FlowField ff = makeField(c, man);
  const double t = singleTime(c, 1.0);
  const KernelSlice k = marginalLaw(ff, t, gridOr(c.grid, "-5:5:201"), c.eps);
  man["result"] = {{"massDeficit", k.table.massDeficit}, {"t", t}};
  std::ostringstream os;
  io::writeDensityCsv(os, k.table, "u");
  return {os.str(), false};
}

Output increment(const Config& c, Json& man) {
  const FlowField ff = makeField(c, man);
  const double t = singleTime(c, 1.0);
  const auto pts = complexGrid(c);
  std::vector<std::optional<cplx>> vals(pts.size());
  parallelFor(pts.size(), [&](std::size_t i) {
    try {
      vals[i] = incrementTransform(ff, c.s, t, pts[i]);
    } catch (const Error&) {
    }
  });
  std::ostringstream os;
  io::CsvWriter w(os, {"re", "im", "re_phi", "im_phi", "s", "t", "flag"});
  std::size_t failed = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const bool ok = vals[i] && std::isfinite(std::abs(*vals[i]));
    failed += !ok;
    const cplx v = ok ? *vals[i] : cplx{std::nan(""), std::nan("")};
    w.cell(pts[i].real()).cell(pts[i].imag()).cell(v.real()).cell(v.imag()).cell(c.s).cell(t)
        .cell(std::string(ok ? "ok" : "failed")).end();
  }
  man["result"] = {{"points", pts.size()}, {"failed", failed}};
  return {os.str(), false};
}

// ---- plumbing ------------------------------------------------------------

enum Flags : unsigned {
  kPhi = 1u << 0,
  kPhi2 = 1u << 1,
  kPsi = 1u << 2,
  kGrid = 1u << 3,
  kImGrid = 1u << 4,
  kT = 1u << 5,
  kS = 1u << 6,
  kX = 1u << 7,
  kEps = 1u << 8,
  kLines = 1u << 9,
  kSamples = 1u << 10,
  kRoute = 1u << 11,
};

struct Command {
  const char* name;
  const char* help;
  unsigned flags;
  Output (*fn)(const Config&, Json&);
  bool verdict = false;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds = {
      {"nev-eval", "evaluate a Nevanlinna function on a grid", kPhi | kGrid | kImGrid | kSamples,
       nevEval},
      {"nev-recover", "recover (alpha, beta, nu) from a function", kPhi | kEps, nevRecover},
      {"conv", "density of the free convolution of two laws given by phi", kPhi | kPhi2 | kGrid | kEps,
       conv},
      {"semigroup", "density of mu_t with phi_{mu_t} = t phi", kPhi | kGrid | kT | kEps, semigroup},
      {"conformal-image", "boundary traces and slits of Psi(C+)", kPsi | kGrid, conformalImage},
      {"flowlines", "images under Psi of horizontal and vertical lines", kPsi | kGrid | kLines,
       flowlines},
      {"fal2-build", "phi = psi o Phi for a psi spec", kPsi | kGrid | kImGrid, fal2Build},
      {"fal2-check", "numeric FAL2 verdict", kPhi | kPsi | kT, fal2CheckCmd, true},
      {"flow", "flow snapshots F_t(z)", kPhi | kPsi | kGrid | kImGrid | kT | kRoute, flowCmd},
      {"kernel", "transition kernel k_t(x, du)", kPhi | kPsi | kGrid | kT | kX | kEps, kernel},
      {"marginal", "marginal law mu_t started at delta_0", kPhi | kPsi | kGrid | kT | kEps, marginal},
      {"increment", "increment transform phi_{mu_{s,t}}", kPhi | kPsi | kGrid | kImGrid | kT | kS,
       increment},
  };
  return cmds;
}

void addOptions(CLI::App* sub, unsigned flags, Config& c) {
  if (flags & kPhi) sub->add_option("--phi", c.phi, "generator spec, e.g. negPow(1/3) or file.json");
  if (flags & kPhi2) sub->add_option("--phi2", c.phi2, "second generator spec");
  if (flags & kPsi) sub->add_option("--psi", c.psi, "psi spec: negPow(s), const(re,im), rational(..), json");
  if (flags & kGrid) sub->add_option("--grid", c.grid, "real grid lo:hi:n");
  if (flags & kImGrid) {
    sub->add_option("--im-grid", c.imGrid, "imaginary grid lo:hi:n");
    sub->add_option("--y", c.y, "imaginary parts (comma separated)")->delimiter(',');
  }
  if (flags & kT) sub->add_option("--t", c.t, "time(s), comma separated")->delimiter(',');
  if (flags & kS) sub->add_option("--s", c.s, "start time s");
  if (flags & kX) sub->add_option("--x", c.x, "kernel base point x");
  if (flags & kEps) sub->add_option("--eps", c.eps, "Stieltjes offset eps");
  if (flags & kLines) {
    sub->add_option("--im-lines", c.imLines, "number of Im z = const lines");
    sub->add_option("--re-lines", c.reLines, "number of Re z = const lines");
    sub->add_option("--im-max", c.imMax, "largest Im z level");
  }
  if (flags & kSamples) sub->add_option("--samples", c.samples, "extra random points (uses --seed)");
  if (flags & kRoute)
    sub->add_option("--route", c.route, "auto, conformal or ode")
        ->check(CLI::IsMember({"auto", "conformal", "ode"}));
  sub->add_option("--tol-abs", c.tolAbs, "absolute tolerance (quadrature and ODE)");
  sub->add_option("--tol-rel", c.tolRel, "relative tolerance (quadrature and ODE)");
  sub->add_option("--out", c.out, "output file; a manifest goes to <out>.manifest.json");
  sub->add_option("--seed", c.seed, "seed for randomized sampling");
}

void validate(const Config& c) {
  if (c.tolAbs && !(*c.tolAbs > 0.0)) throw ConfigError("--tol-abs must be > 0");
  if (c.tolRel && !(*c.tolRel > 0.0)) throw ConfigError("--tol-rel must be > 0");
  if (!(c.eps > 0.0)) throw ConfigError("--eps must be > 0");
  if (c.samples < 0) throw ConfigError("--samples must be >= 0");
}

Json manifestBase(const Config& c, const std::vector<std::string>& args) {
  const auto q = quadOptions(c);
  const auto o = odeOptions(c);
  Json m;
  m["tool"] = "freeflow";
  m["version"] = FREEFLOW_VERSION;
  m["command"] = c.command;
  m["args"] = args;
  m["seed"] = c.seed;
  m["tolerances"] = {{"quadAbs", q.absTol}, {"quadRel", q.relTol}, {"odeAbs", o.absTol},
                     {"odeRel", o.relTol}, {"eps", c.eps}};
  return m;
}

void writeFile(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << body;
  if (!f) throw ConfigError("error writing " + path);
}

}  // namespace

unsigned threadCap() {
  if (const char* env = std::getenv("FREEFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run(const std::vector<std::string>& argsIn, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = argsIn;
  if (args.size() >= 2 && args[0] == "conformal") {
    if (args[1] == "image") args[1] = "conformal-image";
    args.erase(args.begin());
  }

  Config cfg;
  CLI::App app{"Free Levy flows, conformal primitives and Cauchy transforms", "freeflow"};
  app.set_version_flag("--version", std::string(FREEFLOW_VERSION));
  app.require_subcommand(1);
  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& cmd : commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    addOptions(sub, cmd.flags, cfg);
    subs.emplace_back(sub, &cmd);
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  const Command* cmd = nullptr;
  for (const auto& [sub, c] : subs)
    if (sub->parsed()) cmd = c;
  cfg.command = cmd->name;

  try {
    validate(cfg);
    Json man = manifestBase(cfg, args);
    const Output res = cmd->fn(cfg, man);
    if (cfg.out.empty()) {
      out << res.body;
    } else {
      writeFile(cfg.out, res.body);
      man["outputs"] = Json::array({cfg.out});
      writeFile(cfg.out + ".manifest.json", man.dump(2) + "\n");
    }
    if (cmd->verdict && man.contains("result") && man["result"].value("verdict", "") == "fail")
      return kVerdictFail;
    return kOk;
  } catch (const Error& e) {
    err << "error[" << e.code() << "]: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace freeflow::cli
