#include "freeflow/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

namespace freeflow::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string escapePointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

// Tracks the line of the last non-blank character the lexer consumed, so a
// value's line is where its final character sits.
struct LineCounter {
  int line = 1;
  int lastLine = 1;
};

class CountingIterator {
public:
  using iterator_category = std::forward_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  CountingIterator() = default;
  CountingIterator(const char* p, LineCounter* c) : p_(p), c_(c) {}
  reference operator*() const { return *p_; }
  CountingIterator& operator++() {
    if (*p_ == '\n')
      ++c_->line;
    else if (!std::isspace(static_cast<unsigned char>(*p_)))
      c_->lastLine = c_->line;
    ++p_;
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator t = *this;
    ++*this;
    return t;
  }
  bool operator==(const CountingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const CountingIterator& o) const { return p_ != o.p_; }

private:
  const char* p_ = nullptr;
  LineCounter* c_ = nullptr;
};

class DomBuilder {
public:
  using number_integer_t = Json::number_integer_t;
  using number_unsigned_t = Json::number_unsigned_t;
  using number_float_t = Json::number_float_t;
  using string_t = Json::string_t;
  using binary_t = Json::binary_t;

  DomBuilder(Document& doc, LineCounter& counter) : doc_(doc), counter_(counter) {}

  bool null() { return put(Json(nullptr)); }
  bool boolean(bool v) { return put(Json(v)); }
  bool number_integer(number_integer_t v) { return put(Json(v)); }
  bool number_unsigned(number_unsigned_t v) { return put(Json(v)); }
  bool number_float(number_float_t v, const string_t&) { return put(Json(v)); }
  bool string(string_t& v) { return put(Json(v)); }
  bool binary(binary_t&) { return false; }
  bool start_object(std::size_t) {
    Json* c = insert(Json::object());
    stack_.push_back({c, lastPointer_, 0});
    return true;
  }
  bool key(string_t& k) {
    key_ = k;
    return true;
  }
  bool end_object() {
    stack_.pop_back();
    return true;
  }
  bool start_array(std::size_t) {
    Json* c = insert(Json::array());
    stack_.push_back({c, lastPointer_, 0});
    return true;
  }
  bool end_array() {
    stack_.pop_back();
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& e) {
    throw SchemaError(doc_.source, "", counter_.lastLine, std::string("malformed JSON: ") + e.what());
  }

private:
  struct Frame {
    Json* node;
    std::string pointer;
    std::size_t index;
  };

  bool put(Json v) {
    insert(std::move(v));
    return true;
  }

  Json* insert(Json v) {
    Json* slot;
    if (stack_.empty()) {
      doc_.root = std::move(v);
      slot = &doc_.root;
      lastPointer_.clear();
    } else {
      Frame& f = stack_.back();
      if (f.node->is_object()) {
        lastPointer_ = f.pointer + "/" + escapePointer(key_);
        (*f.node)[key_] = std::move(v);
        slot = &(*f.node)[key_];
      } else {
        lastPointer_ = f.pointer + "/" + std::to_string(f.index++);
        f.node->push_back(std::move(v));
        slot = &f.node->back();
      }
    }
    doc_.lines[lastPointer_] = counter_.lastLine;
    return slot;
  }

  Document& doc_;
  LineCounter& counter_;
  std::vector<Frame> stack_;
  std::string key_;
  std::string lastPointer_;
};

const Json& at(const Document& doc, const std::string& pointer) {
  try {
    return doc.root.at(Json::json_pointer(pointer));
  } catch (const nlohmann::json::exception&) {
    doc.fail(pointer, "missing");
  }
}

bool has(const Document& doc, const std::string& pointer, const char* key) {
  const Json& j = at(doc, pointer);
  return j.is_object() && j.contains(key);
}

double number(const Document& doc, const std::string& pointer) {
  const Json& j = at(doc, pointer);
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    try {
      return parseNumber(s);
    } catch (const Error& e) {
      doc.fail(pointer, e.what());
    }
  }
  doc.fail(pointer, "expected a number");
}

double finiteNumber(const Document& doc, const std::string& pointer) {
  const double v = number(doc, pointer);
  if (!std::isfinite(v)) doc.fail(pointer, "expected a finite number");
  return v;
}

std::vector<double> numberArray(const Document& doc, const std::string& pointer) {
  const Json& j = at(doc, pointer);
  if (!j.is_array()) doc.fail(pointer, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(finiteNumber(doc, pointer + "/" + std::to_string(i)));
  return out;
}

void requireObject(const Document& doc, const std::string& pointer,
                   std::initializer_list<const char*> allowed) {
  const Json& j = at(doc, pointer);
  if (!j.is_object()) doc.fail(pointer, "expected an object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || item.key() == a;
    if (!ok) doc.fail(pointer + "/" + escapePointer(item.key()), "unknown field");
  }
}

// name(arg, arg, ...) split at top-level commas.
struct Call {
  std::string name;
  std::vector<std::string> args;
};

Call splitCall(std::string_view text) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    throw InvalidInput("expected name(args), got \"" + std::string(text) + "\"");
  Call c;
  c.name = std::string(trim(text.substr(0, open)));
  const std::string_view body = text.substr(open + 1, text.size() - open - 2);
  int depth = 0;
  std::string cur;
  for (char ch : body) {
    if (ch == '[' || ch == '(') ++depth;
    if (ch == ']' || ch == ')') --depth;
    if (depth < 0) throw InvalidInput("unbalanced brackets in \"" + std::string(text) + "\"");
    if (ch == ',' && depth == 0) {
      c.args.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (depth != 0) throw InvalidInput("unbalanced brackets in \"" + std::string(text) + "\"");
  if (!trim(cur).empty() || !c.args.empty()) c.args.emplace_back(trim(cur));
  return c;
}

std::vector<double> parseList(std::string_view text) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']')
    throw InvalidInput("expected [..], got \"" + std::string(text) + "\"");
  std::vector<double> out;
  std::string_view body = trim(text.substr(1, text.size() - 2));
  while (!body.empty()) {
    const auto comma = body.find(',');
    out.push_back(parseNumber(body.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    body = trim(body.substr(comma + 1));
  }
  return out;
}

void expectArgs(const Call& c, std::size_t n) {
  if (c.args.size() != n)
    throw InvalidInput(c.name + " takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s") +
                       ", got " + std::to_string(c.args.size()));
}

RationalNevanlinna rationalFromCall(const Call& c) {
  RationalNevanlinna r;
  for (const auto& arg : c.args) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) throw InvalidInput("rational arguments are key=value, got " + arg);
    const std::string key(trim(std::string_view(arg).substr(0, eq)));
    const std::string_view value = std::string_view(arg).substr(eq + 1);
    if (key == "a")
      r.a = parseNumber(value);
    else if (key == "b")
      r.b = parseNumber(value);
    else if (key == "poles")
      r.poles = parseList(value);
    else if (key == "residues")
      r.residues = parseList(value);
    else
      throw InvalidInput("unknown rational argument " + key);
  }
  r.validate();
  return r;
}

bool isJsonSpec(std::string_view s) {
  return s.front() == '{' || s.front() == '@' ||
         (s.size() > 5 && s.substr(s.size() - 5) == ".json");
}

Document jsonSpec(std::string_view s) {
  if (s.front() == '{') return parseJson(s, "<inline>");
  if (s.front() == '@') return loadJson(std::string(s.substr(1)));
  return loadJson(std::string(s));
}

AcPiece builtinPiece(const Document& doc, const std::string& pointer, const std::string& name) {
  if (name == "sqrtNeg") return densities::sqrtNeg();
  if (name == "invSqrtNeg") return densities::invSqrtNeg();
  if (name == "table") {
    const std::string tp = pointer + "/table";
    if (!has(doc, pointer, "table")) doc.fail(pointer, "\"table\" density needs a table field");
    const Json& t = at(doc, tp);
    if (!t.is_array()) doc.fail(tp, "expected an array of [u, value] pairs");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto v = numberArray(doc, tp + "/" + std::to_string(i));
      if (v.size() != 2) doc.fail(tp + "/" + std::to_string(i), "expected [u, value]");
      pts.emplace_back(v[0], v[1]);
    }
    return densities::table(std::move(pts));
  }
  const Call c = splitCall(name);
  std::vector<double> a;
  for (const auto& s : c.args) a.push_back(parseNumber(s));
  if (c.name == "semicircle" && (a.size() == 1 || a.size() == 2))
    return densities::semicircle(a[0], a.size() == 2 ? a[1] : 0.0);
  if (c.name == "cauchy" && (a.size() == 1 || a.size() == 2))
    return densities::cauchy(a[0], a.size() == 2 ? a[1] : 0.0);
  if (c.name == "lorentzTail" && a.size() == 1) {
    if (!has(doc, pointer, "lo") || !has(doc, pointer, "hi"))
      doc.fail(pointer, "lorentzTail needs lo and hi");
    return densities::lorentzTail(a[0], number(doc, pointer + "/lo"), number(doc, pointer + "/hi"));
  }
  throw InvalidInput("unknown density \"" + name + "\"");
}

Json bound(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return v;
}

}  // namespace

int Document::lineOf(const std::string& pointer) const {
  std::string p = pointer;
  while (true) {
    if (auto it = lines.find(p); it != lines.end()) return it->second;
    if (p.empty()) return 1;
    p.erase(p.rfind('/'));
  }
}

void Document::fail(const std::string& pointer, const std::string& what) const {
  throw SchemaError(source, pointer, lineOf(pointer), what);
}

Document parseJson(std::string_view text, const std::string& source) {
  Document doc;
  doc.source = source;
  LineCounter counter;
  DomBuilder builder(doc, counter);
  CountingIterator first(text.data(), &counter), last(text.data() + text.size(), &counter);
  Json::sax_parse(first, last, &builder);
  return doc;
}

Document loadJson(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseJson(ss.str(), path);
}

Measure measureFromJson(const Document& doc, const std::string& pointer) {
  requireObject(doc, pointer, {"atoms", "ac"});
  std::vector<Atom> atoms;
  std::vector<AcPiece> pieces;
  if (has(doc, pointer, "atoms")) {
    const std::string ap = pointer + "/atoms";
    const Json& arr = at(doc, ap);
    if (!arr.is_array()) doc.fail(ap, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = ap + "/" + std::to_string(i);
      requireObject(doc, p, {"u", "mass"});
      const double m = finiteNumber(doc, p + "/mass");
      if (!(m > 0.0)) doc.fail(p + "/mass", "atom mass must be positive");
      atoms.push_back({finiteNumber(doc, p + "/u"), m});
    }
  }
  if (has(doc, pointer, "ac")) {
    const std::string cp = pointer + "/ac";
    const Json& arr = at(doc, cp);
    if (!arr.is_array()) doc.fail(cp, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = cp + "/" + std::to_string(i);
      requireObject(doc, p, {"lo", "hi", "density", "tailExponent", "scale", "table"});
      if (!has(doc, p, "density")) doc.fail(p, "missing density");
      const Json& d = at(doc, p + "/density");
      if (!d.is_string()) doc.fail(p + "/density", "expected a density name");
      AcPiece piece;
      try {
        piece = builtinPiece(doc, p, d.get<std::string>());
      } catch (const SchemaError&) {
        throw;
      } catch (const Error& e) {
        doc.fail(p + "/density", e.what());
      }
      if (has(doc, p, "lo")) piece.lo = number(doc, p + "/lo");
      if (has(doc, p, "hi")) piece.hi = number(doc, p + "/hi");
      if (has(doc, p, "tailExponent")) piece.tailExponent = finiteNumber(doc, p + "/tailExponent");
      if (has(doc, p, "scale")) piece.scale = finiteNumber(doc, p + "/scale");
      pieces.push_back(std::move(piece));
    }
  }
  try {
    return Measure(std::move(atoms), std::move(pieces));
  } catch (const Error& e) {
    doc.fail(pointer, e.what());
  }
}

NevanlinnaSpec nevanlinnaSpecFromJson(const Document& doc, const std::string& pointer) {
  requireObject(doc, pointer, {"alpha", "beta", "nu"});
  NevanlinnaSpec s;
  if (has(doc, pointer, "alpha")) s.alpha = finiteNumber(doc, pointer + "/alpha");
  if (has(doc, pointer, "beta")) s.beta = finiteNumber(doc, pointer + "/beta");
  if (has(doc, pointer, "nu")) s.nu = measureFromJson(doc, pointer + "/nu");
  try {
    s.validate();
  } catch (const Error& e) {
    doc.fail(pointer + "/alpha", e.what());
  }
  return s;
}

RationalNevanlinna rationalFromJson(const Document& doc, const std::string& pointer) {
  requireObject(doc, pointer, {"a", "b", "poles", "residues"});
  RationalNevanlinna r;
  if (has(doc, pointer, "a")) r.a = finiteNumber(doc, pointer + "/a");
  if (has(doc, pointer, "b")) r.b = finiteNumber(doc, pointer + "/b");
  if (has(doc, pointer, "poles")) r.poles = numberArray(doc, pointer + "/poles");
  if (has(doc, pointer, "residues")) r.residues = numberArray(doc, pointer + "/residues");
  try {
    r.validate();
  } catch (const Error& e) {
    doc.fail(pointer, e.what());
  }
  return r;
}

Json toJson(cplx z) { return Json::array({z.real(), z.imag()}); }

Json toJson(const Measure& m) {
  Json out = Json::object();
  Json atoms = Json::array();
  for (const auto& a : m.atoms()) atoms.push_back({{"u", a.position}, {"mass", a.mass}});
  Json ac = Json::array();
  for (const auto& p : m.pieces()) {
    if (p.label.empty()) throw InvalidInput("a.c. piece without a builtin label cannot be serialized");
    Json j = {{"lo", bound(p.lo)}, {"hi", bound(p.hi)}, {"density", p.label}};
    if (p.tailExponent) j["tailExponent"] = *p.tailExponent;
    if (p.scale != 1.0) j["scale"] = p.scale;
    if (p.label == "table") {
      Json t = Json::array();
      for (const auto& [u, v] : p.table) t.push_back({u, v});
      j["table"] = std::move(t);
    }
    ac.push_back(std::move(j));
  }
  out["atoms"] = std::move(atoms);
  out["ac"] = std::move(ac);
  return out;
}

Json toJson(const NevanlinnaSpec& s) {
  return {{"alpha", s.alpha}, {"beta", s.beta}, {"nu", toJson(s.nu)}};
}

Json toJson(const RationalNevanlinna& r) {
  return {{"a", r.a}, {"b", r.b}, {"poles", r.poles}, {"residues", r.residues}};
}

Json toJson(const InversionDomain& d) { return {{"gamma", d.gamma}, {"lambda", d.lambda}}; }

Json toJson(const ContainmentCertificate& c) {
  auto ext = [](double v) -> Json {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  return {{"contains", c.contains}, {"alpha", c.alpha},     {"m2plus", ext(c.m2plus)},
          {"decisive", ext(c.decisive)}, {"decisiveRaw", ext(c.decisiveRaw)}, {"reason", c.reason}};
}

double parseNumber(std::string_view text) {
  std::string s(trim(text));
  if (s.empty()) throw InvalidInput("empty number");
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const double den = parseNumber(std::string_view(s).substr(slash + 1));
    if (den == 0.0) throw InvalidInput("zero denominator in \"" + s + "\"");
    return parseNumber(std::string_view(s).substr(0, slash)) / den;
  }
  bool repeat = false;
  for (const char* tail : {"\xE2\x80\xA6", "..."}) {
    const std::size_t n = std::char_traits<char>::length(tail);
    if (s.size() > n && s.compare(s.size() - n, n, tail) == 0) {
      s.erase(s.size() - n);
      repeat = true;
      break;
    }
  }
  if (!s.empty() && s.front() == '+') s.erase(0, 1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw InvalidInput("cannot parse number \"" + std::string(trim(text)) + "\"");
  if (repeat) {
    const auto dot = s.find('.');
    const char last = s.back();
    if (dot == std::string::npos || !std::isdigit(static_cast<unsigned char>(last)) ||
        s.find_first_of("eE") != std::string::npos)
      throw InvalidInput("repeating notation needs a plain decimal, got \"" + std::string(trim(text)) +
                         "\"");
    const int decimals = static_cast<int>(s.size() - dot - 1);
    const double tail = (last - '0') * std::pow(10.0, -decimals) / 9.0;
    v += s.front() == '-' ? -tail : tail;
  }
  return v;
}

std::vector<double> parseGrid(std::string_view text) {
  const std::string s(trim(text));
  const auto c1 = s.find(':');
  const auto c2 = c1 == std::string::npos ? c1 : s.find(':', c1 + 1);
  if (c2 == std::string::npos) throw ConfigError("grid must be lo:hi:n, got \"" + s + "\"");
  const double lo = parseNumber(std::string_view(s).substr(0, c1));
  const double hi = parseNumber(std::string_view(s).substr(c1 + 1, c2 - c1 - 1));
  const double nd = parseNumber(std::string_view(s).substr(c2 + 1));
  if (!(nd >= 2.0) || nd != std::floor(nd) || nd > 1e8)
    throw ConfigError("grid count must be an integer >= 2, got \"" + s + "\"");
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo))
    throw ConfigError("grid needs finite lo < hi, got \"" + s + "\"");
  const int n = static_cast<int>(nd);
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1);
  return g;
}

AnalyticFn parseFunction(std::string_view spec, const quad::Options& opt) {
  spec = trim(spec);
  if (spec.empty()) throw InvalidInput("empty function spec");
  if (isJsonSpec(spec)) {
    const Document doc = jsonSpec(spec);
    if (has(doc, "", "a") || has(doc, "", "poles")) return fns::rational(rationalFromJson(doc));
    return fns::canonical(nevanlinnaSpecFromJson(doc), opt);
  }
  const Call c = splitCall(spec);
  if (c.name == "negPow") {
    expectArgs(c, 1);
    return fns::negPow(parseNumber(c.args[0]));
  }
  if (c.name == "pow") {
    expectArgs(c, 1);
    return fns::pow(parseNumber(c.args[0]));
  }
  if (c.name == "const") {
    if (c.args.size() == 1) return fns::constant(parseNumber(c.args[0]));
    expectArgs(c, 2);
    return fns::constant({parseNumber(c.args[0]), parseNumber(c.args[1])});
  }
  if (c.name == "rational") return fns::rational(rationalFromCall(c));
  throw InvalidInput("unknown function \"" + c.name + "\"");
}

PsiSource parsePsi(std::string_view spec) {
  spec = trim(spec);
  if (spec.empty()) throw InvalidInput("empty psi spec");
  if (isJsonSpec(spec)) {
    const Document doc = jsonSpec(spec);
    if (has(doc, "", "a") || has(doc, "", "poles")) return rationalFromJson(doc);
    return nevanlinnaSpecFromJson(doc);
  }
  const Call c = splitCall(spec);
  if (c.name == "negPow") {
    expectArgs(c, 1);
    return PowerPsi{parseNumber(c.args[0])};
  }
  if (c.name == "const") {
    if (c.args.size() == 1) return ConstantPsi{parseNumber(c.args[0])};
    expectArgs(c, 2);
    return ConstantPsi{{parseNumber(c.args[0]), parseNumber(c.args[1])}};
  }
  if (c.name == "rational") return rationalFromCall(c);
  throw InvalidInput("psi must be negPow(sigma), const(re,im), rational(..) or JSON, got \"" +
                     std::string(spec) + "\"");
}

std::string formatDouble(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os) {
  for (const auto& h : header) cell(h);
  end();
}

CsvWriter& CsvWriter::row(std::initializer_list<double> cells) {
  for (double v : cells) cell(v);
  return end();
}

CsvWriter& CsvWriter::cell(double v) { return cell(formatDouble(v)); }

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (!first_) os_ << ',';
  os_ << s;
  first_ = false;
  return *this;
}

CsvWriter& CsvWriter::end() {
  os_ << '\n';
  first_ = true;
  return *this;
}

const char* flagName(PointFlag f) {
  switch (f) {
    case PointFlag::Ok: return "ok";
    case PointFlag::NonFinite: return "nonfinite";
    case PointFlag::Atom: return "atom";
  }
  return "?";
}

void writeDensityCsv(std::ostream& os, const DensityTable& t, const std::string& column) {
  CsvWriter w(os, {column, "density", "flag"});
  for (std::size_t i = 0; i < t.x.size(); ++i)
    w.cell(t.x[i]).cell(t.density[i]).cell(flagName(t.flags[i])).end();
}

}  // namespace freeflow::io
