#pragma once

// JSON and CSV formats, plus the textual function specs used by the CLI:
//   negPow(rho)   -z^rho
//   pow(theta)    z^theta
//   const(re,im)  constant
//   rational(a=..,b=..,poles=[..],residues=[..])
//   <path>.json | @<path> | {inline json}   NevanlinnaSpec or RationalNevanlinna
// Numbers accept fractions (1/3) and a trailing "..." or U+2026 meaning the
// last digit repeats (0.333... = 1/3).

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "freeflow/cauchy.hpp"
#include "freeflow/conformal.hpp"
#include "freeflow/measure.hpp"
#include "freeflow/nevanlinna.hpp"

namespace freeflow::io {

using Json = nlohmann::ordered_json;

class SchemaError : public Error {
public:
  SchemaError(const std::string& source, std::string path, int line, const std::string& what)
      : Error("SchemaError", source + ":" + std::to_string(line) + ": " +
                                 (path.empty() ? std::string("<root>") : path) + ": " + what),
        path_(std::move(path)),
        line_(line) {}
  const std::string& path() const noexcept { return path_; }
  int line() const noexcept { return line_; }

private:
  std::string path_;
  int line_;
};

// Parsed JSON with the source line of every value, keyed by JSON pointer.
struct Document {
  Json root;
  std::string source;
  std::map<std::string, int> lines;

  int lineOf(const std::string& pointer) const;
  [[noreturn]] void fail(const std::string& pointer, const std::string& what) const;
};

Document parseJson(std::string_view text, const std::string& source = "<input>");
Document loadJson(const std::string& path);

Measure measureFromJson(const Document& doc, const std::string& pointer = "");
NevanlinnaSpec nevanlinnaSpecFromJson(const Document& doc, const std::string& pointer = "");
RationalNevanlinna rationalFromJson(const Document& doc, const std::string& pointer = "");

Json toJson(cplx z);
Json toJson(const Measure& m);
Json toJson(const NevanlinnaSpec& s);
Json toJson(const RationalNevanlinna& r);
Json toJson(const InversionDomain& d);
Json toJson(const ContainmentCertificate& c);

double parseNumber(std::string_view text);
// "lo:hi:n" with n >= 2, evenly spaced and inclusive.
std::vector<double> parseGrid(std::string_view text);

AnalyticFn parseFunction(std::string_view spec, const quad::Options& opt = {});
PsiSource parsePsi(std::string_view spec);

// Shortest round-trip decimal form; "nan", "inf", "-inf" otherwise.
std::string formatDouble(double v);

// CSV writer; every cell goes through formatDouble.
class CsvWriter {
public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  CsvWriter& row(std::initializer_list<double> cells);
  // Mixed rows: strings are written verbatim.
  CsvWriter& cell(double v);
  CsvWriter& cell(const std::string& s);
  CsvWriter& end();

private:
  std::ostream& os_;
  bool first_ = true;
};

const char* flagName(PointFlag f);
void writeDensityCsv(std::ostream& os, const DensityTable& t, const std::string& column);

}  // namespace freeflow::io
