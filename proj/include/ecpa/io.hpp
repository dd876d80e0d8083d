#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ecpa/ecpa_test.hpp"
#include "ecpa/power.hpp"

namespace ecpa {

// Loads a comma-separated panel with a mandatory header row. Required
// columns: proxy, forecast1, forecast2. A `date` column is carried through
// as row metadata; every other column must be numeric and becomes an extra
// series addressable by instruments. Non-finite cells are data errors.
EvaluationPanel load_panel_csv(std::istream& in, int horizon = 1);
EvaluationPanel load_panel_file(const std::string& path, int horizon = 1);

// Generic numeric CSV (same format rules, no required columns).
struct CsvColumns {
  std::vector<std::string> dates;
  std::map<std::string, std::vector<double>> columns;
  std::size_t rows = 0;
};
CsvColumns load_numeric_csv(std::istream& in);
CsvColumns load_numeric_csv_file(const std::string& path);

// Flat `key = value` configuration with dotted namespaces and '#' comments.
// Unknown keys are rejected; every known key has a default.
class RunConfig {
 public:
  RunConfig() = default;

  static const std::map<std::string, std::string>& known_keys();

  static RunConfig parse_stream(std::istream& in);
  static RunConfig load_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool is_set(const std::string& key) const;

  std::string str(const std::string& key) const;
  double num(const std::string& key) const;
  long integer(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> num_list(const std::string& key) const;
  std::vector<Snr> snr_list(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

// Instrument list syntax: comma-separated terms
//   constant | proxy[(lag)] | lossdiff[(lag)] | extra(name[,lag]) |
//   proxydiff(nameA,nameB[,lag])
// Omitted lags default to `default_lag` (normally the forecast horizon).
InstrumentSpec parse_instruments(const std::string& text,
                                 std::size_t default_lag);

// Strict numeric parsing helpers (whole-token, finite).
double parse_number(const std::string& token, const std::string& what);
std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& what);
Snr parse_snr(const std::string& token);

}  // namespace ecpa
