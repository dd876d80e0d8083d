#include "ecpa/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ecpa/errors.hpp"

namespace ecpa {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// Splits top-level commas, keeping parenthesised argument lists intact.
std::vector<std::string> split_terms(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  int depth = 0;
  for (char c : text) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  out.push_back(current);
  return out;
}

std::size_t parse_lag(const std::string& token, const std::string& term) {
  std::size_t lag = 0;
  const std::string t = trim(token);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), lag);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ArgumentError("invalid lag '" + token + "' in instrument '" + term +
                        "'");
  return lag;
}

}  // namespace

double parse_number(const std::string& token, const std::string& what) {
  const std::string t = trim(token);
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() ||
      !std::isfinite(value))
    throw DataError("cannot parse '" + token + "' as a finite number (" +
                    what + ")");
  return value;
}

std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split(text, ','))
    if (!trim(tok).empty()) out.push_back(parse_number(tok, what));
  if (out.empty()) throw DataError("empty list for " + what);
  return out;
}

Snr parse_snr(const std::string& token) {
  const std::string t = trim(token);
  if (t == "inf" || t == "infinity") return Snr::infinity();
  return Snr::finite(parse_number(t, "SNR"));
}

CsvColumns load_numeric_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto raw_header = split(line, ',');
  std::vector<std::string> header;
  header.reserve(raw_header.size());
  for (const auto& h : raw_header) header.push_back(trim(h));

  CsvColumns out;
  std::ptrdiff_t date_col = -1;
  std::vector<std::vector<double>*> sinks(header.size(), nullptr);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "date") {
      date_col = static_cast<std::ptrdiff_t>(j);
      continue;
    }
    if (header[j].empty())
      throw DataError("CSV header has an empty column name");
    const auto [it, inserted] = out.columns.emplace(header[j],
                                                    std::vector<double>{});
    if (!inserted)
      throw DataError("duplicate CSV column '" + header[j] + "'");
    sinks[j] = &it->second;
  }

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << "CSV row " << row << " has " << cells.size()
          << " cells, expected " << header.size();
      throw DataError(msg.str());
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (static_cast<std::ptrdiff_t>(j) == date_col) {
        out.dates.push_back(trim(cells[j]));
        continue;
      }
      std::ostringstream what;
      what << "row " << row << ", column '" << header[j] << "'";
      sinks[j]->push_back(parse_number(cells[j], what.str()));
    }
  }
  out.rows = row;
  return out;
}

CsvColumns load_numeric_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file '" + path + "'");
  return load_numeric_csv(in);
}

EvaluationPanel load_panel_csv(std::istream& in, int horizon) {
  CsvColumns csv = load_numeric_csv(in);
  for (const char* required : {"proxy", "forecast1", "forecast2"})
    if (csv.columns.find(required) == csv.columns.end())
      throw DataError(std::string("panel is missing required column '") +
                      required + "'");
  if (csv.rows < 2) throw DataError("panel needs at least 2 data rows");

  EvaluationPanel panel;
  panel.horizon = horizon;
  panel.timestamps = std::move(csv.dates);
  panel.proxy = std::move(csv.columns.at("proxy"));
  panel.forecast1 = std::move(csv.columns.at("forecast1"));
  panel.forecast2 = std::move(csv.columns.at("forecast2"));
  csv.columns.erase("proxy");
  csv.columns.erase("forecast1");
  csv.columns.erase("forecast2");
  for (auto& [name, col] : csv.columns) panel.extras[name] = std::move(col);
  panel.validate();
  return panel;
}

EvaluationPanel load_panel_file(const std::string& path, int horizon) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open panel file '" + path + "'");
  return load_panel_csv(in, horizon);
}

const std::map<std::string, std::string>& RunConfig::known_keys() {
  static const std::map<std::string, std::string> keys = {
      {"loss.kind", "se"},          // se | qlike | quantile
      {"loss.alpha", "0.5"},        // quantile level
      {"instruments", "constant"},  // instrument list
      {"covariance.bandwidth", "auto"},  // auto = horizon - 1
      {"covariance.weights", "bartlett"},
      {"horizon", "1"},
      {"tau", "0.05"},
      {"seed", "42"},
      {"grid.loss", "se"},  // se | ae
      {"grid.xi", "0"},
      {"grid.zeta", "inf"},
      {"grid.n", "500"},
      {"grid.reps", "10000"},
      {"grid.mu", "1"},
      {"grid.phi", "0.2"},
      {"grid.sigma_eps2", "1"},
      {"grid.common_random_numbers", "false"},
  };
  return keys;
}

RunConfig RunConfig::parse_stream(std::istream& in) {
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << "config line " << lineno << ": expected 'key = value'";
      throw DataError(msg.str());
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    try {
      cfg.set(key, value);
    } catch (const DataError& e) {
      std::ostringstream msg;
      msg << "config line " << lineno << ": " << e.what();
      throw DataError(msg.str());
    }
  }
  return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file '" + path + "'");
  return parse_stream(in);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (known_keys().find(key) == known_keys().end())
    throw DataError("unknown config key '" + key + "'");
  values_[key] = value;
}

bool RunConfig::is_set(const std::string& key) const {
  return values_.find(key) != values_.end();
}

std::string RunConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const auto def = known_keys().find(key);
  if (def == known_keys().end())
    throw ArgumentError("config key '" + key + "' is not registered");
  return def->second;
}

double RunConfig::num(const std::string& key) const {
  return parse_number(str(key), "config key " + key);
}

long RunConfig::integer(const std::string& key) const {
  const double v = num(key);
  const long out = static_cast<long>(v);
  if (static_cast<double>(out) != v)
    throw DataError("config key " + key + " must be an integer");
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string v = str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError("config key " + key + " must be a boolean");
}

std::vector<double> RunConfig::num_list(const std::string& key) const {
  return parse_number_list(str(key), "config key " + key);
}

std::vector<Snr> RunConfig::snr_list(const std::string& key) const {
  std::vector<Snr> out;
  for (const auto& tok : str(key).empty()
                             ? std::vector<std::string>{}
                             : split(str(key), ','))
    if (!trim(tok).empty()) out.push_back(parse_snr(tok));
  if (out.empty()) throw DataError("empty SNR list for config key " + key);
  return out;
}

InstrumentSpec parse_instruments(const std::string& text,
                                 std::size_t default_lag) {
  InstrumentSpec spec;
  for (const auto& raw : split_terms(text)) {
    const std::string term = trim(raw);
    if (term.empty()) continue;

    std::string head = term;
    std::vector<std::string> args;
    const std::size_t open = term.find('(');
    if (open != std::string::npos) {
      if (term.back() != ')')
        throw ArgumentError("malformed instrument '" + term + "'");
      head = trim(term.substr(0, open));
      const std::string inner =
          term.substr(open + 1, term.size() - open - 2);
      for (const auto& a : split(inner, ',')) args.push_back(trim(a));
    }

    if (head == "constant") {
      if (!args.empty())
        throw ArgumentError("constant instrument takes no arguments");
      spec.push_back(Instrument::constant());
    } else if (head == "proxy") {
      if (args.size() > 1)
        throw ArgumentError("proxy instrument takes at most a lag");
      const std::size_t lag =
          args.empty() ? default_lag : parse_lag(args[0], term);
      spec.push_back(Instrument::lagged_proxy(lag));
    } else if (head == "lossdiff") {
      if (args.size() > 1)
        throw ArgumentError("lossdiff instrument takes at most a lag");
      const std::size_t lag =
          args.empty() ? default_lag : parse_lag(args[0], term);
      spec.push_back(Instrument::lagged_loss_diff(lag));
    } else if (head == "extra") {
      if (args.empty() || args.size() > 2)
        throw ArgumentError("extra instrument needs (name[,lag])");
      const std::size_t lag =
          args.size() == 2 ? parse_lag(args[1], term) : default_lag;
      spec.push_back(Instrument::lagged_extra(args[0], lag));
    } else if (head == "proxydiff") {
      if (args.size() < 2 || args.size() > 3)
        throw ArgumentError("proxydiff instrument needs (nameA,nameB[,lag])");
      const std::size_t lag =
          args.size() == 3 ? parse_lag(args[2], term) : default_lag;
      spec.push_back(Instrument::lagged_proxy_diff(args[0], args[1], lag));
    } else {
      throw ArgumentError("unknown instrument '" + term + "'");
    }
  }
  if (spec.empty()) throw ArgumentError("instrument list is empty");
  return spec;
}

}  // namespace ecpa
