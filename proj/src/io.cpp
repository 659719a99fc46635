// Simulation config parsing and result serialisation.

#include <charconv>
#include <cmath>
#include <algorithm>
#include <ostream>
#include <string>

#include <json.hpp>

#include "attenuation/simulation.hpp"

namespace attenuation {

namespace {

using nlohmann::json;

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + key + ": missing");
  return obj.at(key);
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field + ": expected a number");
  return v.get<double>();
}

long as_integer(const json& v, const std::string& field) {
  if (v.is_number_integer()) return v.get<long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d) return static_cast<long>(d);
  }
  throw ConfigError(field + ": expected an integer");
}

std::vector<double> number_array(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw ConfigError(field + ": expected a nonempty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<long> integer_array(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw ConfigError(field + ": expected a nonempty array");
  std::vector<long> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_integer(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

SimConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");

  SimConfig config;
  const bool has_cells = doc.contains("cells");
  const bool has_grid = doc.contains("grid");
  if (has_cells == has_grid) throw ConfigError("cells: exactly one of 'cells' or 'grid' is required");

  if (has_cells) {
    const auto& cells = doc.at("cells");
    if (!cells.is_array()) throw ConfigError("cells: expected an array");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string where = "cells[" + std::to_string(i) + "].";
      const auto& c = cells[i];
      if (!c.is_object()) throw ConfigError("cells[" + std::to_string(i) + "]: expected an object");
      config.cells.push_back({as_integer(require(c, "N", where), where + "N"),
                              as_number(require(c, "rho", where), where + "rho"),
                              as_integer(require(c, "k", where), where + "k"),
                              as_number(require(c, "R", where), where + "R")});
    }
  } else {
    const auto& grid = doc.at("grid");
    if (!grid.is_object()) throw ConfigError("grid: expected an object");
    const auto ns = integer_array(require(grid, "N", "grid."), "grid.N");
    const auto rhos = number_array(require(grid, "rho", "grid."), "grid.rho");
    const auto ks = integer_array(require(grid, "k", "grid."), "grid.k");
    const auto rs = number_array(require(grid, "R", "grid."), "grid.R");
    for (long n : ns)
      for (double rho : rhos)
        for (long k : ks)
          for (double r : rs) config.cells.push_back({n, rho, k, r});
  }

  config.reps = as_integer(require(doc, "reps", ""), "reps");
  if (doc.contains("level")) config.level = as_number(doc.at("level"), "level");
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("seed: expected a nonnegative integer");
    config.seed = s.get<std::uint64_t>();
  }

  const auto& methods = require(doc, "methods", "");
  if (!methods.is_array()) throw ConfigError("methods: expected an array of method names");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const std::string field = "methods[" + std::to_string(i) + "]";
    if (!methods[i].is_string()) throw ConfigError(field + ": expected a string");
    try {
      config.methods.push_back(parse_method(methods[i].get<std::string>()));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(field + ": " + e.what());
    }
  }

  validate(config);
  return config;
}

void write_coverage_csv(std::ostream& out, const std::vector<CoverageRecord>& records) {
  out << "N,rho,k,R,method,reps,covered,coverage,failures\n";
  for (const auto& r : records) {
    out << r.cell.n << ',' << shortest(r.cell.rho) << ',' << r.cell.k << ','
        << shortest(r.cell.reliability) << ',' << to_string(r.method) << ',' << r.reps << ','
        << r.covered << ',' << shortest(r.coverage) << ',' << r.failures << '\n';
  }
}

std::vector<MethodSummary> summarize(const std::vector<CoverageRecord>& records) {
  std::vector<MethodSummary> out;
  for (Method m : {Method::Corr, Method::Free, Method::Cronbach, Method::HS}) {
    MethodSummary s{m};
    std::vector<double> coverage;
    for (const auto& r : records) {
      if (r.method != m) continue;
      coverage.push_back(r.coverage);
      s.failures += r.failures;
      s.floored += r.floored;
    }
    if (coverage.empty()) continue;
    const double n = static_cast<double>(coverage.size());
    s.cells = static_cast<long>(coverage.size());
    for (double c : coverage) s.mean += c;
    s.mean /= n;
    if (coverage.size() > 1) {
      double ss = 0.0;
      for (double c : coverage) ss += (c - s.mean) * (c - s.mean);
      s.sd = std::sqrt(ss / (n - 1.0));
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace attenuation
