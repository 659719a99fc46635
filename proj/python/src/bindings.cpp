#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "attenuation/curves.hpp"
#include "attenuation/inference.hpp"
#include "attenuation/simulation.hpp"

namespace py = pybind11;
using namespace attenuation;

namespace {

// Sample sizes arrive as one int or as three; testlet counts as one or two.
StudyDesign make_design(const std::vector<long>& n, const std::vector<long>& k) {
  StudyDesign design;
  if (n.size() == 1)
    design = StudyDesign::uniform(n[0]);
  else if (n.size() == 3)
    design = {n[0], n[1], n[2], std::nullopt, std::nullopt};
  else
    throw std::invalid_argument("n expects one or three sample sizes");
  if (k.size() == 1) {
    design.k2 = design.k3 = k[0];
  } else if (k.size() == 2) {
    design.k2 = k[0];
    design.k3 = k[1];
  } else if (!k.empty()) {
    throw std::invalid_argument("k expects one or two testlet counts");
  }
  return design;
}

std::vector<long> as_sizes(const py::object& obj) {
  if (obj.is_none()) return {};
  if (py::isinstance<py::int_>(obj)) return {obj.cast<long>()};
  return obj.cast<std::vector<long>>();
}

EstimateSet make_estimates(const std::vector<double>& r) {
  if (r.size() != 3) throw std::invalid_argument("r expects three values (r1, r2, r3)");
  return {r[0], r[1], r[2]};
}

py::dict set_to_dict(const ConfidenceSet& set) {
  py::dict out;
  out["kind"] = std::string(to_string(set.kind));
  out["level"] = set.level;
  out["pieces"] = set.pieces;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Conservative inference for correlations corrected for attenuation";

  m.def(
      "pvalue",
      [](double rho, const std::vector<double>& r, const py::object& n, const std::string& method,
         const py::object& k) {
        const auto res = pvalue(rho, make_estimates(r), make_design(as_sizes(n), as_sizes(k)),
                                parse_method(method));
        py::dict out;
        out["p"] = res.p;
        out["objective"] = res.objective;
        out["nuisance"] = res.nuisance ? py::cast(*res.nuisance) : py::none();
        return out;
      },
      py::arg("rho"), py::arg("r"), py::arg("n"), py::arg("method") = "corr", py::arg("k") = py::none(),
      "p-value for H0: rho = rho0. Returns a dict with p, objective and nuisance.");

  m.def(
      "ci",
      [](const std::vector<double>& r, const py::object& n, const std::string& method, double level,
         const py::object& k, int grid) {
        return set_to_dict(confidence_set(make_estimates(r), make_design(as_sizes(n), as_sizes(k)),
                                          parse_method(method), level, grid));
      },
      py::arg("r"), py::arg("n"), py::arg("method") = "corr", py::arg("level") = 0.95,
      py::arg("k") = py::none(), py::arg("grid") = kDefaultSetGrid,
      "Confidence set {rho : p(rho) >= 1 - level} as a dict with kind, level and pieces.");

  m.def(
      "cc",
      [](const std::vector<double>& r, const py::object& n, const std::string& method,
         const py::object& k, int grid) {
        const auto curve = confidence_curve(make_estimates(r), make_design(as_sizes(n), as_sizes(k)),
                                            parse_method(method), grid);
        return std::make_pair(curve.grid, curve.cc);
      },
      py::arg("r"), py::arg("n"), py::arg("method") = "corr", py::arg("k") = py::none(),
      py::arg("grid") = kDefaultCurveGrid, "Confidence curve as a (rho, 1 - p) pair of lists.");

  m.def(
      "point_estimate",
      [](const std::vector<double>& r, const std::string& method) {
        return point_estimate(make_estimates(r), parse_method(method));
      },
      py::arg("r"), py::arg("method") = "corr");

  m.def(
      "hs_interval",
      [](const std::vector<double>& r, const py::object& n, double level) {
        const auto iv = hs_interval(make_estimates(r), make_design(as_sizes(n), {}), level);
        py::dict out;
        out["raw"] = std::make_pair(iv.raw_lo, iv.raw_hi);
        out["clipped"] = std::make_pair(iv.lo, iv.hi);
        return out;
      },
      py::arg("r"), py::arg("n"), py::arg("level") = 0.95);

  m.def(
      "simulate",
      [](const std::string& config_json, std::optional<std::uint64_t> seed, int threads) {
        auto config = parse_config(config_json);
        if (seed) config.seed = *seed;
        std::vector<CoverageRecord> records;
        {
          py::gil_scoped_release release;
          records = run_coverage(config, threads);
        }
        py::list out;
        for (const auto& rec : records) {
          py::dict row;
          row["N"] = rec.cell.n;
          row["rho"] = rec.cell.rho;
          row["k"] = rec.cell.k;
          row["R"] = rec.cell.reliability;
          row["method"] = std::string(to_string(rec.method));
          row["reps"] = rec.reps;
          row["covered"] = rec.covered;
          row["coverage"] = rec.coverage;
          row["failures"] = rec.failures;
          out.append(row);
        }
        return out;
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("threads") = 1,
      "Coverage study from a JSON config string; one dict per cell and method.");

  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
}
