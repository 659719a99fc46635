#include "attenuation/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "attenuation/curves.hpp"
#include "attenuation/inference.hpp"
#include "attenuation/simulation.hpp"

namespace attenuation::cli {

namespace {

// Raised for semantically invalid flag values; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt7(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.7g", v);
  return buf;
}

struct ModelFlags {
  std::string method = "corr";
  std::vector<double> r;
  std::vector<long> n;
  std::vector<long> k;
  bool reliabilities = false;

  void attach(CLI::App& cmd) {
    cmd.add_option("--method", method, "corr, free, cronbach or hs")->required();
    cmd.add_option("--r", r, "r1,r2,r3: observed correlation and the two reliability estimates")
        ->required()
        ->delimiter(',')
        ->expected(3);
    cmd.add_option("--n", n, "N1[,N2,N3]: sample sizes (one value applies to all three)")
        ->required()
        ->delimiter(',')
        ->expected(1, 3);
    cmd.add_option("--k", k, "k2,k3: testlet counts (cronbach only)")->delimiter(',')->expected(1, 2);
    cmd.add_flag("--reliabilities", reliabilities,
                 "the 2nd and 3rd values of --r are reliabilities (squared correlations)");
  }

  struct Resolved {
    Method method;
    EstimateSet est;
    StudyDesign design;
  };

  Resolved resolve() const {
    Resolved out{};
    try {
      out.method = parse_method(method);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (r.size() != 3) throw UsageError("--r expects exactly three values");

    out.est = {r[0], r[1], r[2]};
    const bool correlation_scale = out.method == Method::Corr || out.method == Method::Free;
    if (correlation_scale && reliabilities) {
      if (r[1] < 0.0 || r[2] < 0.0) throw UsageError("reliabilities must be nonnegative");
      out.est.rel2 = std::sqrt(r[1]);
      out.est.rel3 = std::sqrt(r[2]);
    }

    if (n.size() == 1)
      out.design = StudyDesign::uniform(n[0]);
    else if (n.size() == 3)
      out.design = {n[0], n[1], n[2], std::nullopt, std::nullopt};
    else
      throw UsageError("--n expects one or three values");

    if (out.method == Method::Cronbach) {
      if (k.empty()) throw UsageError("--k is required for the cronbach method");
      out.design.k2 = k[0];
      out.design.k3 = k.size() == 2 ? k[1] : k[0];
    } else if (!k.empty()) {
      throw UsageError("--k is only valid with the cronbach method");
    }

    try {
      validate(out.est, out.design, out.method);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return out;
  }
};

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0,1)");
}

int cmd_pvalue(const ModelFlags& flags, double rho, std::ostream& out) {
  const auto m = flags.resolve();
  if (m.method != Method::HS && !(rho >= -1.0 && rho <= 1.0))
    throw UsageError("rho must lie in [-1,1]");
  if (!std::isfinite(rho)) throw UsageError("rho must be finite");
  out << fmt7(pvalue(rho, m.est, m.design, m.method).p) << '\n';
  return kExitOk;
}

int cmd_ci(const ModelFlags& flags, double level, int grid, std::ostream& out) {
  const auto m = flags.resolve();
  check_level(level);
  if (grid < 16) throw UsageError("grid must be at least 16");
  const auto set = confidence_set(m.est, m.design, m.method, level, grid);
  out << to_string(set.kind);
  if (set.pieces.empty()) out << ",,";
  for (const auto& [lo, hi] : set.pieces) out << ',' << fmt7(lo) << ',' << fmt7(hi);
  out << '\n';
  return kExitOk;
}

int cmd_cc(const ModelFlags& flags, int grid, double level, const std::string& csv_path,
           const std::string& svg_path, std::ostream& err) {
  const auto m = flags.resolve();
  check_level(level);
  if (grid < 16) throw UsageError("grid must be at least 16");
  const auto curve = confidence_curve(m.est, m.design, m.method, grid);

  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) {
    err << "error: cannot open '" << csv_path << "' for writing\n";
    return kExitFailure;
  }
  write_curve_csv(csv, curve);
  if (!csv.flush()) {
    err << "error: failed writing '" << csv_path << "'\n";
    return kExitFailure;
  }

  if (!svg_path.empty()) {
    std::ofstream svg(svg_path, std::ios::binary);
    if (!svg) {
      err << "error: cannot open '" << svg_path << "' for writing\n";
      return kExitFailure;
    }
    write_curve_svg(svg, curve, level);
  }
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed, int threads, std::ostream& out,
                 std::ostream& err) {
  std::ifstream in(config_path);
  if (!in) throw UsageError("cannot read config '" + config_path + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  SimConfig config;
  try {
    config = parse_config(text);
  } catch (const ConfigError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  if (seed) config.seed = *seed;
  if (threads < 1) throw UsageError("threads must be at least 1");

  const auto records = run_coverage(config, threads);

  std::ofstream csv(out_path, std::ios::binary);
  if (!csv) {
    err << "error: cannot open '" << out_path << "' for writing\n";
    return kExitFailure;
  }
  write_coverage_csv(csv, records);
  if (!csv.flush()) {
    err << "error: failed writing '" << out_path << "'\n";
    return kExitFailure;
  }

  out << "method,cells,mean_coverage,sd_coverage,failures,floored\n";
  for (const auto& s : summarize(records))
    out << to_string(s.method) << ',' << s.cells << ',' << fmt7(s.mean) << ',' << fmt7(s.sd)
        << ',' << s.failures << ',' << s.floored << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inference for correlations corrected for attenuation", "attenuation"};
  app.require_subcommand(1);

  ModelFlags pv_flags, ci_flags, cc_flags;
  double rho = 0.0;
  double ci_level = 0.95, cc_level = 0.95;
  int ci_grid = kDefaultSetGrid, cc_grid = kDefaultCurveGrid;
  std::string cc_out, cc_svg, sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  int sim_threads = 1;

  auto* pv = app.add_subcommand("pvalue", "p-value for H0: rho = rho0");
  pv_flags.attach(*pv);
  pv->add_option("--rho", rho, "hypothesised corrected correlation")->required();

  auto* ci = app.add_subcommand("ci", "confidence set, printed as kind,lo,hi");
  ci_flags.attach(*ci);
  ci->add_option("--level", ci_level, "confidence level")->capture_default_str();
  ci->add_option("--grid", ci_grid, "scan grid size for boundary search")->capture_default_str();

  auto* cc = app.add_subcommand("cc", "confidence curve written as CSV");
  cc_flags.attach(*cc);
  cc->add_option("--out", cc_out, "CSV output path")->required();
  cc->add_option("--grid", cc_grid, "number of grid points on [-1, 1]")->capture_default_str();
  cc->add_option("--svg", cc_svg, "optional SVG plot path");
  cc->add_option("--level", cc_level, "level drawn as a rule in the SVG")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage study");
  sim->add_option("--config", sim_config, "JSON simulation config")->required();
  sim->add_option("--out", sim_out, "results CSV path")->required();
  auto* seed_opt = sim->add_option("--seed", sim_seed, "random seed (overrides the config)");
  sim->add_option("--threads", sim_threads, "worker threads")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (pv->parsed()) return cmd_pvalue(pv_flags, rho, out);
    if (ci->parsed()) return cmd_ci(ci_flags, ci_level, ci_grid, out);
    if (cc->parsed()) return cmd_cc(cc_flags, cc_grid, cc_level, cc_out, cc_svg, err);
    if (sim->parsed()) {
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) seed = sim_seed;
      return cmd_simulate(sim_config, sim_out, seed, sim_threads, out, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace attenuation::cli
