#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "safe/data_io.hpp"
#include "safe/engine.hpp"
#include "safe/errors.hpp"
#include "safe/simulation.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;  // usage, parse, or validation problems
constexpr int kExitIo = 3;     // operational file-system failures

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Relative output paths resolve under SAFESCREEN_OUT_DIR when it is set.
fs::path resolve_output(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* base = std::getenv("SAFESCREEN_OUT_DIR")) {
      return fs::path(base) / p;
    }
  }
  return p;
}

// Writes to the resolved path, or to stdout when path is empty.
void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  const fs::path resolved = resolve_output(path);
  std::ofstream out(resolved, std::ios::binary);
  if (!out) {
    throw IoFailure("cannot open output file: " + resolved.string());
  }
  out << text;
  if (!out.good()) {
    throw IoFailure("failed while writing: " + resolved.string());
  }
}

safe::SafetyDataset load_dataset(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoFailure("cannot open input file: " + path);
  }
  return safe::parse_dataset(in, safe::DatasetFormat{delimiter});
}

char delimiter_from_name(const std::string& name) {
  return name == "tab" ? '\t' : ',';
}

safe::Sidedness sidedness_from_name(const std::string& name) {
  if (name == "greater") {
    return safe::Sidedness::greater;
  }
  if (name == "less") {
    return safe::Sidedness::less;
  }
  return safe::Sidedness::two_sided;
}

safe::ReportFormat format_from_name(const std::string& name) {
  return name == "records" ? safe::ReportFormat::records : safe::ReportFormat::table;
}

struct AnalyzeOptions {
  std::string input;
  int l = 2;
  double alpha = 0.05;
  std::string method = "bh";
  std::string sided = "two";
  std::string delimiter = "comma";
  std::string small_sa = "pvalue_one";
  std::string format = "table";
  std::string out;
  std::string plot_out;
};

int run_analyze(const AnalyzeOptions& opts) {
  const safe::SafetyDataset dataset =
      load_dataset(opts.input, delimiter_from_name(opts.delimiter));
  const auto groups = safe::dataset_to_groups(dataset, sidedness_from_name(opts.sided));

  safe::SafeConfig config;
  config.l = opts.l;
  config.alpha = opts.alpha;
  config.cross_sa_method =
      opts.method == "by" ? safe::CrossSaMethod::by : safe::CrossSaMethod::bh;
  config.small_sa_policy = opts.small_sa == "error" ? safe::SmallSaPolicy::error
                                                    : safe::SmallSaPolicy::pvalue_one;
  const safe::SafeResult result = safe::safe_analyze(groups, config);

  std::ostringstream report;
  safe::emit_report(result, format_from_name(opts.format), report);
  write_text(opts.out, report.str());

  if (!opts.plot_out.empty()) {
    const safe::PlotTable plot = safe::emit_plot_table(result);
    std::ostringstream table;
    safe::write_plot_table(plot, table);
    write_text(opts.plot_out, table.str());
  }
  return kExitOk;
}

struct SimulateOptions {
  std::string scenario_path;
  bool table1 = false;
  bool table2 = false;
  std::uint64_t iterations = 0;
  bool iterations_set = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned threads = 0;
  std::string format = "table";
  std::string out;
};

int run_simulate(const SimulateOptions& opts) {
  const int sources = (opts.scenario_path.empty() ? 0 : 1) + (opts.table1 ? 1 : 0) +
                      (opts.table2 ? 1 : 0);
  if (sources != 1) {
    std::cerr << "error: choose exactly one of <scenario-file>, --table1, --table2\n";
    return kExitUsage;
  }
  if (opts.iterations_set && opts.iterations == 0) {
    std::cerr << "error: --iterations must be >= 1\n";
    return kExitUsage;
  }

  std::vector<safe::Scenario> scenarios;
  if (!opts.scenario_path.empty()) {
    std::ifstream in(opts.scenario_path, std::ios::binary);
    if (!in) {
      throw IoFailure("cannot open scenario file: " + opts.scenario_path);
    }
    scenarios.push_back(safe::parse_scenario_file(in));
  } else {
    for (safe::Scenario& sc : safe::scenario_grid()) {
      if ((opts.table1 && sc.m == 5) || (opts.table2 && sc.m == 10)) {
        scenarios.push_back(std::move(sc));
      }
    }
  }

  for (safe::Scenario& sc : scenarios) {
    if (opts.iterations_set) {
      sc.iterations = opts.iterations;
    }
    if (opts.seed_set) {
      sc.seed = opts.seed;
    }
  }

  std::vector<safe::SimulationReport> reports;
  reports.reserve(scenarios.size());
  for (const safe::Scenario& sc : scenarios) {
    try {
      reports.push_back(safe::run_scenario(sc, opts.threads));
    } catch (const safe::NotPositiveDefinite& e) {
      const double boundary = -1.0 / (static_cast<double>(sc.n) * sc.m - 1.0);
      throw safe::InvalidInput(
          "scenario '" + sc.name + "': correlation matrix is not positive definite " +
          "(pivot " + std::to_string(e.pivot()) + "); common correlations must be >= " +
          "-1/(n*m-1) = " + std::to_string(boundary));
    }
  }

  std::ostringstream text;
  safe::write_simulation_reports(text, reports, format_from_name(opts.format));
  write_text(opts.out, text.str());
  return kExitOk;
}

struct CompareOptions {
  std::string input;
  double alpha = 0.05;
  std::string sided = "two";
  std::string delimiter = "comma";
  std::string format = "table";
  std::string out;
};

int run_compare(const CompareOptions& opts) {
  const safe::SafetyDataset dataset =
      load_dataset(opts.input, delimiter_from_name(opts.delimiter));
  const auto groups = safe::dataset_to_groups(dataset, sidedness_from_name(opts.sided));

  safe::SafeConfig config;
  config.alpha = opts.alpha;
  const safe::SafeResult two_layer = safe::safe_analyze(groups, config);
  const safe::DirectResult holm =
      safe::direct_analyze(groups, safe::DirectMethod::holm_direct, opts.alpha);
  const safe::DirectResult bh =
      safe::direct_analyze(groups, safe::DirectMethod::bh_direct, opts.alpha);

  std::ostringstream text;
  safe::emit_comparison(two_layer, holm, bh, format_from_name(opts.format), text);
  write_text(opts.out, text.str());
  return kExitOk;
}

struct GridOptions {
  bool table1 = false;
  bool table2 = false;
  std::string out;
};

int run_grid(const GridOptions& opts) {
  std::ostringstream text;
  std::size_t index = 0;
  for (const safe::Scenario& sc : safe::scenario_grid()) {
    const bool wanted = (!opts.table1 && !opts.table2) || (opts.table1 && sc.m == 5) ||
                        (opts.table2 && sc.m == 10);
    if (!wanted) {
      continue;
    }
    if (index > 0) {
      text << "\n";
    }
    text << "# scenario " << ++index << "\n" << safe::serialize_scenario(sc);
  }
  write_text(opts.out, text.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "safescreen: two-layer safety signal screening for clinical-trial "
      "adverse-event tables, with a Monte Carlo error-rate laboratory"};
  app.require_subcommand(1);

  AnalyzeOptions analyze_opts;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Screen an AE incidence table with the two-layer pipeline");
  analyze->add_option("input", analyze_opts.input, "AE incidence file")->required();
  analyze->add_option("--l", analyze_opts.l, "synergy count (findings required per SA)")
      ->capture_default_str();
  analyze->add_option("--alpha", analyze_opts.alpha, "FDR level across SAs")
      ->capture_default_str();
  analyze->add_option("--method", analyze_opts.method, "cross-SA q-value method")
      ->check(CLI::IsMember({"bh", "by"}))
      ->capture_default_str();
  analyze->add_option("--sided", analyze_opts.sided, "proportion-test sidedness")
      ->check(CLI::IsMember({"two", "greater", "less"}))
      ->capture_default_str();
  analyze->add_option("--delimiter", analyze_opts.delimiter, "input delimiter")
      ->check(CLI::IsMember({"comma", "tab"}))
      ->capture_default_str();
  analyze
      ->add_option("--small-sa", analyze_opts.small_sa,
                   "policy for SAs with fewer than l AEs")
      ->check(CLI::IsMember({"pvalue_one", "error"}))
      ->capture_default_str();
  analyze->add_option("--format", analyze_opts.format, "report format")
      ->check(CLI::IsMember({"table", "records"}))
      ->capture_default_str();
  analyze->add_option("--out", analyze_opts.out, "report path (default: stdout)");
  analyze->add_option("--plot-out", analyze_opts.plot_out,
                      "plot table path (tab-separated)");

  SimulateOptions simulate_opts;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Estimate error rates of the pipeline by Monte Carlo");
  simulate->add_option("scenario", simulate_opts.scenario_path,
                       "scenario file (key = value lines)");
  simulate->add_flag("--table1", simulate_opts.table1, "run the built-in m=5 grid");
  simulate->add_flag("--table2", simulate_opts.table2, "run the built-in m=10 grid");
  CLI::Option* iter_opt = simulate->add_option(
      "--iterations", simulate_opts.iterations, "override iteration count");
  CLI::Option* seed_opt =
      simulate->add_option("--seed", simulate_opts.seed, "override the master seed");
  simulate
      ->add_option("--threads", simulate_opts.threads,
                   "worker threads (0 = hardware)")
      ->capture_default_str();
  simulate->add_option("--format", simulate_opts.format, "report format")
      ->check(CLI::IsMember({"table", "records"}))
      ->capture_default_str();
  simulate->add_option("--out", simulate_opts.out, "report path (default: stdout)");

  CompareOptions compare_opts;
  CLI::App* compare = app.add_subcommand(
      "compare", "Contrast the two-layer pipeline with direct Holm / direct BH");
  compare->add_option("input", compare_opts.input, "AE incidence file")->required();
  compare->add_option("--alpha", compare_opts.alpha, "nominal level")
      ->capture_default_str();
  compare->add_option("--sided", compare_opts.sided, "proportion-test sidedness")
      ->check(CLI::IsMember({"two", "greater", "less"}))
      ->capture_default_str();
  compare->add_option("--delimiter", compare_opts.delimiter, "input delimiter")
      ->check(CLI::IsMember({"comma", "tab"}))
      ->capture_default_str();
  compare->add_option("--format", compare_opts.format, "report format")
      ->check(CLI::IsMember({"table", "records"}))
      ->capture_default_str();
  compare->add_option("--out", compare_opts.out, "report path (default: stdout)");

  GridOptions grid_opts;
  CLI::App* grid = app.add_subcommand(
      "grid", "Print the built-in simulation scenarios as scenario files");
  grid->add_flag("--table1", grid_opts.table1, "only the m=5 grid");
  grid->add_flag("--table2", grid_opts.table2, "only the m=10 grid");
  grid->add_option("--out", grid_opts.out, "output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  simulate_opts.iterations_set = iter_opt->count() > 0;
  simulate_opts.seed_set = seed_opt->count() > 0;

  try {
    if (analyze->parsed()) {
      return run_analyze(analyze_opts);
    }
    if (simulate->parsed()) {
      return run_simulate(simulate_opts);
    }
    if (compare->parsed()) {
      return run_compare(compare_opts);
    }
    if (grid->parsed()) {
      return run_grid(grid_opts);
    }
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const safe::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const safe::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const safe::NotPositiveDefinite& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
