#include "safe/simulation.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <thread>
#include <utility>

#include <json.hpp>

#include "safe/errors.hpp"
#include "safe/multiplicity.hpp"
#include "safe/random.hpp"
#include "safe/stats.hpp"

namespace safe {

namespace {

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// l-th smallest Holm-adjusted value of raw, allocation-free given scratch.
// Produces exactly kth_smallest(holm_adjust(raw), l): only the l smallest raw
// values enter the step-down prefix, and the cumulative maximum along the
// sorted order is nondecreasing, so its l-th term is the l-th order statistic
// of the adjusted values.
double synergy_pvalue(std::span<const double> raw, std::size_t l,
                      std::vector<double>& scratch) {
  const std::size_t n = raw.size();
  scratch.assign(raw.begin(), raw.end());
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(l),
                    scratch.end());
  double running_max = 0.0;
  for (std::size_t k = 0; k < l; ++k) {
    running_max = std::max(running_max, static_cast<double>(n - k) * scratch[k]);
  }
  return std::min(1.0, running_max);
}

struct Accumulators {
  std::vector<std::uint64_t> first_layer_fired;  // per SA
  std::vector<std::uint64_t> flagged;            // per SA
  std::vector<std::uint64_t> rs_cells;           // (m+1)*(m+1), index R*(m+1)+S

  explicit Accumulators(std::size_t m)
      : first_layer_fired(m, 0), flagged(m, 0), rs_cells((m + 1) * (m + 1), 0) {}

  void merge(const Accumulators& other) {
    for (std::size_t i = 0; i < first_layer_fired.size(); ++i) {
      first_layer_fired[i] += other.first_layer_fired[i];
      flagged[i] += other.flagged[i];
    }
    for (std::size_t i = 0; i < rs_cells.size(); ++i) {
      rs_cells[i] += other.rs_cells[i];
    }
  }
};

struct Workspace {
  std::vector<double> z;
  std::vector<double> stats;
  std::vector<double> pvalues;
  std::vector<double> sa_pvalues;
  std::vector<double> scratch;
};

void simulate_iteration(const Scenario& sc, const Matrix& lower,
                        const GroundTruth& truth, const CounterRng& rng,
                        std::uint64_t iteration, Workspace& ws, Accumulators& acc) {
  const auto m = static_cast<std::size_t>(sc.m);
  const auto n = static_cast<std::size_t>(sc.n);
  const std::size_t dim = m * n;

  const std::uint64_t base = iteration * dim;
  for (std::size_t k = 0; k < dim; ++k) {
    ws.z[k] = rng.normal(base + k);
  }
  lower_triangular_multiply(lower, ws.z, ws.stats);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double stat = sc.mu0[j] + sc.w[i] + ws.stats[i * n + j];
      ws.pvalues[i * n + j] = normal_upper_tail(stat);
    }
  }

  const auto l = static_cast<std::size_t>(sc.l);
  for (std::size_t i = 0; i < m; ++i) {
    const std::span<const double> row{ws.pvalues.data() + i * n, n};
    ws.sa_pvalues[i] = (n >= l) ? synergy_pvalue(row, l, ws.scratch) : 1.0;
    if (ws.sa_pvalues[i] <= sc.alpha) {
      ++acc.first_layer_fired[i];
    }
  }

  const std::vector<double> q = bh_qvalues(ws.sa_pvalues);
  std::size_t r_count = 0;
  std::size_t s_count = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (q[i] <= sc.alpha) {
      ++acc.flagged[i];
      ++r_count;
      if (!truth.sa_alt[i]) {
        ++s_count;
      }
    }
  }
  ++acc.rs_cells[r_count * (m + 1) + s_count];
}

Estimate proportion_estimate(std::uint64_t count, std::uint64_t total) {
  const double value = static_cast<double>(count) / static_cast<double>(total);
  const double se = std::sqrt(value * (1.0 - value) / static_cast<double>(total));
  return {value, se};
}

}  // namespace

void validate_scenario(const Scenario& scenario) {
  const std::string tag =
      scenario.name.empty() ? std::string("scenario") : "scenario '" + scenario.name + "'";
  if (scenario.m < 1 || scenario.n < 1) {
    throw InvalidInput(tag + ": m and n must be >= 1");
  }
  if (scenario.mu0.size() != static_cast<std::size_t>(scenario.n)) {
    throw InvalidInput(tag + ": mu0 must have n = " + std::to_string(scenario.n) +
                       " entries, got " + std::to_string(scenario.mu0.size()));
  }
  if (scenario.w.size() != static_cast<std::size_t>(scenario.m)) {
    throw InvalidInput(tag + ": w must have m = " + std::to_string(scenario.m) +
                       " entries, got " + std::to_string(scenario.w.size()));
  }
  if (!(scenario.rho_r > -1.0 && scenario.rho_r < 1.0) ||
      !(scenario.rho_v > -1.0 && scenario.rho_v < 1.0)) {
    throw InvalidInput(tag + ": rho_r and rho_v must lie in (-1, 1)");
  }
  if (scenario.iterations < 1) {
    throw InvalidInput(tag + ": iterations must be >= 1");
  }
  if (scenario.l < 1) {
    throw InvalidInput(tag + ": l must be >= 1");
  }
  if (!(scenario.alpha >= 0.0 && scenario.alpha < 1.0)) {
    throw InvalidInput(tag + ": alpha must lie in [0, 1)");
  }
}

GroundTruth ground_truth(const Scenario& scenario) {
  validate_scenario(scenario);
  GroundTruth truth;
  truth.elementary_alt.resize(scenario.m);
  truth.sa_alt.resize(scenario.m);
  for (int i = 0; i < scenario.m; ++i) {
    auto& row = truth.elementary_alt[i];
    row.resize(scenario.n);
    int alt_count = 0;
    for (int j = 0; j < scenario.n; ++j) {
      row[j] = scenario.mu0[j] + scenario.w[i] > 0.0;
      alt_count += row[j] ? 1 : 0;
    }
    truth.sa_alt[i] = alt_count >= scenario.l;
  }
  return truth;
}

Matrix build_cs_correlation(int m, int n, double rho_r, double rho_v) {
  if (m < 1 || n < 1) {
    throw InvalidInput("build_cs_correlation: m and n must be >= 1");
  }
  const auto dim = static_cast<std::size_t>(m) * static_cast<std::size_t>(n);
  Matrix corr(dim, dim);
  for (std::size_t a = 0; a < dim; ++a) {
    const std::size_t block_a = a / static_cast<std::size_t>(n);
    for (std::size_t b = 0; b < dim; ++b) {
      if (a == b) {
        corr(a, b) = 1.0;
      } else if (block_a == b / static_cast<std::size_t>(n)) {
        corr(a, b) = rho_v;
      } else {
        corr(a, b) = rho_r;
      }
    }
  }
  return corr;
}

Matrix sample_statistics(const Scenario& scenario, const Matrix& chol_lower,
                         std::uint64_t iteration) {
  validate_scenario(scenario);
  const auto m = static_cast<std::size_t>(scenario.m);
  const auto n = static_cast<std::size_t>(scenario.n);
  const std::size_t dim = m * n;
  if (chol_lower.rows() != dim || chol_lower.cols() != dim) {
    throw InvalidInput("sample_statistics: Cholesky factor has wrong dimensions");
  }

  const CounterRng rng(scenario.seed);
  std::vector<double> z(dim);
  const std::uint64_t base = iteration * dim;
  for (std::size_t k = 0; k < dim; ++k) {
    z[k] = rng.normal(base + k);
  }
  std::vector<double> y(dim);
  lower_triangular_multiply(chol_lower, z, y);

  Matrix stats(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      stats(i, j) = scenario.mu0[j] + scenario.w[i] + y[i * n + j];
    }
  }
  return stats;
}

Matrix sample_statistics(const Scenario& scenario, std::uint64_t iteration) {
  validate_scenario(scenario);
  const Matrix corr =
      build_cs_correlation(scenario.m, scenario.n, scenario.rho_r, scenario.rho_v);
  return sample_statistics(scenario, cholesky_lower(corr), iteration);
}

Matrix pvalues_from_statistics(const Matrix& stats) {
  Matrix p(stats.rows(), stats.cols());
  for (std::size_t i = 0; i < stats.rows(); ++i) {
    for (std::size_t j = 0; j < stats.cols(); ++j) {
      p(i, j) = normal_upper_tail(stats(i, j));
    }
  }
  return p;
}

SimulationReport run_scenario(const Scenario& scenario, unsigned threads) {
  validate_scenario(scenario);
  const Matrix corr =
      build_cs_correlation(scenario.m, scenario.n, scenario.rho_r, scenario.rho_v);
  const Matrix lower = cholesky_lower(corr);  // enforces positive definiteness
  const GroundTruth truth = ground_truth(scenario);

  const auto m = static_cast<std::size_t>(scenario.m);
  const auto n = static_cast<std::size_t>(scenario.n);
  const std::uint64_t total = scenario.iterations;

  unsigned worker_count = threads != 0 ? threads : std::thread::hardware_concurrency();
  if (worker_count == 0) {
    worker_count = 1;
  }
  worker_count = static_cast<unsigned>(
      std::min<std::uint64_t>(worker_count, total));

  const CounterRng rng(scenario.seed);
  std::vector<Accumulators> partials(worker_count, Accumulators(m));

  auto work = [&](unsigned worker, std::uint64_t begin, std::uint64_t end) {
    Workspace ws;
    ws.z.resize(m * n);
    ws.stats.resize(m * n);
    ws.pvalues.resize(m * n);
    ws.sa_pvalues.resize(m);
    for (std::uint64_t t = begin; t < end; ++t) {
      simulate_iteration(scenario, lower, truth, rng, t, ws, partials[worker]);
    }
  };

  if (worker_count == 1) {
    work(0, 0, total);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    const std::uint64_t chunk = total / worker_count;
    const std::uint64_t remainder = total % worker_count;
    std::uint64_t begin = 0;
    for (unsigned wkr = 0; wkr < worker_count; ++wkr) {
      const std::uint64_t end = begin + chunk + (wkr < remainder ? 1 : 0);
      pool.emplace_back(work, wkr, begin, end);
      begin = end;
    }
    for (auto& th : pool) {
      th.join();
    }
  }

  Accumulators totals(m);
  for (const Accumulators& part : partials) {
    totals.merge(part);
  }

  SimulationReport report;
  report.scenario = scenario;
  report.sa_alt = truth.sa_alt;
  report.wrong_rejection.resize(m);
  report.power.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (truth.sa_alt[i]) {
      report.power[i] = proportion_estimate(totals.flagged[i], total);
    } else {
      report.wrong_rejection[i] = proportion_estimate(totals.first_layer_fired[i], total);
    }
  }

  // FDR from the (R, S) histogram, accumulated in a fixed cell order so the
  // result does not depend on the worker count.
  double sum_q = 0.0;
  double sum_q2 = 0.0;
  for (std::size_t r = 1; r <= m; ++r) {
    for (std::size_t s = 0; s <= r; ++s) {
      const auto count = static_cast<double>(totals.rs_cells[r * (m + 1) + s]);
      if (count == 0.0) {
        continue;
      }
      const double ratio = static_cast<double>(s) / static_cast<double>(r);
      sum_q += count * ratio;
      sum_q2 += count * ratio * ratio;
    }
  }
  const auto total_d = static_cast<double>(total);
  const double mean_q = sum_q / total_d;
  const double var_q = std::max(0.0, sum_q2 / total_d - mean_q * mean_q);
  report.fdr = {mean_q, std::sqrt(var_q / total_d)};
  return report;
}

namespace {

std::string rho_label(double rho, double boundary, const std::string& boundary_tag) {
  return rho == boundary ? boundary_tag : format_double(rho);
}

}  // namespace

std::vector<Scenario> scenario_grid() {
  std::vector<Scenario> grid;
  grid.reserve(56);
  const int n = 15;
  for (const int m : {5, 10}) {
    const double boundary = -1.0 / (n * m - 1);
    const std::string boundary_tag = "-1/" + std::to_string(n * m - 1);

    std::vector<double> mu_m1(n, 0.0);
    std::vector<double> mu_m2(n, 0.0);
    mu_m2[0] = 6.0;
    std::vector<double> w_s1(m, 0.0);
    std::vector<double> w_s2(m, 0.0);
    w_s2[0] = 3.0;
    std::vector<double> w_s3(m, 0.0);
    w_s3[0] = 3.0;
    w_s3[1] = 3.0;

    struct Block {
      const char* tag;
      const std::vector<double>* mu0;
      const std::vector<double>* w;
    };
    const Block blocks[] = {{"M1+S1", &mu_m1, &w_s1},
                            {"M2+S1", &mu_m2, &w_s1},
                            {"M2+S2", &mu_m2, &w_s2},
                            {"M2+S3", &mu_m2, &w_s3}};
    const std::pair<double, double> rho_pairs[] = {
        {0.0, 0.0},      {0.0, boundary},      {0.0, 0.7},     {boundary, 0.0},
        {boundary, boundary}, {boundary, 0.7}, {0.7, 0.7}};

    for (const Block& block : blocks) {
      for (const auto& [rho_r, rho_v] : rho_pairs) {
        Scenario sc;
        sc.m = m;
        sc.n = n;
        sc.mu0 = *block.mu0;
        sc.w = *block.w;
        sc.rho_r = rho_r;
        sc.rho_v = rho_v;
        sc.name = "m" + std::to_string(m) + " " + block.tag +
                  " rho_r=" + rho_label(rho_r, boundary, boundary_tag) +
                  " rho_v=" + rho_label(rho_v, boundary, boundary_tag);
        grid.push_back(std::move(sc));
      }
    }
  }
  return grid;
}

namespace {

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
  while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t' ||
                         text[end - 1] == '\r')) {
    --end;
  }
  return std::string(text.substr(begin, end - begin));
}

double parse_real(const std::string& text, std::size_t line) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ParseError(line, "expected a real number, got '" + text + "'");
  }
  return value;
}

std::uint64_t parse_unsigned(const std::string& text, std::size_t line) {
  std::uint64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw ParseError(line, "expected a nonnegative integer, got '" + text + "'");
  }
  return value;
}

// For m, n, l: values that must stay well inside int range.
int parse_small_count(const std::string& text, std::size_t line) {
  const std::uint64_t value = parse_unsigned(text, line);
  if (value > 10000) {
    throw ParseError(line, "value " + text + " is out of range (max 10000)");
  }
  return static_cast<int>(value);
}

std::vector<double> parse_real_list(const std::string& text, std::size_t line) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        trim(text.substr(start, comma == std::string::npos ? std::string::npos
                                                           : comma - start));
    values.push_back(parse_real(item, line));
    if (comma == std::string::npos) {
      break;
    }
    start = comma + 1;
  }
  return values;
}

}  // namespace

Scenario parse_scenario_file(std::istream& in) {
  Scenario sc;
  sc.mu0.clear();
  sc.w.clear();

  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') {
      continue;
    }
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(lineno, "expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ParseError(lineno, "duplicate key '" + key + "'");
    }

    if (key == "name") {
      sc.name = value;
    } else if (key == "m") {
      sc.m = parse_small_count(value, lineno);
    } else if (key == "n") {
      sc.n = parse_small_count(value, lineno);
    } else if (key == "mu0") {
      sc.mu0 = parse_real_list(value, lineno);
    } else if (key == "w") {
      sc.w = parse_real_list(value, lineno);
    } else if (key == "rho_r") {
      sc.rho_r = parse_real(value, lineno);
    } else if (key == "rho_v") {
      sc.rho_v = parse_real(value, lineno);
    } else if (key == "iterations") {
      sc.iterations = parse_unsigned(value, lineno);
    } else if (key == "seed") {
      sc.seed = parse_unsigned(value, lineno);
    } else if (key == "l") {
      sc.l = parse_small_count(value, lineno);
    } else if (key == "alpha") {
      sc.alpha = parse_real(value, lineno);
    } else {
      throw ParseError(lineno, "unknown key '" + key + "'");
    }
  }

  if (!seen.contains("m") || !seen.contains("n")) {
    throw ParseError(lineno, "scenario file must define m and n");
  }
  if (sc.mu0.empty() && sc.n >= 1) {
    sc.mu0.assign(static_cast<std::size_t>(sc.n), 0.0);
  }
  if (sc.w.empty() && sc.m >= 1) {
    sc.w.assign(static_cast<std::size_t>(sc.m), 0.0);
  }
  validate_scenario(sc);
  return sc;
}

std::string serialize_scenario(const Scenario& scenario) {
  std::string out;
  if (!scenario.name.empty()) {
    out += "name = " + scenario.name + "\n";
  }
  out += "m = " + std::to_string(scenario.m) + "\n";
  out += "n = " + std::to_string(scenario.n) + "\n";
  out += "mu0 = ";
  for (std::size_t j = 0; j < scenario.mu0.size(); ++j) {
    out += (j == 0 ? "" : ",") + format_double(scenario.mu0[j]);
  }
  out += "\nw = ";
  for (std::size_t i = 0; i < scenario.w.size(); ++i) {
    out += (i == 0 ? "" : ",") + format_double(scenario.w[i]);
  }
  out += "\nrho_r = " + format_double(scenario.rho_r);
  out += "\nrho_v = " + format_double(scenario.rho_v);
  out += "\niterations = " + std::to_string(scenario.iterations);
  out += "\nseed = " + std::to_string(scenario.seed);
  out += "\nl = " + std::to_string(scenario.l);
  out += "\nalpha = " + format_double(scenario.alpha);
  out += "\n";
  return out;
}

namespace {

nlohmann::json estimates_json(const std::vector<std::optional<Estimate>>& items,
                              bool want_se) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& item : items) {
    if (item.has_value()) {
      arr.push_back(want_se ? item->se : item->value);
    } else {
      arr.push_back(nullptr);
    }
  }
  return arr;
}

std::string percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value * 100.0);
  return buf;
}

std::string optional_percent_list(const std::vector<std::optional<Estimate>>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) {
      out += ",";
    }
    out += items[i].has_value() ? percent(items[i]->value) : "-";
  }
  return out;
}

}  // namespace

void write_simulation_reports(std::ostream& out,
                              std::span<const SimulationReport> reports,
                              ReportFormat format) {
  if (format == ReportFormat::records) {
    for (const SimulationReport& report : reports) {
      nlohmann::json record;
      record["record"] = "scenario_report";
      record["name"] = report.scenario.name;
      record["m"] = report.scenario.m;
      record["n"] = report.scenario.n;
      record["mu0"] = report.scenario.mu0;
      record["w"] = report.scenario.w;
      record["rho_r"] = report.scenario.rho_r;
      record["rho_v"] = report.scenario.rho_v;
      record["iterations"] = report.scenario.iterations;
      record["seed"] = report.scenario.seed;
      record["l"] = report.scenario.l;
      record["alpha"] = report.scenario.alpha;
      record["sa_alt"] = report.sa_alt;
      record["wrong_rejection"] = estimates_json(report.wrong_rejection, false);
      record["wrong_rejection_se"] = estimates_json(report.wrong_rejection, true);
      record["power"] = estimates_json(report.power, false);
      record["power_se"] = estimates_json(report.power, true);
      record["fdr"] = report.fdr.value;
      record["fdr_se"] = report.fdr.se;
      out << record.dump() << "\n";
    }
    return;
  }

  std::size_t name_width = 8;
  for (const SimulationReport& report : reports) {
    name_width = std::max(name_width, report.scenario.name.size());
  }
  char header[256];
  std::snprintf(header, sizeof(header), "%-*s  %10s  %7s  %7s  %-28s  %s\n",
                static_cast<int>(name_width), "scenario", "iterations", "fdr%",
                "se%", "wrong-rejection% (null SAs)", "power% (alt SAs)");
  out << header;
  for (const SimulationReport& report : reports) {
    char row[512];
    std::snprintf(row, sizeof(row), "%-*s  %10llu  %7s  %7.3f  %-28s  %s\n",
                  static_cast<int>(name_width), report.scenario.name.c_str(),
                  static_cast<unsigned long long>(report.scenario.iterations),
                  percent(report.fdr.value).c_str(), report.fdr.se * 100.0,
                  optional_percent_list(report.wrong_rejection).c_str(),
                  optional_percent_list(report.power).c_str());
    out << row;
  }
}

}  // namespace safe
