#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "safe/linalg.hpp"
#include "safe/report_format.hpp"

namespace safe {

inline constexpr std::uint64_t kDefaultSimulationSeed = 1729;

// Monte Carlo scenario: m SAs with n AE variables each. Test statistics are
// multivariate normal with unit variances, mean mu0[j] + w[i] for AE variable
// j of SA i, and a compound-symmetry correlation matrix: rho_v between
// variables within one SA, rho_r between variables of different SAs. Raw
// p-values are the standard-normal upper tail of each statistic.
//
// alpha may be 0 for diagnostics (nothing can be flagged, so the estimated
// FDR is exactly 0 by the S/R := 0 convention).
struct Scenario {
  std::string name;
  int m = 5;                // SA count
  int n = 15;               // AE variables per SA
  std::vector<double> mu0;  // length n, common mean pattern
  std::vector<double> w;    // length m, per-SA shift
  double rho_r = 0.0;
  double rho_v = 0.0;
  std::uint64_t iterations = 100000;
  std::uint64_t seed = kDefaultSimulationSeed;
  int l = 2;                // synergy count
  double alpha = 0.05;
};

// Checks sizes and ranges; positive definiteness of the implied correlation
// matrix is established by the Cholesky factorization in run_scenario.
// The admissible lower bound for a common correlation is -1/(n*m - 1).
void validate_scenario(const Scenario& scenario);

struct GroundTruth {
  std::vector<std::vector<bool>> elementary_alt;  // [i][j]: mu0[j] + w[i] > 0
  std::vector<bool> sa_alt;  // at least l elementary alternatives in SA i
};

GroundTruth ground_truth(const Scenario& scenario);

struct Estimate {
  double value = 0.0;
  double se = 0.0;  // Monte Carlo standard error
};

struct SimulationReport {
  Scenario scenario;          // echo, including iterations and seed
  std::vector<bool> sa_alt;   // ground truth per SA
  // First-layer wrong-rejection probability; present only for null SAs.
  std::vector<std::optional<Estimate>> wrong_rejection;
  // Pipeline flag probability; present only for SAs under the alternative.
  std::vector<std::optional<Estimate>> power;
  Estimate fdr;  // mean of S/R with S/R := 0 when R = 0
};

// (m*n) x (m*n) compound-symmetry correlation matrix: 1 on the diagonal,
// rho_v within an SA block, rho_r across blocks.
Matrix build_cs_correlation(int m, int n, double rho_r, double rho_v);

// One draw of the m x n statistic matrix: mu + L*z with z a vector of
// independent standard normals taken from the counter stream keyed by
// (scenario.seed, iteration); coordinate (i, j) uses stream position
// iteration * m * n + i * n + j. Bit-for-bit reproducible.
Matrix sample_statistics(const Scenario& scenario, const Matrix& chol_lower,
                         std::uint64_t iteration);

// Convenience overload that factors the correlation matrix itself.
Matrix sample_statistics(const Scenario& scenario, std::uint64_t iteration);

// Element-wise standard-normal upper tail.
Matrix pvalues_from_statistics(const Matrix& stats);

// Runs scenario.iterations Monte Carlo iterations of the two-layer pipeline
// and estimates per-SA error rates and the pipeline FDR. Iterations are
// distributed over `threads` workers (0 = hardware concurrency); all
// accumulation is integer counting, so the report is identical for any
// worker count.
SimulationReport run_scenario(const Scenario& scenario, unsigned threads = 0);

// The 56 built-in scenarios: for each m in {5, 10} (n = 15), the four blocks
// M1+S1, M2+S1, M2+S2, M2+S3 crossed with seven (rho_r, rho_v) pairs
// {(0,0), (0,b), (0,0.7), (b,0), (b,b), (b,0.7), (0.7,0.7)} where
// b = -1/(n*m - 1) is the admissible boundary. Mean patterns: M1 = zeros,
// M2 = (6, 0, ..., 0); shifts: S1 = zeros, S2 = (3, 0, ...), S3 = (3, 3, 0, ...).
// Ordering: m-major, then block, then rho pair.
std::vector<Scenario> scenario_grid();

// Flat key-value scenario file: one `key = value` per line, `#` comments,
// keys m, n, mu0, w, rho_r, rho_v, iterations, seed, l, alpha, name; mu0 and
// w are comma-separated reals defaulting to zeros. Throws ParseError with
// the offending line, then validates like validate_scenario.
Scenario parse_scenario_file(std::istream& in);

// Inverse of parse_scenario_file; doubles are written with round-trip
// precision.
std::string serialize_scenario(const Scenario& scenario);

// records: one self-describing JSON object per scenario, full precision.
// table: aligned human-readable summary (percentages).
void write_simulation_reports(std::ostream& out,
                              std::span<const SimulationReport> reports,
                              ReportFormat format);

}  // namespace safe
