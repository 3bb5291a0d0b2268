#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wallflip/test_function.hpp"

namespace wallflip {

/// Thrown when a test-function support gets too close to the lattice
/// truncation boundary for the requested horizon; the CLI maps it to its
/// own exit code.
struct WindowViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown on malformed or out-of-contract configuration input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TestFunctionSpec {
  std::string family = "plateau";
  std::vector<double> params = {0.5, 1.0, 4.5, 5.0};

  TestFunction build() const;
};

/// Every acceptance gate, overridable from the plan file; the defaults are
/// the calibrated desk-scale values.
struct Thresholds {
  double identity_residual_rel = 1e-8;
  double stationarity_ks = 0.04;
  double corner_density_rel = 0.02;
  double transience_rel = 0.01;
  double bracket_rel = 0.05;
  double returns_rel = 0.05;
  double support_rel = 1e-10;
  double error_term_slope = 0.8;
  double coupling_violations = 0.0;
  double coupling_marginal_rel = 0.01;
  double fourier_abs = 1e-6;
  double invariance_ks = 0.03;
  double she_ks = 0.05;
  double moment_slope_excess = 0.05;
  double increment_slope_warn = 0.30;
};

struct StationarityParams {
  int replicas = 2000;
  double horizon_unscaled = 10000.0;
  std::vector<int> sites = {10, 50, 100};
};

struct BracketParams {
  std::vector<double> eps = {0.2, 0.1, 0.05};
  int replicas = 500;
  double t_scaled = 1.0;
  std::vector<double> residual_eps = {0.2, 0.1};
  int residual_runs = 1000;
};

struct WalkParams {
  int paths = 100;
  int big_n = 10000;
  int small_n = 100;
  TestFunctionSpec phi{"bump", {0.5, 0.5}};
  int coupling_pairs = 1000;
  int coupling_length = 10000;
  int marginal_pairs = 100000;
  int moment_replicas = 10000;
  std::vector<int> moment_lengths = {100, 1000, 10000};
  int invariance_samples = 5000;
  double invariance_eps = 0.01;
  double invariance_x = 1.0;
};

struct NormSuiteParams {
  int functions = 100;
  int grid_points = 50;
  double spacing = 0.1;
  int zetas_per_function = 20;
  double zeta_span = 40.0;
  double increment_eps = 0.05;
  int increment_replicas = 200;
  double increment_base_unscaled = 200.0;
  std::vector<double> increment_lags_unscaled = {4.0, 8.0, 20.0, 40.0};
};

struct SheParams {
  double dx = 0.01;
  double x_max = 4.0;
  double t = 0.5;
  double x0 = 1.0;
  int replicas = 1000;
};

struct SimulateParams {
  double eps = 0.2;
  int L = 50;
  double horizon_scaled = 1.0;
  int replicas = 1;
};

struct ExperimentPlan {
  int schema_version = 1;
  std::string experiment = "desk";
  std::uint64_t seed = 20260818;
  int parallelism = 0;
  std::string out_dir = "out";
  int lattice_l = 200;
  TestFunctionSpec phi;
  TestFunctionSpec psi{"bump", {2.5, 2.0}};
  double rho = 1.0;
  double s0 = 1.0;
  double s1 = 0.25;
  double r = 4.0;
  double b = 0.25;
  /// Negative selects the automatic margin 2 sqrt(t_scaled).
  double window_margin = -1.0;
  std::vector<std::string> suites = {"all"};
  StationarityParams stationarity;
  BracketParams bracket;
  WalkParams walk;
  NormSuiteParams norm_suite;
  SheParams she;
  SimulateParams simulate;
  Thresholds thresholds;

  static ExperimentPlan from_json(const nlohmann::json& j);
  static ExperimentPlan from_file(const std::string& path);
  nlohmann::json to_json() const;
  std::string hash() const;
  /// Schema-independent sanity plus window discipline for every
  /// (eps, horizon) combination the enabled suites will touch.
  void validate() const;
};

/// Window rule: the rescaled lattice must extend past the test-function
/// support by a diffusive safety margin. Throws WindowViolation.
void check_window(double eps, int L, double support_hi, double t_scaled,
                  double margin_override);

/// Stream-id convention shared by every ensemble: one byte naming the
/// ensemble, three bytes of sub-ensemble, four bytes of replica index.
/// Distinct replicas never share a stream.
constexpr std::uint64_t replica_stream(unsigned ensemble, unsigned sub,
                                       std::uint64_t replica) {
  return (static_cast<std::uint64_t>(ensemble) << 56) |
         (static_cast<std::uint64_t>(sub) << 32) | replica;
}

struct CriterionResult {
  int id = 0;
  std::string name;
  bool gating = true;
  bool pass = false;
  double statistic = 0.0;
  double threshold = 0.0;
  /// How statistic relates to threshold when passing, e.g. "<=".
  std::string cmp = "<=";
  std::vector<std::pair<std::string, double>> details;
  std::string note;
};

/// One simulated run of the lattice ensembles, for the side table.
struct ObservableRow {
  double eps = 0.0;
  double t = 0.0;
  int replica = 0;
  double w = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double eta_mass = 0.0;
  double residual = 0.0;
  double r_eps = 0.0;
};

struct StatTableRow {
  std::string statistic;
  double scale = 0.0;
  int replicas = 0;
  double mean = 0.0;
  double stderr_of_mean = 0.0;
};

struct StatReport {
  std::string experiment;
  std::string plan_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> suites;
  std::vector<CriterionResult> criteria;
  /// Per-replica lattice observables (CSV side table, not in the JSON).
  std::vector<ObservableRow> observable_rows;
  /// Aggregate statistic table (CSV side table).
  std::vector<StatTableRow> stat_rows;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

/// Runs the named suites (or criteria ids via run_criteria) at plan scale.
/// Known suites: stationarity, bracket, reflection, walk, norms, she, all.
StatReport run_suites(const ExperimentPlan& plan,
                      std::span<const std::string> suite_names);
StatReport run_criteria(const ExperimentPlan& plan,
                        std::span<const int> criterion_ids);

/// Writes report.json plus the CSV side tables under plan.out_dir.
void write_report_files(const StatReport& report,
                        const ExperimentPlan& plan);

std::string format_criterion_line(const CriterionResult& c);

/// Deterministic replica fan-out: results are collected by index, so the
/// output is independent of the number of worker threads.
template <class R, class F>
std::vector<R> parallel_map(int n, int parallelism, F fn) {
  std::vector<R> out(static_cast<std::size_t>(std::max(0, n)));
  if (n <= 0) return out;
  if (parallelism <= 0) {
    parallelism = static_cast<int>(std::thread::hardware_concurrency());
  }
  parallelism = std::max(1, std::min(parallelism, n));
  if (parallelism == 1) {
    for (int i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(parallelism);
  for (int t = 0; t < parallelism; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          out[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace wallflip
