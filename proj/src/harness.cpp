#include "wallflip/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>

#include "wallflip/conditioned_walk.hpp"
#include "wallflip/fourier.hpp"
#include "wallflip/interface_dynamics.hpp"
#include "wallflip/norms.hpp"
#include "wallflip/observables.hpp"
#include "wallflip/rng.hpp"
#include "wallflip/she.hpp"
#include "wallflip/stats.hpp"

namespace wallflip {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

/// Strict object reader: every key must be consumed, unknown keys are
/// configuration errors so that typos never silently fall back to defaults.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_ + ": expected a JSON object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const nlohmann::json* child(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return nullptr;
    return &j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError(path_ + ": unknown key \"" + it.key() + "\"");
      }
    }
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string num_str(double v) { return nlohmann::json(v).dump(); }

TestFunctionSpec parse_spec(const nlohmann::json& j, const std::string& path) {
  TestFunctionSpec s;
  ObjectReader r(j, path);
  r.get("family", s.family);
  r.get("params", s.params);
  r.finish();
  return s;
}

nlohmann::json spec_json(const TestFunctionSpec& s) {
  return nlohmann::json{{"family", s.family}, {"params", s.params}};
}

std::vector<int> suite_criteria(const std::string& name) {
  if (name == "stationarity") return {2};
  if (name == "bracket") return {1, 5, 6, 7, 8};
  if (name == "reflection") return {7};
  if (name == "walk") return {3, 4, 9, 11, 13};
  if (name == "norms") return {10, 14};
  if (name == "she") return {12};
  if (name == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14};
  throw ConfigError("unknown suite \"" + name + "\"");
}

}  // namespace

TestFunction TestFunctionSpec::build() const {
  if (family == "bump") {
    require(params.size() == 2, "bump spec needs params [center, halfwidth]");
    require(params[1] > 0.0, "bump halfwidth must be positive");
    require(params[0] - params[1] >= 0.0,
            "bump support must stay in [0, inf)");
    return TestFunction::bump(params[0], params[1]);
  }
  if (family == "plateau") {
    require(params.size() == 4, "plateau spec needs params [a0, a1, a2, a3]");
    require(params[0] >= 0.0, "plateau support must stay in [0, inf)");
    require(params[0] < params[1] && params[1] <= params[2] &&
                params[2] < params[3],
            "plateau breakpoints must satisfy a0 < a1 <= a2 < a3");
    return TestFunction::plateau(params[0], params[1], params[2], params[3]);
  }
  throw ConfigError("unknown test function family \"" + family + "\"");
}

void check_window(double eps, int L, double support_hi, double t_scaled,
                  double margin_override) {
  const double margin = margin_override >= 0.0
                            ? margin_override
                            : 2.0 * std::sqrt(std::max(0.0, t_scaled));
  const double window = eps * L;
  if (!(window >= support_hi + margin)) {
    throw WindowViolation(
        "window discipline: eps * L = " + num_str(window) +
        " is below test-function support " + num_str(support_hi) +
        " plus safety margin " + num_str(margin) + " (eps = " + num_str(eps) +
        ", L = " + std::to_string(L) + ")");
  }
}

ExperimentPlan ExperimentPlan::from_json(const nlohmann::json& j) {
  ExperimentPlan p;
  ObjectReader r(j, "plan");
  r.get("schema_version", p.schema_version);
  require(p.schema_version == 1, "plan.schema_version: expected 1");
  r.get("experiment", p.experiment);
  r.get("seed", p.seed);
  r.get("parallelism", p.parallelism);
  r.get("out_dir", p.out_dir);
  r.get("lattice_l", p.lattice_l);
  if (const auto* c = r.child("phi")) p.phi = parse_spec(*c, "plan.phi");
  if (const auto* c = r.child("psi")) p.psi = parse_spec(*c, "plan.psi");
  if (const auto* c = r.child("norms")) {
    ObjectReader n(*c, "plan.norms");
    n.get("rho", p.rho);
    n.get("s0", p.s0);
    n.get("s1", p.s1);
    n.get("r", p.r);
    n.get("b", p.b);
    n.finish();
  }
  r.get("window_margin", p.window_margin);
  r.get("suites", p.suites);
  if (const auto* c = r.child("stationarity")) {
    ObjectReader n(*c, "plan.stationarity");
    n.get("replicas", p.stationarity.replicas);
    n.get("horizon_unscaled", p.stationarity.horizon_unscaled);
    n.get("sites", p.stationarity.sites);
    n.finish();
  }
  if (const auto* c = r.child("bracket")) {
    ObjectReader n(*c, "plan.bracket");
    n.get("eps", p.bracket.eps);
    n.get("replicas", p.bracket.replicas);
    n.get("t_scaled", p.bracket.t_scaled);
    n.get("residual_eps", p.bracket.residual_eps);
    n.get("residual_runs", p.bracket.residual_runs);
    n.finish();
  }
  if (const auto* c = r.child("walk")) {
    ObjectReader n(*c, "plan.walk");
    n.get("paths", p.walk.paths);
    n.get("big_n", p.walk.big_n);
    n.get("small_n", p.walk.small_n);
    if (const auto* f = n.child("phi")) {
      p.walk.phi = parse_spec(*f, "plan.walk.phi");
    }
    n.get("coupling_pairs", p.walk.coupling_pairs);
    n.get("coupling_length", p.walk.coupling_length);
    n.get("marginal_pairs", p.walk.marginal_pairs);
    n.get("moment_replicas", p.walk.moment_replicas);
    n.get("moment_lengths", p.walk.moment_lengths);
    n.get("invariance_samples", p.walk.invariance_samples);
    n.get("invariance_eps", p.walk.invariance_eps);
    n.get("invariance_x", p.walk.invariance_x);
    n.finish();
  }
  if (const auto* c = r.child("norm_suite")) {
    ObjectReader n(*c, "plan.norm_suite");
    n.get("functions", p.norm_suite.functions);
    n.get("grid_points", p.norm_suite.grid_points);
    n.get("spacing", p.norm_suite.spacing);
    n.get("zetas_per_function", p.norm_suite.zetas_per_function);
    n.get("zeta_span", p.norm_suite.zeta_span);
    n.get("increment_eps", p.norm_suite.increment_eps);
    n.get("increment_replicas", p.norm_suite.increment_replicas);
    n.get("increment_base_unscaled", p.norm_suite.increment_base_unscaled);
    n.get("increment_lags_unscaled", p.norm_suite.increment_lags_unscaled);
    n.finish();
  }
  if (const auto* c = r.child("she")) {
    ObjectReader n(*c, "plan.she");
    n.get("dx", p.she.dx);
    n.get("x_max", p.she.x_max);
    n.get("t", p.she.t);
    n.get("x0", p.she.x0);
    n.get("replicas", p.she.replicas);
    n.finish();
  }
  if (const auto* c = r.child("simulate")) {
    ObjectReader n(*c, "plan.simulate");
    n.get("eps", p.simulate.eps);
    n.get("L", p.simulate.L);
    n.get("horizon_scaled", p.simulate.horizon_scaled);
    n.get("replicas", p.simulate.replicas);
    n.finish();
  }
  if (const auto* c = r.child("thresholds")) {
    ObjectReader n(*c, "plan.thresholds");
    Thresholds& t = p.thresholds;
    n.get("identity_residual_rel", t.identity_residual_rel);
    n.get("stationarity_ks", t.stationarity_ks);
    n.get("corner_density_rel", t.corner_density_rel);
    n.get("transience_rel", t.transience_rel);
    n.get("bracket_rel", t.bracket_rel);
    n.get("returns_rel", t.returns_rel);
    n.get("support_rel", t.support_rel);
    n.get("error_term_slope", t.error_term_slope);
    n.get("coupling_violations", t.coupling_violations);
    n.get("coupling_marginal_rel", t.coupling_marginal_rel);
    n.get("fourier_abs", t.fourier_abs);
    n.get("invariance_ks", t.invariance_ks);
    n.get("she_ks", t.she_ks);
    n.get("moment_slope_excess", t.moment_slope_excess);
    n.get("increment_slope_warn", t.increment_slope_warn);
    n.finish();
  }
  r.finish();
  return p;
}

ExperimentPlan ExperimentPlan::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return from_json(j);
}

nlohmann::json ExperimentPlan::to_json() const {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["parallelism"] = parallelism;
  j["out_dir"] = out_dir;
  j["lattice_l"] = lattice_l;
  j["phi"] = spec_json(phi);
  j["psi"] = spec_json(psi);
  j["norms"] = {{"rho", rho}, {"s0", s0}, {"s1", s1}, {"r", r}, {"b", b}};
  j["window_margin"] = window_margin;
  j["suites"] = suites;
  j["stationarity"] = {{"replicas", stationarity.replicas},
                       {"horizon_unscaled", stationarity.horizon_unscaled},
                       {"sites", stationarity.sites}};
  j["bracket"] = {{"eps", bracket.eps},
                  {"replicas", bracket.replicas},
                  {"t_scaled", bracket.t_scaled},
                  {"residual_eps", bracket.residual_eps},
                  {"residual_runs", bracket.residual_runs}};
  j["walk"] = {{"paths", walk.paths},
               {"big_n", walk.big_n},
               {"small_n", walk.small_n},
               {"phi", spec_json(walk.phi)},
               {"coupling_pairs", walk.coupling_pairs},
               {"coupling_length", walk.coupling_length},
               {"marginal_pairs", walk.marginal_pairs},
               {"moment_replicas", walk.moment_replicas},
               {"moment_lengths", walk.moment_lengths},
               {"invariance_samples", walk.invariance_samples},
               {"invariance_eps", walk.invariance_eps},
               {"invariance_x", walk.invariance_x}};
  j["norm_suite"] = {
      {"functions", norm_suite.functions},
      {"grid_points", norm_suite.grid_points},
      {"spacing", norm_suite.spacing},
      {"zetas_per_function", norm_suite.zetas_per_function},
      {"zeta_span", norm_suite.zeta_span},
      {"increment_eps", norm_suite.increment_eps},
      {"increment_replicas", norm_suite.increment_replicas},
      {"increment_base_unscaled", norm_suite.increment_base_unscaled},
      {"increment_lags_unscaled", norm_suite.increment_lags_unscaled}};
  j["she"] = {{"dx", she.dx},
              {"x_max", she.x_max},
              {"t", she.t},
              {"x0", she.x0},
              {"replicas", she.replicas}};
  j["simulate"] = {{"eps", simulate.eps},
                   {"L", simulate.L},
                   {"horizon_scaled", simulate.horizon_scaled},
                   {"replicas", simulate.replicas}};
  j["thresholds"] = {
      {"identity_residual_rel", thresholds.identity_residual_rel},
      {"stationarity_ks", thresholds.stationarity_ks},
      {"corner_density_rel", thresholds.corner_density_rel},
      {"transience_rel", thresholds.transience_rel},
      {"bracket_rel", thresholds.bracket_rel},
      {"returns_rel", thresholds.returns_rel},
      {"support_rel", thresholds.support_rel},
      {"error_term_slope", thresholds.error_term_slope},
      {"coupling_violations", thresholds.coupling_violations},
      {"coupling_marginal_rel", thresholds.coupling_marginal_rel},
      {"fourier_abs", thresholds.fourier_abs},
      {"invariance_ks", thresholds.invariance_ks},
      {"she_ks", thresholds.she_ks},
      {"moment_slope_excess", thresholds.moment_slope_excess},
      {"increment_slope_warn", thresholds.increment_slope_warn}};
  return j;
}

std::string ExperimentPlan::hash() const {
  const std::string dump = to_json().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

void ExperimentPlan::validate() const {
  require(lattice_l >= 1, "lattice_l must be at least 1");
  require(!out_dir.empty(), "out_dir must not be empty");
  const TestFunction phi_fn = phi.build();
  psi.build();
  walk.phi.build();
  require(rho >= 0.0, "norms.rho must be nonnegative");
  require(s0 > 0.5, "norms.s0 must exceed 1/2");
  require(s1 > 0.0 && s1 < 0.5, "norms.s1 must lie in (0, 1/2)");
  require(r >= 1.0, "norms.r must be at least 1");
  require(b > 0.0 && b < 1.0, "norms.b must lie in (0, 1)");

  require(stationarity.replicas >= 2, "stationarity.replicas must be >= 2");
  require(stationarity.horizon_unscaled > 0.0,
          "stationarity.horizon_unscaled must be positive");
  require(!stationarity.sites.empty(), "stationarity.sites must be nonempty");
  for (int site : stationarity.sites) {
    require(site >= 1 && site <= lattice_l,
            "stationarity sites must be active lattice sites");
  }

  require(!bracket.eps.empty(), "bracket.eps must be nonempty");
  for (std::size_t i = 0; i < bracket.eps.size(); ++i) {
    require(bracket.eps[i] > 0.0 && bracket.eps[i] <= 1.0,
            "bracket.eps entries must lie in (0, 1]");
    if (i > 0) {
      require(bracket.eps[i] < bracket.eps[i - 1],
              "bracket.eps must be strictly decreasing");
    }
  }
  require(bracket.replicas >= 2, "bracket.replicas must be >= 2");
  require(bracket.t_scaled > 0.0, "bracket.t_scaled must be positive");
  require(!bracket.residual_eps.empty(),
          "bracket.residual_eps must be nonempty");
  for (double e : bracket.residual_eps) {
    require(e > 0.0 && e <= 1.0,
            "bracket.residual_eps entries must lie in (0, 1]");
  }
  require(bracket.residual_runs >= 2, "bracket.residual_runs must be >= 2");

  require(walk.paths >= 2, "walk.paths must be >= 2");
  require(walk.small_n >= 2, "walk.small_n must be >= 2");
  require(walk.big_n > walk.small_n, "walk.big_n must exceed walk.small_n");
  require(walk.coupling_pairs >= 1, "walk.coupling_pairs must be >= 1");
  require(walk.coupling_length >= 2 && walk.coupling_length % 2 == 0,
          "walk.coupling_length must be even and >= 2");
  require(walk.marginal_pairs >= 1, "walk.marginal_pairs must be >= 1");
  require(walk.moment_replicas >= 2, "walk.moment_replicas must be >= 2");
  require(walk.moment_lengths.size() >= 2,
          "walk.moment_lengths needs at least two entries");
  for (std::size_t i = 0; i < walk.moment_lengths.size(); ++i) {
    require(walk.moment_lengths[i] >= 2,
            "walk.moment_lengths entries must be >= 2");
    if (i > 0) {
      require(walk.moment_lengths[i] > walk.moment_lengths[i - 1],
              "walk.moment_lengths must be strictly increasing");
    }
  }
  require(walk.invariance_samples >= 2, "walk.invariance_samples must be >= 2");
  require(walk.invariance_eps > 0.0 && walk.invariance_eps < 1.0,
          "walk.invariance_eps must lie in (0, 1)");
  require(walk.invariance_x > 0.0, "walk.invariance_x must be positive");
  require(std::round(walk.invariance_x / walk.invariance_eps) >= 1.0,
          "walk.invariance_x / walk.invariance_eps must round to >= 1");

  require(norm_suite.functions >= 1, "norm_suite.functions must be >= 1");
  require(norm_suite.grid_points >= 3, "norm_suite.grid_points must be >= 3");
  require(norm_suite.spacing > 0.0, "norm_suite.spacing must be positive");
  require(norm_suite.zetas_per_function >= 1,
          "norm_suite.zetas_per_function must be >= 1");
  require(norm_suite.zeta_span > 0.0, "norm_suite.zeta_span must be positive");
  require(norm_suite.increment_eps > 0.0 && norm_suite.increment_eps <= 1.0,
          "norm_suite.increment_eps must lie in (0, 1]");
  require(norm_suite.increment_replicas >= 2,
          "norm_suite.increment_replicas must be >= 2");
  require(norm_suite.increment_base_unscaled > 0.0,
          "norm_suite.increment_base_unscaled must be positive");
  require(!norm_suite.increment_lags_unscaled.empty(),
          "norm_suite.increment_lags_unscaled must be nonempty");
  for (std::size_t i = 0; i < norm_suite.increment_lags_unscaled.size(); ++i) {
    require(norm_suite.increment_lags_unscaled[i] > 0.0,
            "increment lags must be positive");
    if (i > 0) {
      require(norm_suite.increment_lags_unscaled[i] >
                  norm_suite.increment_lags_unscaled[i - 1],
              "increment lags must be strictly increasing");
    }
  }

  require(she.dx > 0.0, "she.dx must be positive");
  require(she.x_max >= 4.0 * she.dx, "she.x_max must cover several cells");
  require(she.t > 0.0, "she.t must be positive");
  require(she.x0 > 0.0 && she.x0 < she.x_max,
          "she.x0 must lie inside (0, x_max)");
  require(she.replicas >= 2, "she.replicas must be >= 2");

  require(simulate.eps > 0.0 && simulate.eps <= 1.0,
          "simulate.eps must lie in (0, 1]");
  require(simulate.L >= 1, "simulate.L must be >= 1");
  require(simulate.horizon_scaled > 0.0,
          "simulate.horizon_scaled must be positive");
  require(simulate.replicas >= 1, "simulate.replicas must be >= 1");

  for (const std::string& s : suites) suite_criteria(s);

  const double hi = phi_fn.support_hi();
  for (double e : bracket.eps) {
    check_window(e, lattice_l, hi, bracket.t_scaled, window_margin);
  }
  for (double e : bracket.residual_eps) {
    check_window(e, lattice_l, hi, bracket.t_scaled, window_margin);
  }
  {
    const double e = norm_suite.increment_eps;
    const double t_scaled = (norm_suite.increment_base_unscaled +
                             norm_suite.increment_lags_unscaled.back()) *
                            e * e;
    check_window(e, lattice_l, hi, t_scaled, window_margin);
  }
  check_window(simulate.eps, simulate.L, hi, simulate.horizon_scaled,
               window_margin);
}

namespace {

struct WalkPathStats {
  double corner = 0.0;
  double occ_big = 0.0;
  double occ_small = 0.0;
};

struct BracketFamily {
  std::vector<double> eps;
  std::vector<double> mean_gap;
  std::vector<double> mean_a2;
  std::vector<double> mean_abs_r;
  double w_zscore_max = 0.0;
  double worst_support_rel = 0.0;
  double phi_l2 = 0.0;
  std::vector<ObservableRow> rows;
};

/// Lazily shared ensembles so criteria drawn from the same runs never
/// resimulate (and always see identical replicas regardless of which
/// criterion subset was requested).
struct RunnerContext {
  const ExperimentPlan& plan;
  std::optional<std::vector<WalkPathStats>> walk_stats;
  std::optional<BracketFamily> bracket;
  std::vector<StatTableRow> stat_rows;

  explicit RunnerContext(const ExperimentPlan& p) : plan(p) {}

  const std::vector<WalkPathStats>& get_walk_stats();
  const BracketFamily& get_bracket();
};

const std::vector<WalkPathStats>& RunnerContext::get_walk_stats() {
  if (walk_stats) return *walk_stats;
  const TestFunction phi = plan.walk.phi.build();
  const WalkParams& wp = plan.walk;
  walk_stats = parallel_map<WalkPathStats>(
      wp.paths, plan.parallelism, [&](int ri) {
        RngStream rng(plan.seed, replica_stream(3, 0, ri));
        const std::vector<std::int32_t> path =
            sample_walk_path(wp.big_n + 1, rng);
        WalkPathStats st;
        st.corner = corner_density_statistic(path, phi, wp.big_n);
        st.occ_big = occupation_statistic(path, 1, phi, wp.big_n);
        st.occ_small = occupation_statistic(path, 1, phi, wp.small_n);
        return st;
      });
  return *walk_stats;
}

const BracketFamily& RunnerContext::get_bracket() {
  if (bracket) return *bracket;
  const TestFunction phi = plan.phi.build();
  const TestFunction psi = plan.psi.build();
  const BracketParams& bp = plan.bracket;
  BracketFamily fam;
  fam.phi_l2 = phi.l2sq();
  struct Rep {
    ObservableRow row;
    double sup_rel = 0.0;
  };
  for (std::size_t ei = 0; ei < bp.eps.size(); ++ei) {
    const double eps = bp.eps[ei];
    const double horizon_u = bp.t_scaled / (eps * eps);
    auto reps = parallel_map<Rep>(
        bp.replicas, plan.parallelism, [&](int ri) {
          RngStream rng(plan.seed, replica_stream(5, static_cast<unsigned>(ei), ri));
          InterfaceState s = stationary_initial_state(plan.lattice_l, rng);
          EventHistory hist;
          ScaledObservables obs(phi, eps, plan.lattice_l);
          run_until(s, 0.0, horizon_u, rng, obs, &hist);
          const SupportIdentity si = support_identity(hist, psi, eps);
          Rep rep;
          rep.sup_rel = (si.lhs == si.rhs)
                            ? 0.0
                            : std::abs(si.lhs - si.rhs) /
                                  std::max(std::abs(si.rhs), 1e-300);
          rep.row = ObservableRow{
              eps,
              bp.t_scaled,
              ri,
              obs.noise_value(),
              obs.bracket_a1(),
              obs.bracket_a2(),
              obs.eta_integral(),
              std::abs(obs.decomposition_residual()) /
                  std::max(obs.decomposition_scale(), 1e-300),
              obs.error_term()};
          return rep;
        });
    KahanSum gap, a2, abs_r;
    std::vector<double> ws(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const ObservableRow& row = reps[i].row;
      gap.add(std::abs(row.a1 - row.a2 - fam.phi_l2));
      a2.add(row.a2);
      abs_r.add(std::abs(row.r_eps));
      ws[i] = row.w;
      fam.worst_support_rel = std::max(fam.worst_support_rel, reps[i].sup_rel);
      fam.rows.push_back(row);
    }
    const double n = static_cast<double>(reps.size());
    fam.eps.push_back(eps);
    fam.mean_gap.push_back(gap.value() / n);
    fam.mean_a2.push_back(a2.value() / n);
    fam.mean_abs_r.push_back(abs_r.value() / n);
    const MeanStderr wms = mean_stderr(ws);
    if (wms.stderr_of_mean > 0.0) {
      fam.w_zscore_max = std::max(
          fam.w_zscore_max, std::abs(wms.mean) / wms.stderr_of_mean);
    }
  }
  bracket = std::move(fam);
  return *bracket;
}

CriterionResult criterion_residual(const ExperimentPlan& plan) {
  const TestFunction phi = plan.phi.build();
  const BracketParams& bp = plan.bracket;
  const int n_eps = static_cast<int>(bp.residual_eps.size());
  const int per_eps = std::max(1, bp.residual_runs / std::max(1, n_eps));
  CriterionResult c;
  c.id = 1;
  c.name = "pathwise-decomposition-residual";
  c.threshold = plan.thresholds.identity_residual_rel;
  double worst = 0.0;
  double worst_jump_gap = -std::numeric_limits<double>::infinity();
  for (int ei = 0; ei < n_eps; ++ei) {
    const double eps = bp.residual_eps[ei];
    auto outs = parallel_map<std::array<double, 2>>(
        per_eps, plan.parallelism, [&](int ri) {
          RngStream rng(plan.seed, replica_stream(1, static_cast<unsigned>(ei), ri));
          InterfaceState s = stationary_initial_state(plan.lattice_l, rng);
          ScaledObservables obs(phi, eps, plan.lattice_l);
          run_until(s, 0.0, bp.t_scaled / (eps * eps), rng, obs);
          const double rel = std::abs(obs.decomposition_residual()) /
                             std::max(obs.decomposition_scale(), 1e-300);
          return std::array<double, 2>{rel,
                                       obs.max_jump_abs() - obs.jump_bound()};
        });
    double eps_worst = 0.0;
    for (const auto& o : outs) {
      eps_worst = std::max(eps_worst, o[0]);
      worst_jump_gap = std::max(worst_jump_gap, o[1]);
    }
    c.details.emplace_back("max_rel_residual_eps_" + num_str(eps), eps_worst);
    worst = std::max(worst, eps_worst);
  }
  c.details.emplace_back("runs_per_eps", static_cast<double>(per_eps));
  c.details.emplace_back("max_jump_minus_bound", worst_jump_gap);
  c.statistic = worst;
  c.pass = worst <= c.threshold && worst_jump_gap <= 1e-12;
  return c;
}

CriterionResult criterion_stationarity(const ExperimentPlan& plan) {
  const StationarityParams& sp = plan.stationarity;
  CriterionResult c;
  c.id = 2;
  c.name = "ensemble-marginal-stationarity";
  c.threshold = plan.thresholds.stationarity_ks;
  auto rows = parallel_map<std::vector<double>>(
      sp.replicas, plan.parallelism, [&](int ri) {
        RngStream rng(plan.seed, replica_stream(2, 0, ri));
        InterfaceState s = stationary_initial_state(plan.lattice_l, rng);
        NullObserver obs;
        run_until(s, 0.0, sp.horizon_unscaled, rng, obs);
        std::vector<double> vals;
        vals.reserve(sp.sites.size());
        for (int site : sp.sites) {
          vals.push_back(static_cast<double>(s.h[site]));
        }
        return vals;
      });
  double worst = 0.0;
  for (std::size_t si = 0; si < sp.sites.size(); ++si) {
    std::vector<double> samples(rows.size());
    for (std::size_t rI = 0; rI < rows.size(); ++rI) samples[rI] = rows[rI][si];
    const ExactPmf pmf = exact_pmf(sp.sites[si]);
    const double d = ks_distance_pmf(samples, pmf.p);
    const double sn = std::sqrt(static_cast<double>(samples.size()));
    const std::string tag = std::to_string(sp.sites[si]);
    c.details.emplace_back("ks_d_site_" + tag, d);
    c.details.emplace_back("ks_p_site_" + tag,
                           kolmogorov_q((sn + 0.12 + 0.11 / sn) * d));
    worst = std::max(worst, d);
  }
  c.statistic = worst;
  c.pass = worst <= c.threshold;
  return c;
}

CriterionResult criterion_corner_density(RunnerContext& ctx) {
  const ExperimentPlan& plan = ctx.plan;
  const auto& stats = ctx.get_walk_stats();
  const TestFunction phi = plan.walk.phi.build();
  const double integral = phi.integral();
  std::vector<double> xs(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) xs[i] = stats[i].corner;
  const MeanStderr ms = mean_stderr(xs);
  ctx.stat_rows.push_back({"corner_density",
                           static_cast<double>(plan.walk.big_n),
                           static_cast<int>(xs.size()), ms.mean,
                           ms.stderr_of_mean});
  CriterionResult c;
  c.id = 3;
  c.name = "corner-density-half";
  c.threshold = plan.thresholds.corner_density_rel;
  c.statistic = std::abs(ms.mean - 0.5 * integral) / integral;
  c.details.emplace_back("mean", ms.mean);
  c.details.emplace_back("stderr", ms.stderr_of_mean);
  c.details.emplace_back("target", 0.5 * integral);
  c.pass = c.statistic <= c.threshold;
  return c;
}

CriterionResult criterion_transience(RunnerContext& ctx) {
  const ExperimentPlan& plan = ctx.plan;
  const auto& stats = ctx.get_walk_stats();
  const TestFunction phi = plan.walk.phi.build();
  const double integral = phi.integral();
  std::vector<double> big(stats.size());
  std::vector<double> small(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    big[i] = stats[i].occ_big;
    small[i] = stats[i].occ_small;
  }
  const MeanStderr mb = mean_stderr(big);
  const MeanStderr msm = mean_stderr(small);
  ctx.stat_rows.push_back({"occupation_level1",
                           static_cast<double>(plan.walk.big_n),
                           static_cast<int>(big.size()), mb.mean,
                           mb.stderr_of_mean});
  ctx.stat_rows.push_back({"occupation_level1",
                           static_cast<double>(plan.walk.small_n),
                           static_cast<int>(small.size()), msm.mean,
                           msm.stderr_of_mean});
  CriterionResult c;
  c.id = 4;
  c.name = "level-one-occupation-decay";
  c.threshold = plan.thresholds.transience_rel;
  c.statistic = mb.mean / integral;
  c.details.emplace_back("mean_large_scale", mb.mean);
  c.details.emplace_back("mean_small_scale", msm.mean);
  c.pass = c.statistic <= c.threshold && mb.mean < msm.mean;
  return c;
}

CriterionResult criterion_bracket_gap(RunnerContext& ctx) {
  const BracketFamily& fam = ctx.get_bracket();
  CriterionResult c;
  c.id = 5;
  c.name = "bracket-compensation";
  c.threshold = ctx.plan.thresholds.bracket_rel;
  bool monotone = true;
  for (std::size_t i = 0; i < fam.eps.size(); ++i) {
    c.details.emplace_back("mean_gap_eps_" + num_str(fam.eps[i]),
                           fam.mean_gap[i]);
    if (i > 0 && fam.mean_gap[i] > fam.mean_gap[i - 1]) monotone = false;
  }
  c.details.emplace_back("phi_l2sq", fam.phi_l2);
  c.details.emplace_back("noise_mean_zscore_max", fam.w_zscore_max);
  c.statistic = fam.mean_gap.back() / fam.phi_l2;
  c.pass = monotone && c.statistic <= c.threshold;
  if (!monotone) c.note = "mean gap is not decreasing across eps";
  return c;
}

CriterionResult criterion_blocked_bracket(RunnerContext& ctx) {
  const BracketFamily& fam = ctx.get_bracket();
  CriterionResult c;
  c.id = 6;
  c.name = "blocked-corner-bracket-decay";
  c.threshold = ctx.plan.thresholds.returns_rel;
  bool monotone = true;
  for (std::size_t i = 0; i < fam.eps.size(); ++i) {
    c.details.emplace_back("mean_a2_eps_" + num_str(fam.eps[i]),
                           fam.mean_a2[i]);
    if (i > 0 && fam.mean_a2[i] > fam.mean_a2[i - 1]) monotone = false;
  }
  c.statistic = fam.mean_a2.back() / fam.phi_l2;
  c.pass = monotone && c.statistic <= c.threshold;
  if (!monotone) c.note = "mean blocked bracket is not decreasing across eps";
  return c;
}

CriterionResult criterion_support_identity(RunnerContext& ctx) {
  const BracketFamily& fam = ctx.get_bracket();
  CriterionResult c;
  c.id = 7;
  c.name = "support-identity-transfer";
  c.threshold = ctx.plan.thresholds.support_rel;
  c.statistic = fam.worst_support_rel;
  c.details.emplace_back(
      "runs", static_cast<double>(fam.eps.size()) *
                  static_cast<double>(ctx.plan.bracket.replicas));
  c.pass = c.statistic <= c.threshold;
  return c;
}

CriterionResult criterion_error_term(RunnerContext& ctx) {
  const BracketFamily& fam = ctx.get_bracket();
  CriterionResult c;
  c.id = 8;
  c.name = "remainder-term-decay";
  c.threshold = ctx.plan.thresholds.error_term_slope;
  c.cmp = ">=";
  bool monotone = true;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < fam.eps.size(); ++i) {
    c.details.emplace_back("mean_abs_r_eps_" + num_str(fam.eps[i]),
                           fam.mean_abs_r[i]);
    pts.emplace_back(fam.eps[i], fam.mean_abs_r[i]);
    if (i > 0 && fam.mean_abs_r[i] > fam.mean_abs_r[i - 1]) monotone = false;
  }
  const SlopeFit fit = loglog_slope(pts);
  c.statistic = fit.slope;
  c.details.emplace_back("slope_stderr", fit.stderr_of_slope);
  c.pass = monotone && fit.slope >= c.threshold;
  if (!monotone) c.note = "mean remainder is not decreasing across eps";
  return c;
}

CriterionResult criterion_domination(const ExperimentPlan& plan) {
  const WalkParams& wp = plan.walk;
  CriterionResult c;
  c.id = 9;
  c.name = "increment-domination";
  c.threshold = plan.thresholds.coupling_violations;
  auto viols = parallel_map<double>(
      wp.coupling_pairs, plan.parallelism, [&](int ri) {
        RngStream rng(plan.seed, replica_stream(9, 0, ri));
        const CoupledPair pr = sample_coupled_pair(wp.coupling_length, rng);
        return static_cast<double>(count_domination_violations(pr));
      });
  KahanSum total;
  for (double v : viols) total.add(v);
  long long cx = 0;
  long long cs = 0;
  for (int i = 0; i < wp.marginal_pairs; ++i) {
    RngStream rng(plan.seed, replica_stream(9, 1, static_cast<std::uint64_t>(i)));
    const CoupledPair pr = sample_coupled_pair(2, rng);
    if (pr.x[2] == 2) ++cx;
    if (pr.s[2] == 0) ++cs;
  }
  const double px = static_cast<double>(cx) / wp.marginal_pairs;
  const double ps = static_cast<double>(cs) / wp.marginal_pairs;
  const double ex = std::abs(px - 0.75);
  const double es = std::abs(ps - 0.5);
  c.statistic = total.value();
  c.details.emplace_back("pairs", static_cast<double>(wp.coupling_pairs));
  c.details.emplace_back("pair_length",
                         static_cast<double>(wp.coupling_length));
  c.details.emplace_back("marginal_x_abs_err", ex);
  c.details.emplace_back("marginal_s_abs_err", es);
  const double marg = plan.thresholds.coupling_marginal_rel;
  c.pass = total.value() <= c.threshold && ex <= marg && es <= marg;
  if (ex > marg || es > marg) c.note = "length-2 marginals off the kernel";
  return c;
}

CriterionResult criterion_fourier(const ExperimentPlan& plan) {
  const NormSuiteParams& np = plan.norm_suite;
  CriterionResult c;
  c.id = 10;
  c.name = "lattice-fourier-consistency";
  c.threshold = plan.thresholds.fourier_abs;
  auto worsts = parallel_map<double>(
      np.functions, plan.parallelism, [&](int fi) {
        RngStream rng(plan.seed, replica_stream(10, 0, fi));
        GridFunction g;
        g.spacing = np.spacing;
        g.values.assign(np.grid_points, 0.0);
        for (int i = 1; i + 1 < np.grid_points; ++i) {
          g.values[i] = 2.0 * rng.uniform01() - 1.0;
        }
        double w = 0.0;
        for (int k = 0; k < np.zetas_per_function; ++k) {
          const double zeta = (2.0 * rng.uniform01() - 1.0) * np.zeta_span;
          const std::complex<double> lat = fourier_hat(g, zeta);
          const std::complex<double> quad = fourier_hat_quadrature(g, zeta);
          w = std::max(w, std::abs(lat - quad));
        }
        return w;
      });
  double worst = 0.0;
  for (double w : worsts) worst = std::max(worst, w);
  double cmin = std::numeric_limits<double>::infinity();
  double cmax = -cmin;
  const int scan = 16001;
  for (int i = 0; i < scan; ++i) {
    const double zeta =
        -np.zeta_span + 2.0 * np.zeta_span * i / (scan - 1);
    const double cf = fourier_cell_factor(zeta, np.spacing);
    cmin = std::min(cmin, cf);
    cmax = std::max(cmax, cf);
  }
  c.statistic = worst;
  c.details.emplace_back("cell_factor_min", cmin);
  c.details.emplace_back("cell_factor_max", cmax);
  c.pass = worst <= c.threshold && cmin >= -1e-15 &&
           cmax <= np.spacing * (1.0 + 1e-12);
  return c;
}

double exact_ks_floor(int n, double x) {
  const ExactPmf pmf = exact_pmf(n);
  const double se = std::sqrt(x / n);
  double cum = 0.0;
  double d = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double p = pmf.p[k];
    if (p == 0.0) continue;
    const double f = bessel3_marginal_cdf(x, se * k);
    d = std::max(d, std::abs(f - cum));
    cum += p;
    d = std::max(d, std::abs(f - cum));
  }
  return d;
}

CriterionResult criterion_invariance(const ExperimentPlan& plan) {
  const WalkParams& wp = plan.walk;
  const int n =
      static_cast<int>(std::round(wp.invariance_x / wp.invariance_eps));
  CriterionResult c;
  c.id = 11;
  c.name = "rescaled-endpoint-law";
  c.threshold = plan.thresholds.invariance_ks;
  auto samples = parallel_map<double>(
      wp.invariance_samples, plan.parallelism, [&](int ri) {
        RngStream rng(plan.seed, replica_stream(11, 0, ri));
        const std::vector<std::int32_t> path = sample_walk_path(n, rng);
        return std::sqrt(wp.invariance_eps) * path[n];
      });
  const KsResult kr = ks_test(samples, [&](double v) {
    return bessel3_marginal_cdf(wp.invariance_x, v);
  });
  c.statistic = kr.d;
  c.details.emplace_back("samples", static_cast<double>(kr.n));
  c.details.emplace_back("steps", static_cast<double>(n));
  double floor_here = 0.0;
  for (int factor : {1, 4, 16}) {
    const long long m = static_cast<long long>(n) * factor;
    if (m > 20000) break;
    const double fl = exact_ks_floor(static_cast<int>(m), wp.invariance_x);
    c.details.emplace_back("exact_law_gap_n" + std::to_string(m), fl);
    if (factor == 1) floor_here = fl;
  }
  {
    const ExactPmf pmf = exact_pmf(n);
    double atom = 0.0;
    for (double p : pmf.p) atom = std::max(atom, p);
    c.details.emplace_back("largest_atom", atom);
  }
  c.pass = kr.d <= c.threshold;
  if (!c.pass && floor_here > c.threshold) {
    c.note =
        "the exact endpoint law at this step count sits at Kolmogorov "
        "distance " +
        num_str(floor_here) +
        " from the continuum marginal (dominated by the largest atom), so "
        "the gate is below the distance attainable by any sample size; the "
        "empirical statistic is reported honestly and the finer-step gaps "
        "recorded with this criterion document the convergence trend";
  }
  return c;
}

CriterionResult criterion_she_marginal(const ExperimentPlan& plan) {
  const SheParams& sp = plan.she;
  SheGrid grid{sp.dx, sp.dx * sp.dx / 4.0, sp.x_max};
  grid.validate();
  CriterionResult c;
  c.id = 12;
  c.name = "reflected-heat-marginal";
  c.threshold = plan.thresholds.she_ks;
  struct Out {
    double v = 0.0;
    double defect = 0.0;
  };
  auto outs = parallel_map<Out>(
      sp.replicas, plan.parallelism, [&](int ri) {
        RngStream rng(plan.seed, replica_stream(12, 0, ri));
        std::vector<double> u0 = sample_bessel3_path(grid, rng);
        const SheRunResult res = she_run(std::move(u0), sp.t, grid, rng);
        return Out{field_value(res.state.u, grid, sp.x0),
                   res.max_support_defect};
      });
  std::vector<double> samples(outs.size());
  double defect = 0.0;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    samples[i] = outs[i].v;
    defect = std::max(defect, outs[i].defect);
  }
  const KsResult kr = ks_test(samples, [&](double v) {
    return bessel3_marginal_cdf(sp.x0, v);
  });
  c.statistic = kr.d;
  c.details.emplace_back("ks_p", kr.p_value);
  c.details.emplace_back("max_support_defect", defect);
  c.pass = kr.d <= c.threshold;
  return c;
}

CriterionResult criterion_moment_growth(const ExperimentPlan& plan) {
  const WalkParams& wp = plan.walk;
  CriterionResult c;
  c.id = 13;
  c.name = "moment-growth-order";
  c.threshold = plan.thresholds.moment_slope_excess;
  double worst = -std::numeric_limits<double>::infinity();
  for (int order : {1, 2}) {
    const MomentGrowthResult res = moment_growth_check(
        wp.moment_lengths, order, wp.moment_replicas, plan.seed,
        replica_stream(13, static_cast<unsigned>(order), 0));
    const double excess = res.fit.slope - order;
    c.details.emplace_back("slope_order_" + std::to_string(order),
                           res.fit.slope);
    c.details.emplace_back("slope_stderr_order_" + std::to_string(order),
                           res.fit.stderr_of_slope);
    worst = std::max(worst, excess);
  }
  c.statistic = worst;
  c.pass = worst <= c.threshold;
  return c;
}

CriterionResult criterion_increment_scaling(const ExperimentPlan& plan) {
  const NormSuiteParams& np = plan.norm_suite;
  const double eps = np.increment_eps;
  CriterionResult c;
  c.id = 14;
  c.name = "increment-norm-scaling";
  c.threshold = plan.thresholds.increment_slope_warn;
  c.cmp = ">=";
  c.gating = false;
  std::vector<double> times{np.increment_base_unscaled};
  for (double lag : np.increment_lags_unscaled) {
    times.push_back(np.increment_base_unscaled + lag);
  }
  const double horizon = times.back() + 1.0;
  auto fields = parallel_map<std::vector<GridFunction>>(
      np.increment_replicas, plan.parallelism, [&](int ri) {
        RngStream rng(plan.seed, replica_stream(14, 0, ri));
        InterfaceState s = stationary_initial_state(plan.lattice_l, rng);
        SnapshotObserver snap(times);
        run_until(s, 0.0, horizon, rng, snap);
        if (snap.snapshots.size() != times.size()) {
          throw std::runtime_error("snapshot capture incomplete");
        }
        std::vector<GridFunction> out;
        out.reserve(snap.snapshots.size());
        for (const auto& h : snap.snapshots) {
          out.push_back(weighted_field(InterfaceState{h}, eps, plan.rho));
        }
        return out;
      });
  std::vector<double> lags_scaled;
  for (double lag : np.increment_lags_unscaled) {
    lags_scaled.push_back(lag * eps * eps);
  }
  const IncrementScalingResult res =
      increment_scaling(fields, lags_scaled, plan.s0, 0.0);
  c.statistic = res.fit.slope;
  c.details.emplace_back("slope_stderr", res.fit.stderr_of_slope);
  for (const auto& [lag, norm] : res.points) {
    c.details.emplace_back("mean_norm_lag_" + num_str(lag), norm);
  }
  c.pass = res.fit.slope >= c.threshold;
  if (!c.pass) {
    c.note = "diagnostic only: increment regularity slope below the warning "
             "level, inspect the per-lag means";
  }
  return c;
}

CriterionResult run_one(RunnerContext& ctx, int id) {
  switch (id) {
    case 1: return criterion_residual(ctx.plan);
    case 2: return criterion_stationarity(ctx.plan);
    case 3: return criterion_corner_density(ctx);
    case 4: return criterion_transience(ctx);
    case 5: return criterion_bracket_gap(ctx);
    case 6: return criterion_blocked_bracket(ctx);
    case 7: return criterion_support_identity(ctx);
    case 8: return criterion_error_term(ctx);
    case 9: return criterion_domination(ctx.plan);
    case 10: return criterion_fourier(ctx.plan);
    case 11: return criterion_invariance(ctx.plan);
    case 12: return criterion_she_marginal(ctx.plan);
    case 13: return criterion_moment_growth(ctx.plan);
    case 14: return criterion_increment_scaling(ctx.plan);
    default:
      throw ConfigError("unknown criterion id " + std::to_string(id));
  }
}

}  // namespace

StatReport run_criteria(const ExperimentPlan& plan,
                        std::span<const int> criterion_ids) {
  plan.validate();
  std::vector<int> ids(criterion_ids.begin(), criterion_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (int id : ids) {
    require(id >= 1 && id <= 14,
            "criterion id out of range: " + std::to_string(id));
  }
  RunnerContext ctx(plan);
  StatReport rep;
  rep.experiment = plan.experiment;
  rep.plan_hash = plan.hash();
  rep.seed = plan.seed;
  for (int id : ids) rep.criteria.push_back(run_one(ctx, id));
  if (ctx.bracket) rep.observable_rows = std::move(ctx.bracket->rows);
  rep.stat_rows = std::move(ctx.stat_rows);
  return rep;
}

StatReport run_suites(const ExperimentPlan& plan,
                      std::span<const std::string> suite_names) {
  std::vector<int> ids;
  for (const std::string& name : suite_names) {
    const std::vector<int> part = suite_criteria(name);
    ids.insert(ids.end(), part.begin(), part.end());
  }
  StatReport rep = run_criteria(plan, ids);
  rep.suites.assign(suite_names.begin(), suite_names.end());
  return rep;
}

bool StatReport::all_pass() const {
  for (const CriterionResult& c : criteria) {
    if (c.gating && !c.pass) return false;
  }
  return true;
}

nlohmann::json StatReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["experiment"] = experiment;
  j["plan_hash"] = plan_hash;
  j["seed"] = seed;
  j["suites"] = suites;
  nlohmann::json arr = nlohmann::json::array();
  for (const CriterionResult& c : criteria) {
    nlohmann::json d = nlohmann::json::object();
    for (const auto& [k, v] : c.details) d[k] = v;
    arr.push_back({{"id", c.id},
                   {"name", c.name},
                   {"gating", c.gating},
                   {"pass", c.pass},
                   {"statistic", c.statistic},
                   {"threshold", c.threshold},
                   {"comparator", c.cmp},
                   {"details", d},
                   {"note", c.note}});
  }
  j["criteria"] = arr;
  j["observable_row_count"] = observable_rows.size();
  j["statistic_row_count"] = stat_rows.size();
  j["all_gating_pass"] = all_pass();
  return j;
}

void write_report_files(const StatReport& report, const ExperimentPlan& plan) {
  namespace fs = std::filesystem;
  fs::create_directories(plan.out_dir);
  const fs::path base(plan.out_dir);
  {
    std::ofstream out(base / "report.json");
    out << report.to_json().dump(2) << '\n';
  }
  {
    std::ofstream out(base / "criteria.csv");
    out << "id,name,gating,pass,statistic,threshold,comparator\n";
    for (const CriterionResult& c : report.criteria) {
      out << c.id << ',' << c.name << ',' << (c.gating ? 1 : 0) << ','
          << (c.pass ? 1 : 0) << ',' << num_str(c.statistic) << ','
          << num_str(c.threshold) << ',' << c.cmp << '\n';
    }
  }
  if (!report.observable_rows.empty()) {
    std::ofstream out(base / "observables.csv");
    out << "eps,t,replica,W,A1,A2,eta_mass,residual,R_eps\n";
    for (const ObservableRow& r : report.observable_rows) {
      out << num_str(r.eps) << ',' << num_str(r.t) << ',' << r.replica << ','
          << num_str(r.w) << ',' << num_str(r.a1) << ',' << num_str(r.a2)
          << ',' << num_str(r.eta_mass) << ',' << num_str(r.residual) << ','
          << num_str(r.r_eps) << '\n';
    }
  }
  if (!report.stat_rows.empty()) {
    std::ofstream out(base / "statistics.csv");
    out << "statistic,scale,replicas,mean,stderr\n";
    for (const StatTableRow& r : report.stat_rows) {
      out << r.statistic << ',' << num_str(r.scale) << ',' << r.replicas
          << ',' << num_str(r.mean) << ',' << num_str(r.stderr_of_mean)
          << '\n';
    }
  }
}

std::string format_criterion_line(const CriterionResult& c) {
  const char* tag = c.pass ? "[PASS]" : (c.gating ? "[FAIL]" : "[WARN]");
  char buf[192];
  std::snprintf(buf, sizeof buf,
                "%s criterion %2d  %-34s statistic=%-12.6g (%s %g)", tag, c.id,
                c.name.c_str(), c.statistic, c.cmp.c_str(), c.threshold);
  std::string line(buf);
  if (!c.note.empty()) line += "\n       note: " + c.note;
  return line;
}

}  // namespace wallflip
