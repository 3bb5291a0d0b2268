#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wallflip/conditioned_walk.hpp"
#include "wallflip/fourier.hpp"
#include "wallflip/harness.hpp"
#include "wallflip/interface_dynamics.hpp"
#include "wallflip/observables.hpp"
#include "wallflip/she.hpp"

namespace fs = std::filesystem;
using namespace wallflip;

namespace {

int cmd_simulate(const ExperimentPlan& plan) {
  fs::create_directories(plan.out_dir);
  const SimulateParams& sp = plan.simulate;
  const double horizon_u = sp.horizon_scaled / (sp.eps * sp.eps);
  for (int k = 0; k < sp.replicas; ++k) {
    RngStream rng(plan.seed, replica_stream(20, 0, k));
    InterfaceState s = stationary_initial_state(sp.L, rng);
    EventHistory hist;
    NullObserver obs;
    run_until(s, 0.0, horizon_u, rng, obs, &hist);
    const std::string tag = "_r" + std::to_string(k);
    const fs::path base(plan.out_dir);
    write_events_jsonl(hist, (base / ("events" + tag + ".jsonl")).string());
    write_intervals_csv(hist, (base / ("intervals" + tag + ".csv")).string());
    std::cout << "replica " << k << ": " << hist.events.size()
              << " events, unscaled horizon " << horizon_u << "\n";
  }
  std::cout << "wrote " << sp.replicas << " event/interval log pair(s) to "
            << plan.out_dir << "\n";
  return 0;
}

int cmd_verify(const ExperimentPlan& plan,
               const std::vector<std::string>& cli_suites) {
  const std::vector<std::string>& suites =
      cli_suites.empty() ? plan.suites : cli_suites;
  const StatReport report = run_suites(plan, suites);
  for (const CriterionResult& c : report.criteria) {
    std::cout << format_criterion_line(c) << "\n";
  }
  write_report_files(report, plan);
  int gating = 0;
  int passed = 0;
  for (const CriterionResult& c : report.criteria) {
    if (!c.gating) continue;
    ++gating;
    if (c.pass) ++passed;
  }
  std::cout << passed << "/" << gating
            << " gating criteria pass; report written to "
            << (fs::path(plan.out_dir) / "report.json").string() << "\n";
  return report.all_pass() ? 0 : 1;
}

int cmd_export(const ExperimentPlan& plan, const std::string& what, int pmf_n,
               double zeta_max, int zeta_count, std::vector<double> times) {
  fs::create_directories(plan.out_dir);
  const fs::path base(plan.out_dir);
  if (what == "pmf") {
    if (pmf_n < 0) throw ConfigError("pmf export needs n >= 0");
    const ExactPmf pmf = exact_pmf(pmf_n);
    const fs::path file = base / ("pmf_" + std::to_string(pmf_n) + ".csv");
    std::ofstream out(file);
    for (std::size_t k = 0; k < pmf.p.size(); ++k) {
      if (pmf.p[k] == 0.0) continue;
      out << k << ',' << nlohmann::json(pmf.p[k]).dump() << '\n';
    }
    std::cout << "wrote " << file.string() << "\n";
    return 0;
  }
  if (what == "fourier") {
    if (zeta_count < 2) throw ConfigError("fourier export needs >= 2 points");
    RngStream rng(plan.seed, replica_stream(21, 0, 0));
    InterfaceState s = stationary_initial_state(plan.lattice_l, rng);
    const double eps = plan.bracket.eps.back();
    const GridFunction g = weighted_field(s, eps, plan.rho);
    std::vector<double> zetas(zeta_count);
    for (int i = 0; i < zeta_count; ++i) {
      zetas[i] = -zeta_max + 2.0 * zeta_max * i / (zeta_count - 1);
    }
    const FourierGrid fg = fourier_hat_grid(g, zetas);
    const fs::path file = base / "fourier.csv";
    std::ofstream out(file);
    out << "zeta,re,im\n";
    for (std::size_t i = 0; i < fg.zeta.size(); ++i) {
      out << nlohmann::json(fg.zeta[i]).dump() << ','
          << nlohmann::json(fg.value[i].real()).dump() << ','
          << nlohmann::json(fg.value[i].imag()).dump() << '\n';
    }
    std::cout << "wrote " << file.string() << " (eps = " << eps
              << ", weight rho = " << plan.rho << ")\n";
    return 0;
  }
  if (what == "marginals") {
    const SheParams& sp = plan.she;
    SheGrid grid{sp.dx, sp.dx * sp.dx / 4.0, sp.x_max};
    auto samples = parallel_map<double>(
        sp.replicas, plan.parallelism, [&](int ri) {
          RngStream rng(plan.seed, replica_stream(12, 0, ri));
          std::vector<double> u0 = sample_bessel3_path(grid, rng);
          const SheRunResult res = she_run(std::move(u0), sp.t, grid, rng);
          return field_value(res.state.u, grid, sp.x0);
        });
    const fs::path file = base / "marginals.csv";
    std::ofstream out(file);
    for (double v : samples) out << nlohmann::json(v).dump() << '\n';
    std::cout << "wrote " << file.string() << " (" << samples.size()
              << " samples at x0 = " << sp.x0 << ", t = " << sp.t << ")\n";
    return 0;
  }
  if (what == "fields") {
    const SheParams& sp = plan.she;
    if (times.empty()) times = {0.0, 0.5 * sp.t, sp.t};
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (times[i] <= times[i - 1] || times[0] < 0.0) {
        throw ConfigError("field snapshot times must be nonnegative and "
                          "strictly increasing");
      }
    }
    SheGrid grid{sp.dx, sp.dx * sp.dx / 4.0, sp.x_max};
    RngStream rng(plan.seed, replica_stream(21, 2, 0));
    std::vector<double> u = sample_bessel3_path(grid, rng);
    double cur = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] > cur) {
        SheRunResult res = she_run(std::move(u), times[i] - cur, grid, rng);
        u = std::move(res.state.u);
        cur = times[i];
      }
      const fs::path file = base / ("fields_" + std::to_string(i) + ".csv");
      std::ofstream out(file);
      out << "x,u\n";
      for (int n = 0; n < grid.nodes(); ++n) {
        out << nlohmann::json(n * grid.dx).dump() << ','
            << nlohmann::json(u[n]).dump() << '\n';
      }
      std::cout << "wrote " << file.string() << " (t = " << times[i] << ")\n";
    }
    return 0;
  }
  throw ConfigError("unknown export \"" + what +
                    "\"; expected pmf, fourier, marginals, or fields");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-driven corner-flip interface dynamics toolkit"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::uint64_t seed = 0;
  int parallelism = 0;
  std::string out_dir;
  bool dry_run = false;
  app.add_option("--config", config_path, "experiment plan (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "override the plan seed")
                       ->envname("WALLFLIP_SEED");
  auto* par_opt =
      app.add_option("--parallelism", parallelism,
                     "override the plan parallelism (0 = all cores)")
          ->envname("WALLFLIP_PARALLELISM");
  app.add_option("--out", out_dir, "override the plan output directory");
  app.add_flag("--dry-run", dry_run,
               "validate the config and print the resolved plan");

  CLI::App* sim = app.add_subcommand(
      "simulate", "run the interface dynamics, write event/interval logs");
  CLI::App* ver = app.add_subcommand(
      "verify", "run acceptance suites and write the report");
  std::vector<std::string> suites;
  ver->add_option("--suite", suites,
                  "suite name (repeatable): stationarity, bracket, "
                  "reflection, walk, norms, she, all");
  CLI::App* exp =
      app.add_subcommand("export", "write reference-data CSV files");
  std::string what;
  exp->add_option("what", what, "pmf | fourier | marginals | fields")
      ->required();
  int pmf_n = 10;
  exp->add_option("--n", pmf_n, "walk length for the pmf export");
  double zeta_max = 40.0;
  int zeta_count = 201;
  exp->add_option("--zeta-max", zeta_max, "frequency half-span");
  exp->add_option("--zeta-count", zeta_count, "frequency grid points");
  std::vector<double> times;
  exp->add_option("--times", times, "snapshot times for the fields export");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    ExperimentPlan plan;
    if (!config_path.empty()) plan = ExperimentPlan::from_file(config_path);
    if (seed_opt->count() > 0) plan.seed = seed;
    if (par_opt->count() > 0) plan.parallelism = parallelism;
    if (!out_dir.empty()) plan.out_dir = out_dir;
    plan.validate();
    if (dry_run) {
      std::cout << plan.to_json().dump(2) << "\n";
      return 0;
    }
    if (sim->parsed()) return cmd_simulate(plan);
    if (ver->parsed()) return cmd_verify(plan, suites);
    if (exp->parsed()) {
      return cmd_export(plan, what, pmf_n, zeta_max, zeta_count, times);
    }
    std::cerr << app.help();
    return 2;
  } catch (const WindowViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
