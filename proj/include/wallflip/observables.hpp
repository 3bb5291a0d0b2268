#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "wallflip/interface_dynamics.hpp"
#include "wallflip/stats.hpp"
#include "wallflip/test_function.hpp"

namespace wallflip {

/// Real function sampled on a uniform grid x = spacing * i, evaluated
/// between nodes by linear interpolation and zero outside the grid.
struct GridFunction {
  double spacing = 1.0;
  std::vector<double> values;

  double value(double x) const;
  double x_max() const {
    return values.empty() ? 0.0 : spacing * (values.size() - 1);
  }
};

/// Diffusive rescaling of one height profile: value sqrt(eps) * h(n) at
/// x = eps * n, linear interpolation in between.
struct RescaledInterface {
  double eps = 1.0;
  std::vector<double> g;

  double operator()(double x) const;
  /// e^(-rho x) times the interpolated value (weight applied after
  /// interpolation).
  double weighted(double x, double rho) const;
  /// Grid view with the weight baked into the node values.
  GridFunction grid(double rho = 0.0) const;
};

RescaledInterface rescale(const InterfaceState& s, double eps);

/// Shorthand for rescale(s, eps).grid(rho).
GridFunction weighted_field(const InterfaceState& s, double eps, double rho);

/// Time-interpolation between two profiles: (1-frac) h_a + frac h_b,
/// rescaled and weighted like weighted_field.
GridFunction interpolated_field(const std::vector<std::int32_t>& h_a,
                                const std::vector<std::int32_t>& h_b,
                                double frac, double eps, double rho);

/// Streaming accumulator for every rescaled observable of one run against
/// one test function. Works as an observer for run_until or for
/// EventHistory::replay; all reported quantities are in scaled units
/// (time t = eps^2 * unscaled time, space x = eps * site).
class ScaledObservables {
 public:
  /// t_stop, when finite, clips accumulation to unscaled times <= t_stop
  /// (jumps exactly at t_stop are included).
  ScaledObservables(const TestFunction& phi, double eps, int L,
                    double t_stop_unscaled =
                        std::numeric_limits<double>::infinity(),
                    bool keep_noise_path = false);

  void on_interval(double t0, double t1, const InterfaceState& s);
  void on_before(const FlipEvent& ev, const InterfaceState& s);
  void on_after(const FlipEvent& ev, const InterfaceState& s);

  double eps() const { return eps_; }

  /// <h^eps, phi>_eps = eps * sum_n h^eps(eps n) phi(eps n), at start / now.
  double pairing_eps_initial() const;
  double pairing_eps_current() const;
  /// Continuum <h^eps, phi>, exact for the piecewise-linear interpolation.
  double pairing_continuum_initial() const;
  double pairing_continuum_current() const;

  /// eps^{-1/2} * integral of sum_n lap(n) phi(eps n) over scaled time.
  double drift_integral() const;
  /// Martingale W^eps_t(phi); also its two parts separately.
  double noise_value() const;
  double noise_jump_part() const;
  double noise_compensator_part() const;
  /// integral of phi against the reflection measure eta^eps.
  double eta_integral() const;
  /// Bracket terms: A1 over all corners, A2 over blocked corners.
  double bracket_a1() const;
  double bracket_a2() const;
  /// integral over scaled time of continuum <h^eps_s, phi''>.
  double second_derivative_integral() const;

  /// Left minus right side of the pathwise decomposition
  /// <h_t,phi>_eps = <h_0,phi>_eps + drift + sqrt(2) W_t + eta, and the
  /// magnitude scale of its terms for relative comparison.
  double decomposition_residual() const;
  double decomposition_scale() const;

  /// Six-term discretization error R^eps_t(phi) and its term scale.
  double error_term() const;
  double error_term_scale() const;

  /// Largest |jump| of W^eps seen so far, and the a-priori bound
  /// sqrt(2) eps^{3/2} sup|phi| it must respect.
  double max_jump_abs() const;
  double jump_bound() const;

  /// Max difference between the two quadrature refinement levels of the
  /// per-cell continuum weights (both computed at construction).
  double quadrature_refinement_gap() const { return quad_gap_; }

  /// Number of flips and blocked rings seen (within the clip window).
  std::int64_t flips() const { return flips_; }
  std::int64_t blocked_rings() const { return blocked_rings_; }

  /// Noise path record (scaled times), kept when requested at construction.
  const std::vector<double>& path_times() const { return path_times_; }
  const std::vector<double>& path_jump_cumsum() const { return path_jump_; }
  const std::vector<double>& path_comp_cumsum() const { return path_comp_; }

 private:
  struct SiteTerms {
    double lap_phi = 0.0;
    double lap_phi_allowed = 0.0;
    double blocked_phi = 0.0;
    double corner_phi2 = 0.0;
    double blocked_phi2 = 0.0;
  };
  SiteTerms site_terms(const InterfaceState& s, int m) const;
  void add_site_terms(const InterfaceState& s, int lo, int hi, double sign);
  void initialize(const InterfaceState& s);

  double eps_ = 1.0;
  int L_ = 0;
  double t_stop_ = 0.0;
  bool keep_path_ = false;
  bool initialized_ = false;

  std::vector<double> phi_;
  std::vector<double> phi2_;
  std::vector<double> w_cont_;
  std::vector<double> w_cont2_;
  std::vector<double> w_dd_;
  double quad_gap_ = 0.0;
  double sup_phi_ = 0.0;

  double g_lap_phi_ = 0.0;
  double g_lapallow_phi_ = 0.0;
  double g_blocked_phi_ = 0.0;
  double g_corner_phi2_ = 0.0;
  double g_blocked_phi2_ = 0.0;

  double s_hphi_ = 0.0;
  double s_cont_ = 0.0;
  double s_dd_ = 0.0;
  double s_hphi_init_ = 0.0;
  double s_cont_init_ = 0.0;

  KahanSum int_lap_phi_;
  KahanSum int_lapallow_phi_;
  KahanSum int_blocked_phi_;
  KahanSum int_corner_phi2_;
  KahanSum int_blocked_phi2_;
  KahanSum int_dd_;
  KahanSum jump_sum_;

  double max_jump_raw_ = 0.0;
  std::int64_t flips_ = 0;
  std::int64_t blocked_rings_ = 0;

  std::vector<double> path_times_;
  std::vector<double> path_jump_;
  std::vector<double> path_comp_;
};

/// Cadlag path t -> W^eps_t(phi) in scaled time: pure-jump part and
/// absolutely continuous compensator part kept separately. Breakpoints sit
/// at the flips (the compensator slope only changes there).
struct DiscreteNoisePath {
  double eps = 1.0;
  std::vector<double> times;
  std::vector<double> jump_cumsum;
  std::vector<double> comp_cumsum;
  double t_end = 0.0;
  double final_jump_part = 0.0;
  double final_comp_part = 0.0;
  double max_jump_abs = 0.0;

  double value(double t_scaled) const;
  double final_value() const { return final_jump_part + final_comp_part; }
};

DiscreteNoisePath noise_path(const EventHistory& hist,
                             const TestFunction& phi, double eps);

struct BracketPair {
  double a1 = 0.0;
  double a2 = 0.0;
};

/// Bracket terms at scaled time t (t_scaled <= eps^2 * horizon).
BracketPair bracket(const EventHistory& hist, const TestFunction& phi,
                    double eps, double t_scaled);

/// Sparse reflection measure: mass indexed by (site, scaled-time bin).
struct ReflectionMeasure {
  double eps = 1.0;
  double bin_width = 0.0;
  std::map<std::pair<int, int>, double> mass;

  double total() const;
};

/// bin_width <= 0 selects the default eps^2 (one unscaled time unit).
ReflectionMeasure reflection_measure(const EventHistory& hist, double eps,
                                     double bin_width = 0.0);

struct SupportIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides of int x psi(x) h^eps d eta^eps = sqrt(eps) int x psi d
/// eta^eps, assembled by independent accumulations.
SupportIdentity support_identity(const EventHistory& hist,
                                 const TestFunction& psi, double eps);

struct ResidualResult {
  double value = 0.0;
  double scale = 0.0;
};

ResidualResult semidiscrete_residual(const EventHistory& hist,
                                     const TestFunction& phi, double eps,
                                     double t_scaled);

struct ErrorTermResult {
  double value = 0.0;
  double scale = 0.0;
  double quad_gap = 0.0;
};

ErrorTermResult error_term(const EventHistory& hist, const TestFunction& phi,
                           double eps, double t_scaled);

/// sup over t in [0, floor(t_end)] (unscaled) of the weighted sup distance
/// between the piecewise-constant rescaled path and its interpolation
/// between integer unscaled times.
double interpolation_gap(const EventHistory& hist, double eps, double rho);

struct IncrementScalingResult {
  SlopeFit fit;
  std::vector<std::pair<double, double>> points;
};

/// fields[r][0] is the base-time field of replica r; fields[r][1+k] the
/// field at scaled lag dt_scaled[k]. Regresses the mean H^{-s0} norm of the
/// increment against the lag on log-log axes.
IncrementScalingResult increment_scaling(
    const std::vector<std::vector<GridFunction>>& fields,
    std::span<const double> dt_scaled, double s0, double zeta_cut);

}  // namespace wallflip
