#include "wallflip/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wallflip/norms.hpp"

namespace wallflip {

double GridFunction::value(double x) const {
  if (values.empty() || x < 0.0 || x > x_max()) return 0.0;
  const double u = x / spacing;
  const std::size_t i = std::min(static_cast<std::size_t>(u),
                                 values.size() - 2);
  const double f = u - static_cast<double>(i);
  return values[i] * (1.0 - f) + values[i + 1] * f;
}

double RescaledInterface::operator()(double x) const {
  if (g.empty() || x < 0.0) return 0.0;
  const double xm = eps * (g.size() - 1);
  if (x > xm) return 0.0;
  const double u = x / eps;
  const std::size_t i = std::min(static_cast<std::size_t>(u), g.size() - 2);
  const double f = u - static_cast<double>(i);
  return g[i] * (1.0 - f) + g[i + 1] * f;
}

double RescaledInterface::weighted(double x, double rho) const {
  return std::exp(-rho * x) * (*this)(x);
}

GridFunction RescaledInterface::grid(double rho) const {
  GridFunction out;
  out.spacing = eps;
  out.values.resize(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    out.values[n] = std::exp(-rho * eps * static_cast<double>(n)) * g[n];
  }
  return out;
}

RescaledInterface rescale(const InterfaceState& s, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("scale must be in (0, 1]");
  }
  RescaledInterface out;
  out.eps = eps;
  const double root = std::sqrt(eps);
  out.g.resize(s.h.size());
  for (std::size_t n = 0; n < s.h.size(); ++n) out.g[n] = root * s.h[n];
  return out;
}

GridFunction weighted_field(const InterfaceState& s, double eps, double rho) {
  return rescale(s, eps).grid(rho);
}

GridFunction interpolated_field(const std::vector<std::int32_t>& h_a,
                                const std::vector<std::int32_t>& h_b,
                                double frac, double eps, double rho) {
  if (h_a.size() != h_b.size()) {
    throw std::invalid_argument("profiles must share a lattice");
  }
  GridFunction out;
  out.spacing = eps;
  out.values.resize(h_a.size());
  const double root = std::sqrt(eps);
  for (std::size_t n = 0; n < h_a.size(); ++n) {
    const double hv = (1.0 - frac) * h_a[n] + frac * h_b[n];
    out.values[n] =
        root * hv * std::exp(-rho * eps * static_cast<double>(n));
  }
  return out;
}

namespace {

/// Per-cell moments of f against the linear interpolation basis: for cell
/// [eps k, eps (k+1)], j0 = int (1-u) f dx and j1 = int u f dx with
/// u the local coordinate. Knot-split Gauss quadrature, exact for the
/// piecewise-polynomial test functions.
void cell_weights(const TestFunction& f, bool second_derivative, double eps,
                  int cells, int subdiv, std::vector<double>& node_weight) {
  node_weight.assign(cells + 1, 0.0);
  const std::span<const double> knots = f.knots();
  for (int k = 0; k < cells; ++k) {
    const double a = eps * k;
    const double b = eps * (k + 1);
    if (b <= f.support_lo() || a >= f.support_hi()) continue;
    const auto fe = [&](double x) {
      return second_derivative ? f.d2(x) : f(x);
    };
    const double j0 = integrate_gl8(
        [&](double x) { return fe(x) * (1.0 - (x - a) / eps); }, a, b, knots,
        subdiv);
    const double j1 = integrate_gl8(
        [&](double x) { return fe(x) * ((x - a) / eps); }, a, b, knots,
        subdiv);
    node_weight[k] += j0;
    node_weight[k + 1] += j1;
  }
}

}  // namespace

ScaledObservables::ScaledObservables(const TestFunction& phi, double eps,
                                     int L, double t_stop_unscaled,
                                     bool keep_noise_path)
    : eps_(eps),
      L_(L),
      t_stop_(t_stop_unscaled),
      keep_path_(keep_noise_path) {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("scale must be in (0, 1]");
  }
  if (L < 1) throw std::invalid_argument("need at least one active site");
  if (phi.support_hi() > eps * (L + 1)) {
    throw std::invalid_argument(
        "test function support exceeds the lattice window");
  }
  phi_.resize(L + 2);
  phi2_.resize(L + 2);
  for (int n = 0; n <= L + 1; ++n) {
    phi_[n] = phi(eps * n);
    phi2_[n] = phi_[n] * phi_[n];
  }
  sup_phi_ = phi.sup_abs(0);

  std::vector<double> coarse;
  cell_weights(phi, false, eps, L + 1, 2, w_cont_);
  cell_weights(phi, false, eps, L + 1, 1, coarse);
  double gap = 0.0;
  for (int n = 0; n <= L + 1; ++n) {
    gap = std::max(gap, std::abs(w_cont_[n] - coarse[n]));
  }
  w_cont2_ = std::move(coarse);
  cell_weights(phi, true, eps, L + 1, 2, w_dd_);
  cell_weights(phi, true, eps, L + 1, 1, coarse);
  for (int n = 0; n <= L + 1; ++n) {
    gap = std::max(gap, std::abs(w_dd_[n] - coarse[n]));
  }
  quad_gap_ = gap;
}

ScaledObservables::SiteTerms ScaledObservables::site_terms(
    const InterfaceState& s, int m) const {
  SiteTerms t;
  const int lap = discrete_laplacian(s, m);
  if (lap == 0) return t;
  const bool blocked = lap == -2 && s.h[m] == 1;
  t.lap_phi = lap * phi_[m];
  t.corner_phi2 = phi2_[m];
  if (blocked) {
    t.blocked_phi = phi_[m];
    t.blocked_phi2 = phi2_[m];
  } else {
    t.lap_phi_allowed = t.lap_phi;
  }
  return t;
}

void ScaledObservables::add_site_terms(const InterfaceState& s, int lo,
                                       int hi, double sign) {
  for (int m = std::max(1, lo); m <= std::min(L_, hi); ++m) {
    const SiteTerms t = site_terms(s, m);
    g_lap_phi_ += sign * t.lap_phi;
    g_lapallow_phi_ += sign * t.lap_phi_allowed;
    g_blocked_phi_ += sign * t.blocked_phi;
    g_corner_phi2_ += sign * t.corner_phi2;
    g_blocked_phi2_ += sign * t.blocked_phi2;
  }
}

void ScaledObservables::initialize(const InterfaceState& s) {
  if (static_cast<int>(s.h.size()) != L_ + 2) {
    throw std::invalid_argument("lattice size does not match accumulator");
  }
  add_site_terms(s, 1, L_, 1.0);
  for (int n = 0; n <= L_ + 1; ++n) {
    s_hphi_ += s.h[n] * phi_[n];
    s_cont_ += s.h[n] * w_cont_[n];
    s_dd_ += s.h[n] * w_dd_[n];
  }
  s_hphi_init_ = s_hphi_;
  s_cont_init_ = s_cont_;
  initialized_ = true;
  if (keep_path_) {
    path_times_.push_back(0.0);
    path_jump_.push_back(0.0);
    path_comp_.push_back(0.0);
  }
}

void ScaledObservables::on_interval(double t0, double t1,
                                    const InterfaceState& s) {
  if (!initialized_) initialize(s);
  const double b = std::min(t1, t_stop_);
  if (b <= t0) return;
  const double tau = b - t0;
  int_lap_phi_.add(g_lap_phi_ * tau);
  int_lapallow_phi_.add(g_lapallow_phi_ * tau);
  int_blocked_phi_.add(g_blocked_phi_ * tau);
  int_corner_phi2_.add(g_corner_phi2_ * tau);
  int_blocked_phi2_.add(g_blocked_phi2_ * tau);
  int_dd_.add(s_dd_ * tau);
}

void ScaledObservables::on_before(const FlipEvent& ev,
                                  const InterfaceState& s) {
  if (ev.outcome != FlipOutcome::Flipped || ev.t > t_stop_) return;
  add_site_terms(s, ev.site - 1, ev.site + 1, -1.0);
}

void ScaledObservables::on_after(const FlipEvent& ev,
                                 const InterfaceState& s) {
  if (ev.t > t_stop_) return;
  if (ev.outcome == FlipOutcome::Blocked) {
    ++blocked_rings_;
    return;
  }
  if (ev.outcome != FlipOutcome::Flipped) return;
  add_site_terms(s, ev.site - 1, ev.site + 1, 1.0);
  const double delta = ev.delta;
  s_hphi_ += delta * phi_[ev.site];
  s_cont_ += delta * w_cont_[ev.site];
  s_dd_ += delta * w_dd_[ev.site];
  const double jump_raw = delta * phi_[ev.site];
  jump_sum_.add(jump_raw);
  max_jump_raw_ = std::max(max_jump_raw_, std::abs(jump_raw));
  ++flips_;
  if (keep_path_) {
    path_times_.push_back(eps_ * eps_ * ev.t);
    path_jump_.push_back(jump_sum_.value());
    path_comp_.push_back(int_lapallow_phi_.value());
  }
}

double ScaledObservables::pairing_eps_initial() const {
  return std::pow(eps_, 1.5) * s_hphi_init_;
}
double ScaledObservables::pairing_eps_current() const {
  return std::pow(eps_, 1.5) * s_hphi_;
}
double ScaledObservables::pairing_continuum_initial() const {
  return std::sqrt(eps_) * s_cont_init_;
}
double ScaledObservables::pairing_continuum_current() const {
  return std::sqrt(eps_) * s_cont_;
}
double ScaledObservables::drift_integral() const {
  return std::pow(eps_, 1.5) * int_lap_phi_.value();
}
double ScaledObservables::noise_jump_part() const {
  return std::pow(eps_, 1.5) / std::sqrt(2.0) * jump_sum_.value();
}
double ScaledObservables::noise_compensator_part() const {
  return -std::pow(eps_, 1.5) / std::sqrt(2.0) *
         int_lapallow_phi_.value();
}
double ScaledObservables::noise_value() const {
  return noise_jump_part() + noise_compensator_part();
}
double ScaledObservables::eta_integral() const {
  return 2.0 * std::pow(eps_, 1.5) * int_blocked_phi_.value();
}
double ScaledObservables::bracket_a1() const {
  return 2.0 * eps_ * eps_ * eps_ * int_corner_phi2_.value();
}
double ScaledObservables::bracket_a2() const {
  return 2.0 * eps_ * eps_ * eps_ * int_blocked_phi2_.value();
}
double ScaledObservables::second_derivative_integral() const {
  return std::pow(eps_, 2.5) * int_dd_.value();
}

double ScaledObservables::decomposition_residual() const {
  return pairing_eps_current() - pairing_eps_initial() - drift_integral() -
         std::sqrt(2.0) * noise_value() - eta_integral();
}
double ScaledObservables::decomposition_scale() const {
  return std::abs(pairing_eps_current()) + std::abs(pairing_eps_initial()) +
         std::abs(drift_integral()) +
         std::sqrt(2.0) * std::abs(noise_value()) +
         std::abs(eta_integral());
}

double ScaledObservables::error_term() const {
  return (pairing_eps_current() - pairing_continuum_current()) -
         (pairing_eps_initial() - pairing_continuum_initial()) -
         drift_integral() + second_derivative_integral();
}
double ScaledObservables::error_term_scale() const {
  return std::abs(pairing_eps_current()) +
         std::abs(pairing_continuum_current()) +
         std::abs(pairing_eps_initial()) +
         std::abs(pairing_continuum_initial()) +
         std::abs(drift_integral()) +
         std::abs(second_derivative_integral());
}

double ScaledObservables::max_jump_abs() const {
  return std::pow(eps_, 1.5) / std::sqrt(2.0) * max_jump_raw_;
}
double ScaledObservables::jump_bound() const {
  return std::sqrt(2.0) * std::pow(eps_, 1.5) * sup_phi_;
}

namespace {

template <class Acc>
void replay_into(const EventHistory& hist, Acc& acc) {
  hist.replay(
      [&](double t0, double t1, const InterfaceState& s) {
        acc.on_interval(t0, t1, s);
      },
      [&](const FlipEvent& ev, const InterfaceState& s) {
        acc.on_before(ev, s);
      },
      [&](const FlipEvent& ev, const InterfaceState& s) {
        acc.on_after(ev, s);
      });
}

}  // namespace

DiscreteNoisePath noise_path(const EventHistory& hist,
                             const TestFunction& phi, double eps) {
  const int L = static_cast<int>(hist.initial_h.size()) - 2;
  ScaledObservables acc(phi, eps, L,
                        std::numeric_limits<double>::infinity(), true);
  replay_into(hist, acc);
  DiscreteNoisePath out;
  out.eps = eps;
  const double c = std::pow(eps, 1.5) / std::sqrt(2.0);
  out.times = acc.path_times();
  out.jump_cumsum.reserve(out.times.size());
  out.comp_cumsum.reserve(out.times.size());
  double prev_jump = 0.0;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    const double j = c * acc.path_jump_cumsum()[i];
    out.jump_cumsum.push_back(j);
    out.comp_cumsum.push_back(-c * acc.path_comp_cumsum()[i]);
    out.max_jump_abs = std::max(out.max_jump_abs, std::abs(j - prev_jump));
    prev_jump = j;
  }
  out.t_end = eps * eps * hist.t_end;
  out.final_jump_part = acc.noise_jump_part();
  out.final_comp_part = acc.noise_compensator_part();
  return out;
}

double DiscreteNoisePath::value(double t_scaled) const {
  if (times.empty() || t_scaled < times.front()) return 0.0;
  auto it = std::upper_bound(times.begin(), times.end(), t_scaled);
  const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  const double jump = jump_cumsum[i];
  double comp = comp_cumsum[i];
  if (i + 1 < times.size()) {
    const double span = times[i + 1] - times[i];
    if (span > 0.0) {
      const double f = (t_scaled - times[i]) / span;
      comp += f * (comp_cumsum[i + 1] - comp_cumsum[i]);
    }
  } else if (t_end > times[i]) {
    const double f = (std::min(t_scaled, t_end) - times[i]) /
                     (t_end - times[i]);
    comp += f * (final_comp_part - comp_cumsum[i]);
  }
  return jump + comp;
}

BracketPair bracket(const EventHistory& hist, const TestFunction& phi,
                    double eps, double t_scaled) {
  const double horizon = (hist.t_end - hist.t_begin) * eps * eps;
  if (t_scaled > horizon * (1.0 + 1e-12)) {
    throw std::invalid_argument("bracket time exceeds the run horizon");
  }
  const int L = static_cast<int>(hist.initial_h.size()) - 2;
  ScaledObservables acc(phi, eps, L, t_scaled / (eps * eps));
  replay_into(hist, acc);
  return BracketPair{acc.bracket_a1(), acc.bracket_a2()};
}

double ReflectionMeasure::total() const {
  KahanSum sum;
  for (const auto& [key, m] : mass) sum.add(m);
  return sum.value();
}

ReflectionMeasure reflection_measure(const EventHistory& hist, double eps,
                                     double bin_width) {
  ReflectionMeasure out;
  out.eps = eps;
  out.bin_width = bin_width > 0.0 ? bin_width : eps * eps;
  const double rate = 2.0 / std::sqrt(eps);
  const double bw = out.bin_width;
  hist.replay(
      [&](double t0, double t1, const InterfaceState& s) {
        if (t1 <= t0) return;
        const double s0 = eps * eps * t0;
        const double s1 = eps * eps * t1;
        for (int m = 1; m <= s.active_sites(); ++m) {
          if (!is_blocked(s, m)) continue;
          int b = static_cast<int>(std::floor(s0 / bw));
          double lo = s0;
          while (lo < s1) {
            const double hi = std::min(s1, (b + 1) * bw);
            out.mass[{m, b}] += rate * (hi - lo);
            lo = hi;
            ++b;
          }
        }
      },
      [](const FlipEvent&, const InterfaceState&) {},
      [](const FlipEvent&, const InterfaceState&) {});
  return out;
}

SupportIdentity support_identity(const EventHistory& hist,
                                 const TestFunction& psi, double eps) {
  KahanSum lhs;
  KahanSum rhs;
  hist.replay(
      [&](double t0, double t1, const InterfaceState& s) {
        if (t1 <= t0) return;
        const double tau = t1 - t0;
        for (int m = 1; m <= s.active_sites(); ++m) {
          if (!is_blocked(s, m)) continue;
          const double x = eps * m;
          const double w = x * psi(x);
          lhs.add(w * static_cast<double>(s.h[m]) * tau);
          rhs.add(w * tau);
        }
      },
      [](const FlipEvent&, const InterfaceState&) {},
      [](const FlipEvent&, const InterfaceState&) {});
  const double c = 2.0 * eps * eps;
  return SupportIdentity{c * lhs.value(), c * rhs.value()};
}

ResidualResult semidiscrete_residual(const EventHistory& hist,
                                     const TestFunction& phi, double eps,
                                     double t_scaled) {
  const int L = static_cast<int>(hist.initial_h.size()) - 2;
  ScaledObservables acc(phi, eps, L, t_scaled / (eps * eps));
  replay_into(hist, acc);
  return ResidualResult{acc.decomposition_residual(),
                        acc.decomposition_scale()};
}

ErrorTermResult error_term(const EventHistory& hist, const TestFunction& phi,
                           double eps, double t_scaled) {
  const int L = static_cast<int>(hist.initial_h.size()) - 2;
  ScaledObservables acc(phi, eps, L, t_scaled / (eps * eps));
  replay_into(hist, acc);
  return ErrorTermResult{acc.error_term(), acc.error_term_scale(),
                         acc.quadrature_refinement_gap()};
}

double interpolation_gap(const EventHistory& hist, double eps, double rho) {
  if (hist.t_begin != 0.0) {
    throw std::invalid_argument("history must start at time 0");
  }
  const std::size_t sites = hist.initial_h.size();
  const int K = static_cast<int>(std::floor(hist.t_end));
  if (K < 1) return 0.0;

  std::vector<std::vector<std::int32_t>> keyframe(K + 1);
  {
    InterfaceState s{hist.initial_h};
    std::size_t ei = 0;
    for (int k = 0; k <= K; ++k) {
      while (ei < hist.events.size() && hist.events[ei].t <= k) {
        const FlipEvent& ev = hist.events[ei];
        if (ev.outcome == FlipOutcome::Flipped) s.h[ev.site] += ev.delta;
        ++ei;
      }
      keyframe[k] = s.h;
    }
  }

  std::vector<double> weight(sites);
  const double root = std::sqrt(eps);
  for (std::size_t n = 0; n < sites; ++n) {
    weight[n] = root * std::exp(-rho * eps * static_cast<double>(n));
  }

  double gap = 0.0;
  const auto eval = [&](double t, const InterfaceState& s) {
    if (t < 0.0 || t > K) return;
    const int k = std::min(static_cast<int>(std::floor(t)), K - 1);
    const double f = t - k;
    const std::vector<std::int32_t>& a = keyframe[k];
    const std::vector<std::int32_t>& b = keyframe[k + 1];
    for (std::size_t n = 0; n < sites; ++n) {
      const double bar = (1.0 - f) * a[n] + f * b[n];
      const double d = std::abs(bar - s.h[n]) * weight[n];
      if (d > gap) gap = d;
    }
  };

  hist.replay(
      [&](double t0, double t1, const InterfaceState& s) {
        eval(t0, s);
        for (int k = static_cast<int>(std::ceil(t0)); k <= std::min(
                 K, static_cast<int>(std::floor(t1))); ++k) {
          eval(static_cast<double>(k), s);
        }
        eval(std::min(t1, static_cast<double>(K)), s);
      },
      [](const FlipEvent&, const InterfaceState&) {},
      [](const FlipEvent&, const InterfaceState&) {});
  return gap;
}

IncrementScalingResult increment_scaling(
    const std::vector<std::vector<GridFunction>>& fields,
    std::span<const double> dt_scaled, double s0, double zeta_cut) {
  if (fields.empty()) throw std::invalid_argument("no replicas");
  IncrementScalingResult out;
  for (std::size_t k = 0; k < dt_scaled.size(); ++k) {
    KahanSum mean;
    for (const std::vector<GridFunction>& snaps : fields) {
      if (snaps.size() != dt_scaled.size() + 1) {
        throw std::invalid_argument("replica snapshot count mismatch");
      }
      GridFunction diff = snaps[k + 1];
      for (std::size_t i = 0; i < diff.values.size(); ++i) {
        diff.values[i] -= snaps[0].values[i];
      }
      mean.add(norm_h_neg_s0(diff, s0, zeta_cut).value);
    }
    out.points.emplace_back(dt_scaled[k],
                            mean.value() / static_cast<double>(fields.size()));
  }
  out.fit = loglog_slope(out.points);
  return out;
}

}  // namespace wallflip
