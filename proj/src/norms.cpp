#include "wallflip/norms.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "wallflip/fourier.hpp"
#include "wallflip/stats.hpp"
#include "wallflip/test_function.hpp"

namespace wallflip {

HNegNormResult norm_h_neg_s0(const GridFunction& g, double s0,
                             double zeta_cut) {
  if (!(s0 > 0.5)) {
    throw std::invalid_argument("regularity order must exceed 1/2");
  }
  if (g.values.size() < 2) {
    throw std::invalid_argument("grid needs at least two nodes");
  }
  if (g.values.front() != 0.0) {
    throw std::invalid_argument("grid function must vanish at the origin");
  }
  const double eps = g.spacing;
  const double period = 2.0 * M_PI / eps;
  if (zeta_cut <= 0.0) zeta_cut = 10.0 * period;
  const int periods =
      std::max(1, static_cast<int>(std::ceil(zeta_cut / period - 1e-9)));
  const double z = periods * period;

  const std::size_t m = g.values.size();
  const std::size_t nbase = 16 * m;

  // |lattice sum|^2 on one period; the sum is exactly periodic in zeta,
  // so every integration node folds back onto this base grid.
  std::vector<double> base2(nbase);
  for (std::size_t j = 0; j < nbase; ++j) {
    const double ang = -2.0 * M_PI * static_cast<double>(j) /
                       static_cast<double>(nbase);
    std::complex<double> sum(0.0, 0.0);
    for (std::size_t n = 1; n < m; ++n) {
      if (g.values[n] == 0.0) continue;
      const double phase = ang * static_cast<double>(n);
      sum += g.values[n] *
             std::complex<double>(std::cos(phase), std::sin(phase));
    }
    base2[j] = std::norm(sum);
  }

  const double dzeta = period / static_cast<double>(nbase);
  const std::size_t q_end = static_cast<std::size_t>(periods) * nbase;
  KahanSum head;
  for (std::size_t q = 0; q <= q_end; ++q) {
    const double zeta = dzeta * static_cast<double>(q);
    const double c = fourier_cell_factor(zeta, eps);
    const double w =
        std::pow(1.0 + zeta * zeta, -s0) * c * c * base2[q % nbase];
    const double trap = (q == 0 || q == q_end) ? 0.5 : 1.0;
    head.add(2.0 * trap * w * dzeta);
  }

  KahanSum l1;
  for (double v : g.values) l1.add(std::abs(v));
  const double m1 = eps * l1.value();
  const double tail =
      2.0 * m1 * m1 * std::pow(z, 1.0 - 2.0 * s0) / (2.0 * s0 - 1.0);

  const double head_val = head.value();
  if (head_val > 0.0 && tail > 0.1 * head_val) {
    throw std::domain_error("frequency cutoff too small for this field");
  }
  return HNegNormResult{std::sqrt(head_val), tail, z};
}

namespace {

/// Antiderivative of |v|^r: d/dv [ v |v|^r / (r+1) ] = |v|^r for all v.
double abs_pow_anti(double v, double r) {
  return v * std::pow(std::abs(v), r) / (r + 1.0);
}

/// Exact integral of |a + (b - a) u|^r over u in [0, 1], times len. The
/// divided difference cancels catastrophically when a and b agree to
/// rounding noise (constant difference profiles produce exactly that), so
/// near-equal endpoints fall back to the midpoint value, whose error is
/// O(((b - a) / a)^2) and far below the cancellation floor.
double segment_lr(double a, double b, double r, double len) {
  if (std::abs(b - a) <= 1e-6 * (std::abs(a) + std::abs(b))) {
    return len * std::pow(std::abs(0.5 * (a + b)), r);
  }
  return len * (abs_pow_anti(b, r) - abs_pow_anti(a, r)) / (b - a);
}

/// Exact int_0^{X - lag} |f(x + lag) - f(x)|^r dx for piecewise-linear f.
double lag_integral(const GridFunction& g, double lag, double r) {
  const double eps = g.spacing;
  const double x_hi = g.x_max() - lag;
  if (x_hi <= 0.0) return 0.0;
  const auto diff = [&](double x) { return g.value(x + lag) - g.value(x); };
  KahanSum acc;
  double x = 0.0;
  while (x < x_hi) {
    const double cell_a = eps * (std::floor(x / eps + 1e-12) + 1.0);
    const double cell_b =
        eps * (std::floor((x + lag) / eps + 1e-12) + 1.0) - lag;
    const double nxt = std::min({x_hi, cell_a, cell_b});
    if (!(nxt > x)) break;
    acc.add(segment_lr(diff(x), diff(nxt), r, nxt - x));
    x = nxt;
  }
  return acc.value();
}

}  // namespace

double norm_w_s1_r(const GridFunction& g, double s1, double r) {
  if (!(s1 > 0.0 && s1 < 0.5)) {
    throw std::invalid_argument("smoothness order must be in (0, 1/2)");
  }
  if (!(r >= 1.0)) throw std::invalid_argument("exponent must be >= 1");
  if (g.values.size() < 2) {
    throw std::invalid_argument("grid needs at least two nodes");
  }
  const double eps = g.spacing;
  const double x_max = g.x_max();

  KahanSum lr;
  for (std::size_t n = 0; n + 1 < g.values.size(); ++n) {
    lr.add(segment_lr(g.values[n], g.values[n + 1], r, eps));
  }

  const double alpha = r * (1.0 - s1) - 1.0;
  const std::vector<double> no_knots;

  // Lag in (0, eps]: substitute lag = eps w^{1/(alpha+1)} so that the
  // singular weight lag^alpha d(lag) becomes the flat measure dw.
  const double first = eps * std::pow(eps, alpha) / (alpha + 1.0) *
                       integrate_gl8(
                           [&](double w) {
                             const double lag =
                                 eps * std::pow(w, 1.0 / (alpha + 1.0));
                             return lag_integral(g, lag, r) /
                                    std::pow(lag, r);
                           },
                           0.0, 1.0, no_knots, 4);

  KahanSum outer;
  outer.add(first);
  for (double a = eps; a < x_max - 1e-12 * eps; a += eps) {
    const double b = std::min(a + eps, x_max);
    outer.add(integrate_gl8(
        [&](double lag) {
          return lag_integral(g, lag, r) *
                 std::pow(lag, -1.0 - s1 * r);
        },
        a, b, no_knots, 2));
  }

  const double result = lr.value() + 2.0 * outer.value();
  if (!std::isfinite(result)) {
    throw std::domain_error("norm evaluation did not stay finite");
  }
  return result;
}

double norm_c_holder(const GridFunction& g, double b) {
  if (!(b > 0.0 && b < 1.0)) {
    throw std::invalid_argument("exponent must be in (0, 1)");
  }
  const double eps = g.spacing;
  double m0 = 0.0;
  for (double v : g.values) m0 = std::max(m0, std::abs(v));
  double quot = 0.0;
  const std::size_t m = g.values.size();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double dist = eps * static_cast<double>(j - i);
      const double q =
          std::abs(g.values[j] - g.values[i]) / std::pow(dist, b);
      if (q > quot) quot = q;
    }
  }
  return m0 + quot;
}

double sup_norm(const GridFunction& g) {
  double m0 = 0.0;
  for (double v : g.values) m0 = std::max(m0, std::abs(v));
  return m0;
}

}  // namespace wallflip
