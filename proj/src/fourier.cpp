#include "wallflip/fourier.hpp"

#include <cmath>
#include <stdexcept>

#include "wallflip/stats.hpp"
#include "wallflip/test_function.hpp"

namespace wallflip {

double fourier_cell_factor(double zeta, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("spacing must be positive");
  const double half = 0.5 * zeta * eps;
  if (std::abs(half) < 1e-4) {
    const double h2 = half * half;
    return eps * (1.0 - h2 / 3.0 + h2 * h2 * 2.0 / 45.0);
  }
  const double s = std::sin(half) / half;
  return eps * s * s;
}

std::complex<double> fourier_hat(const GridFunction& g, double zeta) {
  if (g.values.size() < 2) {
    throw std::invalid_argument("grid needs at least two nodes");
  }
  if (g.values.front() != 0.0) {
    throw std::invalid_argument("grid function must vanish at the origin");
  }
  const double eps = g.spacing;
  std::complex<double> sum(0.0, 0.0);
  for (std::size_t n = 1; n < g.values.size(); ++n) {
    if (g.values[n] == 0.0) continue;
    const double phase = -zeta * eps * static_cast<double>(n);
    sum += g.values[n] *
           std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return fourier_cell_factor(zeta, eps) * sum;
}

std::complex<double> fourier_hat_quadrature(const GridFunction& g,
                                            double zeta) {
  if (g.values.size() < 2) {
    throw std::invalid_argument("grid needs at least two nodes");
  }
  const double eps = g.spacing;
  const int sub =
      std::max(1, static_cast<int>(std::ceil(std::abs(zeta) * eps / 2.0)));
  const std::vector<double> no_knots;
  KahanSum re;
  KahanSum im;
  for (std::size_t n = 0; n + 1 < g.values.size(); ++n) {
    const double a = eps * static_cast<double>(n);
    const double b = a + eps;
    const double ga = g.values[n];
    const double gb = g.values[n + 1];
    if (ga == 0.0 && gb == 0.0) continue;
    const auto lin = [&](double x) {
      const double u = (x - a) / eps;
      return ga * (1.0 - u) + gb * u;
    };
    re.add(integrate_gl8([&](double x) { return lin(x) * std::cos(zeta * x); },
                         a, b, no_knots, sub));
    im.add(integrate_gl8(
        [&](double x) { return -lin(x) * std::sin(zeta * x); }, a, b,
        no_knots, sub));
  }
  return {re.value(), im.value()};
}

FourierGrid fourier_hat_grid(const GridFunction& g,
                             std::span<const double> zetas) {
  FourierGrid out;
  out.zeta.assign(zetas.begin(), zetas.end());
  out.value.reserve(zetas.size());
  for (double z : zetas) out.value.push_back(fourier_hat(g, z));
  return out;
}

}  // namespace wallflip
