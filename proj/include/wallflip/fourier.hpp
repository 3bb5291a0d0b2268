#pragma once

#include <complex>
#include <span>
#include <vector>

#include "wallflip/observables.hpp"

namespace wallflip {

/// Cell factor c = (2 / (eps zeta^2)) (1 - cos(zeta eps)), the transform of
/// the linear-interpolation hat divided by the phase. Equals
/// eps sinc^2(zeta eps / 2); always in [0, eps], with c -> eps as zeta -> 0.
double fourier_cell_factor(double zeta, double eps);

/// Transform of the piecewise-linear interpolation of g via the exact
/// lattice-sum identity ghat(zeta) = c * sum_n e^{-i zeta eps n} g(eps n).
/// Requires g(0) = 0 (the pinned boundary); the grid stands in for a
/// whole-line function, so the last value should be negligible too.
std::complex<double> fourier_hat(const GridFunction& g, double zeta);

/// Independent oracle: direct oscillatory quadrature of
/// int g(x) e^{-i zeta x} dx over the grid support.
std::complex<double> fourier_hat_quadrature(const GridFunction& g,
                                            double zeta);

struct FourierGrid {
  std::vector<double> zeta;
  std::vector<std::complex<double>> value;
};

FourierGrid fourier_hat_grid(const GridFunction& g,
                             std::span<const double> zetas);

}  // namespace wallflip
