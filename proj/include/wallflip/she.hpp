#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "wallflip/rng.hpp"
#include "wallflip/test_function.hpp"

namespace wallflip {

/// Discretization of the reflected stochastic heat equation on [0, x_max]:
/// explicit Euler in time, centered Laplacian in space, Dirichlet pinning
/// at 0, mirror (Neumann) boundary at x_max, post-step projection onto the
/// nonnegative cone with the projected deficit booked as reflection mass.
struct SheGrid {
  double dx = 0.01;
  double dt = 2.5e-5;
  double x_max = 4.0;

  int nodes() const { return static_cast<int>(std::round(x_max / dx)) + 1; }
  void validate() const;
};

/// Norm of a 3-component Brownian path sampled on the grid nodes
/// (independent N(0, dx) increments per component); value 0 at x = 0.
std::vector<double> sample_bessel3_path(const SheGrid& grid, RngStream& rng);

/// CDF of |N(0, x I_3)| at level r:
/// erf(r / sqrt(2x)) - sqrt(2/pi) (r / sqrt(x)) exp(-r^2 / (2x)).
double bessel3_marginal_cdf(double x, double r);

struct SheState {
  std::vector<double> u;
  std::vector<double> eta_cell;
  double time = 0.0;
  std::int64_t steps = 0;
};

/// One explicit step with reflection bookkeeping. Throws on blowup.
void she_step(SheState& state, const SheGrid& grid, RngStream& rng);

/// Weak-form ledger for one test function over a run: every term of the
/// discrete pairing identity accumulated independently.
struct SheWeakForm {
  double pairing_initial = 0.0;
  double pairing_final = 0.0;
  double drift_sum = 0.0;
  double noise_sum = 0.0;
  double eta_sum = 0.0;

  double residual() const {
    return pairing_final - pairing_initial - drift_sum - noise_sum - eta_sum;
  }
  double scale() const;
};

struct SheRunResult {
  SheState state;
  /// Largest per-step value of sum_i u_post(i) * deficit(i); the projection
  /// makes it exactly zero.
  double max_support_defect = 0.0;
  std::vector<SheWeakForm> weak;
};

/// Runs until state.time >= horizon (whole steps). The observer functions
/// must vanish at the origin. Without observers the loop skips all pairing
/// work.
SheRunResult she_run(std::vector<double> u0, double horizon,
                     const SheGrid& grid, RngStream& rng,
                     std::span<const TestFunction> observers = {});

/// Piecewise-linear evaluation of a nodal field.
double field_value(const std::vector<double>& u, const SheGrid& grid,
                   double x);

}  // namespace wallflip
