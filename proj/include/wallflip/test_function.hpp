#pragma once

#include <functional>
#include <span>
#include <vector>

namespace wallflip {

/// Smooth compactly supported weight function on [0, inf) with exact
/// derivatives through third order. Two families:
///   bump(c, w):  (1 - u^2)^4 with u = (x-c)/w, support [c-w, c+w]
///   plateau(a0, a1, a2, a3): septic-smoothstep rise on [a0, a1], 1 on
///     [a1, a2], mirrored fall on [a2, a3]
/// Both are C^3, piecewise polynomial, and vanish (with three derivatives)
/// at the support edges, so inner products against them integrate exactly
/// with Gauss-Legendre panels split at the knots.
class TestFunction {
 public:
  double operator()(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  double d3(double x) const;

  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  bool zero_at_origin() const { return (*this)(0.0) == 0.0; }

  /// Breakpoints of the piecewise-polynomial representation (includes the
  /// support edges).
  const std::vector<double>& knots() const { return knots_; }

  double integral() const { return integral_; }
  double l2sq() const { return l2sq_; }

  /// max |d^order phi / dx^order| scanned on a fine grid over the support.
  double sup_abs(int order) const;

  static TestFunction bump(double center, double halfwidth);
  static TestFunction plateau(double a0, double a1, double a2, double a3);

 private:
  enum class Family { Bump, Plateau };
  TestFunction() = default;
  double piece(double x, int order) const;

  Family fam_ = Family::Bump;
  double p_[4] = {0, 0, 0, 0};
  double lo_ = 0.0, hi_ = 0.0;
  double integral_ = 0.0, l2sq_ = 0.0;
  std::vector<double> knots_;
};

/// Composite 8-point Gauss-Legendre quadrature of f on [a, b]. Panels are
/// split at the supplied breakpoints and each segment is subdivided `subdiv`
/// times; exact for piecewise polynomials of degree <= 15 on the segments.
double integrate_gl8(const std::function<double(double)>& f, double a,
                     double b, std::span<const double> breakpoints,
                     int subdiv = 1);

}  // namespace wallflip
