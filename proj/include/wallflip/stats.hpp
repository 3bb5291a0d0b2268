#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace wallflip {

/// Neumaier compensated accumulator. Used wherever per-replica statistics are
/// reduced, so that totals are insensitive to merge order well below the
/// 1e-12 contract.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MeanStderr {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::size_t n = 0;
};

/// Sample mean and standard error, compensated summation, index order.
MeanStderr mean_stderr(std::span<const double> xs);

struct KsResult {
  double d = 0.0;
  double p_value = 0.0;
  std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov statistic of `samples` against `cdf`, with
/// the asymptotic Kolmogorov p-value under the standard finite-n correction
/// lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * D.
/// The reference cdf must be continuous; tied samples are handled exactly for
/// that case, but an atomic reference would inflate the lower gap (use
/// ks_distance_pmf for lattice laws).
/// Throws std::invalid_argument for fewer than 50 samples or a degenerate
/// (all-equal) sample.
KsResult ks_test(std::vector<double> samples,
                 const std::function<double(double)>& cdf);

/// Exact Kolmogorov distance between the empirical law of integer-valued
/// `samples` and the lattice law with mass pmf[k] at k = 0, 1, .... Both cdfs
/// are step functions on the integers, so the sup is the largest
/// right-continuous gap over integer points. Samples must be nonnegative
/// integers stored as doubles; mass beyond the pmf support counts against a
/// reference cdf of 1. Throws std::invalid_argument on an empty sample, a
/// non-integer or negative value, or a pmf that does not sum to 1 within
/// 1e-9.
double ks_distance_pmf(std::span<const double> samples,
                       std::span<const double> pmf);

/// Survival function of the Kolmogorov distribution, Q(lambda) =
/// 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2), clamped to [0, 1].
double kolmogorov_q(double lambda);

struct SlopeFit {
  double slope = 0.0;
  double stderr_of_slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares slope of log(value) against log(scale) for (scale, value)
/// pairs. Requires at least two points, all strictly positive; throws
/// std::invalid_argument otherwise. The standard error is 0 for two points.
SlopeFit loglog_slope(std::span<const std::pair<double, double>> points);

}  // namespace wallflip
