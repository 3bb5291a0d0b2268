#include "wallflip/stats.hpp"

#include <algorithm>
#include <stdexcept>

namespace wallflip {

MeanStderr mean_stderr(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean_stderr: empty sample");
  KahanSum s;
  for (double x : xs) s.add(x);
  const double mean = s.value() / static_cast<double>(xs.size());
  if (xs.size() == 1) return {mean, 0.0, 1};
  KahanSum sq;
  for (double x : xs) sq.add((x - mean) * (x - mean));
  const double var = sq.value() / static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(xs.size())), xs.size()};
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double q = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
    q += (j % 2 == 1) ? term : -term;
    if (term < 1e-14) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples,
                 const std::function<double(double)>& cdf) {
  const std::size_t n = samples.size();
  if (n < 50) throw std::invalid_argument("ks_test: need at least 50 samples");
  std::sort(samples.begin(), samples.end());
  if (samples.front() == samples.back())
    throw std::invalid_argument("ks_test: degenerate sample (all values equal)");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(samples[i]);
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n) - f;
    const double lo = f - static_cast<double>(i) / static_cast<double>(n);
    d = std::max({d, hi, lo});
  }
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  return {d, kolmogorov_q(lambda), n};
}

double ks_distance_pmf(std::span<const double> samples,
                       std::span<const double> pmf) {
  if (samples.empty())
    throw std::invalid_argument("ks_distance_pmf: empty sample");
  std::size_t hi = pmf.size();
  std::vector<std::size_t> counts(pmf.size(), 0);
  for (double v : samples) {
    const double r = std::round(v);
    if (!(v >= 0.0) || std::abs(v - r) > 1e-9)
      throw std::invalid_argument(
          "ks_distance_pmf: sample is not a nonnegative integer");
    const auto k = static_cast<std::size_t>(r);
    if (k >= counts.size()) counts.resize(k + 1, 0);
    counts[k]++;
    hi = std::max(hi, k + 1);
  }
  KahanSum mass;
  for (double p : pmf) mass.add(p);
  if (std::abs(mass.value() - 1.0) > 1e-9)
    throw std::invalid_argument("ks_distance_pmf: pmf does not sum to 1");
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  double emp = 0.0;
  KahanSum ref;
  for (std::size_t k = 0; k < hi; ++k) {
    if (k < counts.size()) emp += static_cast<double>(counts[k]) / n;
    if (k < pmf.size()) ref.add(pmf[k]);
    d = std::max(d, std::abs(emp - std::min(ref.value(), 1.0)));
  }
  return d;
}

SlopeFit loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2)
    throw std::invalid_argument("loglog_slope: need at least two points");
  std::vector<double> lx, ly;
  lx.reserve(points.size());
  ly.reserve(points.size());
  for (const auto& [s, v] : points) {
    if (s <= 0.0 || v <= 0.0)
      throw std::invalid_argument("loglog_slope: nonpositive value");
    lx.push_back(std::log(s));
    ly.push_back(std::log(v));
  }
  const auto n = static_cast<double>(points.size());
  KahanSum sx, sy;
  for (double x : lx) sx.add(x);
  for (double y : ly) sy.add(y);
  const double mx = sx.value() / n, my = sy.value() / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0)
    throw std::invalid_argument("loglog_slope: all scales equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = ly[i] - (intercept + slope * lx[i]);
    rss += r * r;
  }
  const double se =
      points.size() > 2
          ? std::sqrt(rss / (n - 2.0) / sxx)
          : 0.0;
  return {slope, se, intercept};
}

}  // namespace wallflip
