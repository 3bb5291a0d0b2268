#include "wallflip/conditioned_walk.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "wallflip/interface_dynamics.hpp"

namespace wallflip {

double walk_up_prob(int k) {
  if (k < 0) throw std::invalid_argument("height must be nonnegative");
  return (k + 2.0) / (2.0 * (k + 1.0));
}

double walk_down_prob(int k) {
  if (k < 0) throw std::invalid_argument("height must be nonnegative");
  return k / (2.0 * (k + 1.0));
}

std::vector<std::int32_t> sample_walk_path(int n, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("path length must be nonnegative");
  std::vector<std::int32_t> x(n + 1);
  x[0] = 0;
  for (int i = 0; i < n; ++i) {
    const bool up = rng.uniform01() < walk_up_prob(x[i]);
    x[i + 1] = x[i] + (up ? 1 : -1);
  }
  return x;
}

std::vector<std::int32_t> sample_simple_walk(int n, RngStream& rng) {
  if (n < 0) throw std::invalid_argument("path length must be nonnegative");
  std::vector<std::int32_t> s(n + 1);
  s[0] = 0;
  for (int i = 0; i < n; ++i) {
    s[i + 1] = s[i] + (rng.uniform01() < 0.5 ? 1 : -1);
  }
  return s;
}

ExactPmf exact_pmf(int n) {
  if (n < 0 || n > 10000) {
    throw std::invalid_argument("pmf length out of range");
  }
  std::vector<double> p(n + 1, 0.0);
  p[0] = 1.0;
  for (int step = 0; step < n; ++step) {
    std::vector<double> q(n + 1, 0.0);
    for (int k = 0; k <= step; ++k) {
      if (p[k] == 0.0) continue;
      q[k + 1] += p[k] * walk_up_prob(k);
      if (k > 0) q[k - 1] += p[k] * walk_down_prob(k);
    }
    p.swap(q);
  }
  return ExactPmf{n, std::move(p)};
}

double doob_weight(std::span<const std::int32_t> path) {
  for (std::int32_t v : path) {
    if (v < 0) return 0.0;
  }
  const int n = static_cast<int>(path.size()) - 1;
  return (path[n] + 1.0) * std::ldexp(1.0, -n);
}

namespace {

double kernel_path_prob(std::span<const std::int32_t> path) {
  double prob = 1.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    prob *= path[i + 1] > path[i] ? walk_up_prob(path[i])
                                  : walk_down_prob(path[i]);
  }
  return prob;
}

}  // namespace

bool equal_weight_check(
    int n,
    const std::function<double(std::span<const std::int32_t>)>& weight) {
  if (n < 1 || n > 20) throw std::invalid_argument("length must be in 1..20");
  constexpr double kTol = 1e-12;
  std::vector<std::int32_t> path(n + 1);
  std::vector<std::int32_t> flipped(n + 1);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    path[0] = 0;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      path[i + 1] = path[i] + ((mask >> i) & 1u ? 1 : -1);
      if (path[i + 1] < 0) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    const double prob = kernel_path_prob(path);
    if (std::abs(prob - weight(path)) > kTol) return false;
    for (int i = 1; i < n; ++i) {
      const int lap = path[i + 1] + path[i - 1] - 2 * path[i];
      if (lap == 0 || path[i] + lap < 0) continue;
      flipped = path;
      flipped[i] += lap;
      if (std::abs(kernel_path_prob(flipped) - prob) > kTol) return false;
    }
  }
  return true;
}

CoupledPair sample_coupled_pair(int n, RngStream& rng) {
  if (n < 2 || n % 2 != 0) {
    throw std::invalid_argument("length must be even and at least 2");
  }
  const int blocks = n / 2;
  CoupledPair out;
  out.x.resize(n + 1);
  out.s.resize(n + 1);
  out.w.resize(blocks);
  out.x[0] = 0;
  out.s[0] = 0;
  for (int b = 0; b < blocks; ++b) {
    const double uw = rng.uniform01();
    const std::int8_t w = uw < 0.25 ? 0 : (uw < 0.5 ? 1 : 2);
    out.w[b] = w;
    const double ub = rng.uniform01();
    const std::int32_t k = out.x[2 * b];
    const std::int32_t s = out.s[2 * b];

    if (w == 0) {
      out.x[2 * b + 1] = k + 1;
      out.x[2 * b + 2] = k;
    } else if (k == 0) {
      out.x[2 * b + 1] = 1;
      out.x[2 * b + 2] = 2;
    } else if (w == 1) {
      out.x[2 * b + 1] = k - 1;
      out.x[2 * b + 2] = k;
    } else {
      const double q = (k + 3.0) / (2.0 * (k + 1.0));
      if (ub < q) {
        out.x[2 * b + 1] = k + 1;
        out.x[2 * b + 2] = k + 2;
      } else {
        out.x[2 * b + 1] = k - 1;
        out.x[2 * b + 2] = k - 2;
      }
    }

    if (w == 0) {
      out.s[2 * b + 1] = s + 1;
      out.s[2 * b + 2] = s;
    } else if (w == 1) {
      out.s[2 * b + 1] = s - 1;
      out.s[2 * b + 2] = s;
    } else if (ub < 0.5) {
      out.s[2 * b + 1] = s + 1;
      out.s[2 * b + 2] = s + 2;
    } else {
      out.s[2 * b + 1] = s - 1;
      out.s[2 * b + 2] = s - 2;
    }
  }
  return out;
}

int count_domination_violations(const CoupledPair& pair) {
  const int blocks = static_cast<int>(pair.w.size());
  int violations = 0;
  for (int b = 0; b < blocks; ++b) {
    if (pair.x[2 * b] == 0) continue;
    const bool cx =
        pair.x[2 * b + 2] + pair.x[2 * b] - 2 * pair.x[2 * b + 1] != 0;
    const bool cs =
        pair.s[2 * b + 2] + pair.s[2 * b] - 2 * pair.s[2 * b + 1] != 0;
    if (cx != cs) ++violations;
  }
  return violations;
}

double corner_density_statistic(std::span<const std::int32_t> path,
                                const TestFunction& phi, double big_n) {
  const int len = static_cast<int>(path.size());
  if (phi.support_hi() * big_n > len - 2) {
    throw std::invalid_argument("path too short for requested scale");
  }
  KahanSum sum;
  for (int n = 1; n + 1 < len; ++n) {
    if (path[n + 1] + path[n - 1] - 2 * path[n] != 0) {
      sum.add(phi(n / big_n));
    }
  }
  return sum.value() / big_n;
}

double occupation_statistic(std::span<const std::int32_t> path, int level,
                            const TestFunction& phi, double big_n) {
  const int len = static_cast<int>(path.size());
  if (phi.support_hi() * big_n > len - 1) {
    throw std::invalid_argument("path too short for requested scale");
  }
  KahanSum sum;
  for (int n = 0; n < len; ++n) {
    if (path[n] == level) sum.add(phi(n / big_n));
  }
  return sum.value() / big_n;
}

MomentGrowthResult moment_growth_check(std::span<const int> lengths,
                                       int order, int replicas,
                                       std::uint64_t seed,
                                       std::uint64_t stream_base,
                                       bool increments,
                                       const PathSampler& sampler) {
  if (lengths.size() < 2) {
    throw std::invalid_argument("need at least two length scales");
  }
  if (replicas < 2) throw std::invalid_argument("need at least two replicas");
  const PathSampler& draw =
      sampler ? sampler : PathSampler(sample_walk_path);
  MomentGrowthResult out;
  out.order = order;
  out.replicas = replicas;
  for (std::size_t li = 0; li < lengths.size(); ++li) {
    const int n = lengths[li];
    const int m = increments ? n / 2 : 0;
    KahanSum acc;
    for (int r = 0; r < replicas; ++r) {
      RngStream rng(seed, stream_base + li * replicas + r);
      const std::vector<std::int32_t> path = draw(n, rng);
      const double diff = path[n] - path[m];
      acc.add(std::pow(diff * diff, order));
    }
    out.points.emplace_back(static_cast<double>(n - m),
                            acc.value() / replicas);
  }
  out.fit = loglog_slope(out.points);
  return out;
}

InterfaceState stationary_initial_state(int L, RngStream& rng) {
  if (L < 1) throw std::invalid_argument("need at least one active site");
  return InterfaceState{sample_walk_path(L + 1, rng)};
}

}  // namespace wallflip
