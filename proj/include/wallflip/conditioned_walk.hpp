#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wallflip/rng.hpp"
#include "wallflip/stats.hpp"
#include "wallflip/test_function.hpp"

namespace wallflip {

/// Transition kernel of the nonnegative walk: from height k step up with
/// probability (k+2)/(2(k+1)) and down with probability k/(2(k+1)).
double walk_up_prob(int k);
double walk_down_prob(int k);

/// Path X_0 = 0, X_1, ..., X_n under the kernel above.
std::vector<std::int32_t> sample_walk_path(int n, RngStream& rng);

/// Plain symmetric simple walk S_0 = 0, ..., S_n (may go negative).
std::vector<std::int32_t> sample_simple_walk(int n, RngStream& rng);

/// Exact marginal law of X_n by forward recursion; p[k] = P(X_n = k).
struct ExactPmf {
  int n = 0;
  std::vector<double> p;
};
ExactPmf exact_pmf(int n);

/// Weight (X_n + 1) 2^{-n} of the cylinder set of one nonnegative path;
/// 0 for a path that leaves the nonnegative half-line.
double doob_weight(std::span<const std::int32_t> path);

/// Exhaustively checks, over every nonnegative unit-step path of length n,
/// that the kernel probability of the path equals weight(path), and that
/// flipping any interior corner (when the flip stays nonnegative) leaves
/// the kernel probability unchanged. Cost O(2^n); n must be at most 20.
bool equal_weight_check(
    int n,
    const std::function<double(std::span<const std::int32_t>)>& weight =
        [](std::span<const std::int32_t> p) { return doob_weight(p); });

/// Two-step-block coupling of the nonnegative walk X with a symmetric
/// simple walk S, both consuming the same block symbols W in
/// {peak, valley, straight} drawn with probabilities 1/4, 1/4, 1/2.
struct CoupledPair {
  std::vector<std::int32_t> x;
  std::vector<std::int32_t> s;
  /// Block symbols, one per two steps: 0 = peak, 1 = valley, 2 = straight.
  std::vector<std::int8_t> w;
};

/// n must be even and at least 2; paths have n+1 entries each.
CoupledPair sample_coupled_pair(int n, RngStream& rng);

/// Counts blocks where the odd-index corner indicators of X and S differ
/// while X was nonzero at the block start. The coupling guarantees zero.
int count_domination_violations(const CoupledPair& pair);

/// (1/N) sum_n 1{X_{n+1} + X_{n-1} - 2 X_n != 0} phi(n/N) over interior n.
double corner_density_statistic(std::span<const std::int32_t> path,
                                const TestFunction& phi, double big_n);

/// (1/N) sum_n 1{X_n = level} phi(n/N).
double occupation_statistic(std::span<const std::int32_t> path, int level,
                            const TestFunction& phi, double big_n);

using PathSampler =
    std::function<std::vector<std::int32_t>(int, RngStream&)>;

struct MomentGrowthResult {
  int order = 0;
  SlopeFit fit;
  /// (length scale, empirical 2k-th moment) pairs fed to the regression.
  std::vector<std::pair<double, double>> points;
  int replicas = 0;
};

/// Log-log regression of the empirical 2k-th moment against n. With
/// increments = true the moment is of X_n - X_{n/2} and the abscissa is
/// n - n/2. The sampler defaults to the nonnegative walk; pass
/// sample_simple_walk for a control with known exponent.
MomentGrowthResult moment_growth_check(std::span<const int> lengths,
                                       int order, int replicas,
                                       std::uint64_t seed,
                                       std::uint64_t stream_base,
                                       bool increments = false,
                                       const PathSampler& sampler = {});

}  // namespace wallflip
