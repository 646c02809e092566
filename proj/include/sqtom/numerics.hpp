#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace sqtom {

inline constexpr double kPi = 3.14159265358979323846;

// Quadrature rule for expectations against a standard normal density:
//   E[f(Z)] ~= sum_i weight[i] * f(node[i]),   Z ~ N(0,1).
// Nodes are ascending and symmetric about 0; weights sum to 1.
struct GaussianQuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Cached Gauss-Hermite rule with n raw nodes, rescaled to the standard
// normal weight. Nodes whose normalized weight is below 1e-18 are dropped
// (they cannot move a result by more than ~1e-16) and the remaining weights
// renormalized, so rule(n).nodes.size() may be smaller than n.
// Thread-safe; the returned reference stays valid for the process lifetime.
const GaussianQuadratureRule& gauss_hermite(int n);

// Standard normal CDF, relative accuracy ~1e-14 (erfc-based; stable in the
// far tails, underflows gracefully instead of losing precision).
double normal_cdf(double z);

double normal_pdf(double z);

// Runs fn(begin, end) over a partition of [0, n) on up to `threads` threads
// (0 = hardware concurrency). Blocks until all work is done. Each index is
// handled exactly once, so writes to disjoint per-index slots are race-free
// and the result is independent of the partitioning.
void parallel_for_blocks(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace sqtom
