#pragma once

// Information gain and Gram spectrum diagnostics for base and invariant
// kernels.

#include "symrl/kernel.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace symrl {

/// log det(I + K / lambda) over the points, via a Cholesky factor (twice
/// the sum of log pivots). Throws std::invalid_argument for lambda <= 0 and
/// std::runtime_error if the factorization breaks down.
double info_gain(const KernelSpec& spec, std::span<const Vector> points, double lambda);

struct InfoGainReport {
  std::size_t T = 0;
  double lambda = 0.0;
  double gamma = 0.0;                // greedy estimate of the maximum information gain
  std::vector<double> increments;    // log(1 + sigma^2 / lambda) per pick
  std::vector<std::size_t> picks;    // candidate indices in selection order
  std::string label;
};

/// Picks, T times, the candidate with the largest posterior variance under
/// noise lambda (lowest index on ties). Requires T <= candidates.size().
InfoGainReport greedy_info_gain(const KernelSpec& spec, std::span<const Vector> candidates,
                                std::size_t T, double lambda);

/// Eigenvalues of gram / n in descending order; values below 1e-12 are
/// reported as 0. Requires at least two samples.
std::vector<double> gram_eigen_decay(const KernelSpec& spec, std::span<const Vector> samples);

/// `n` points uniform on [-1, 1]^d from the given generator seed.
std::vector<Vector> uniform_points(std::size_t n, Eigen::Index d, std::uint64_t seed);

}  // namespace symrl
