#include "symrl/analysis.hpp"

#include "symrl/regression.hpp"
#include "symrl/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace symrl {

double info_gain(const KernelSpec& spec, std::span<const Vector> points, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument(fmt::format("lambda must be positive, got {}", lambda));
  if (points.empty()) return 0.0;
  const auto n = static_cast<Eigen::Index>(points.size());
  Matrix a = gram(spec, points) / lambda;
  a.diagonal().array() += 1.0;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("info_gain: factorization of I + K / lambda failed");
  }
  double sum = 0.0;
  const Matrix& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < n; ++i) sum += std::log(l(i, i));
  return 2.0 * sum;
}

InfoGainReport greedy_info_gain(const KernelSpec& spec, std::span<const Vector> candidates,
                                std::size_t T, double lambda) {
  if (T > candidates.size()) {
    throw std::invalid_argument(
        fmt::format("greedy_info_gain: T = {} exceeds {} candidates", T, candidates.size()));
  }
  InfoGainReport report;
  report.T = T;
  report.lambda = lambda;
  report.label = spec.label();

  // Posterior variance with noise lambda; the log-det increment of a pick is
  // log(1 + sigma^2 / lambda).
  Posterior post(spec, lambda);
  ProbeCache cache;
  for (const auto& z : candidates) cache.add(z);
  for (std::size_t step = 0; step < T; ++step) {
    cache.sync(post);
    std::size_t best = 0;
    double best_var = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double sd = cache.stddev(i, post);
      if (sd * sd > best_var) {
        best_var = sd * sd;
        best = i;
      }
    }
    const double inc = std::log1p(best_var / lambda);
    report.increments.push_back(inc);
    report.picks.push_back(best);
    report.gamma += inc;
    post.append(candidates[best], 0.0);
  }
  return report;
}

std::vector<double> gram_eigen_decay(const KernelSpec& spec, std::span<const Vector> samples) {
  if (samples.size() < 2) throw std::invalid_argument("gram_eigen_decay: need at least two samples");
  const Matrix k = gram(spec, samples) / static_cast<double>(samples.size());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(k, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("gram_eigen_decay: eigensolver failed");
  std::vector<double> values(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + solver.eigenvalues().size());
  for (double& v : values) {
    if (v < 1e-12) v = 0.0;
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

std::vector<Vector> uniform_points(std::size_t n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vector> out(n, Vector(d));
  for (auto& z : out) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = u(rng);
  }
  return out;
}

}  // namespace symrl
