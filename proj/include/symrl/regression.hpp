#pragma once

// Kernel ridge regression posterior with an incrementally grown Cholesky
// factor of (K_t + lambda I).

#include "symrl/kernel.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace symrl {

/// Raised when a Cholesky pivot is not strictly positive.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(std::size_t pivot, double value);
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class Posterior {
 public:
  Posterior(KernelSpec spec, double lambda);

  const KernelSpec& spec() const noexcept { return spec_; }
  double lambda() const noexcept { return lambda_; }
  std::size_t size() const noexcept { return inputs_.size(); }
  std::span<const Vector> inputs() const noexcept { return inputs_; }
  std::span<const double> targets() const noexcept { return targets_; }

  /// Process-unique id of the current factor, renewed whenever the factor is
  /// rebuilt rather than extended; cached whitened vectors from another
  /// generation are stale.
  std::uint64_t generation() const noexcept { return generation_; }

  /// Extends the factor by one row: forward substitution against the
  /// existing factor plus one square root, O(t^2). Leaves the posterior
  /// unchanged and throws FactorizationError if the new pivot is not positive.
  void append(const Vector& z, double y);

  /// Replaces the target vector (inputs unchanged); O(t^2).
  void set_targets(std::vector<double> y);

  /// Rebuilds the factor from a freshly assembled Gram matrix.
  void refit();

  double mean(const Vector& z) const;
  double stddev(const Vector& z) const;

  /// k(z, z) under the posterior's kernel.
  double prior_variance(const Vector& z) const;

  /// L^{-1} k_t(z).
  std::vector<double> whiten(const Vector& z) const;

  /// Extends `v` = L^{-1} k_m(z) (first m entries) to the full t entries.
  void extend_whitened(std::span<const double> z, std::vector<double>& v) const;

  /// Mean and standard deviation from a whitened kernel vector.
  double mean_from_whitened(std::span<const double> v) const noexcept;
  double stddev_from_whitened(std::span<const double> v, double prior) const noexcept;

  /// Row i of the lower-triangular factor (i + 1 entries).
  std::span<const double> factor_row(std::size_t i) const noexcept {
    return {chol_.data() + i * (i + 1) / 2, i + 1};
  }
  /// The dense lower-triangular factor; intended for tests and diagnostics.
  Matrix factor() const;

  friend Posterior fit(KernelSpec spec, std::span<const Vector> inputs,
                       std::span<const double> targets, double lambda);

 private:
  void forward_solve(std::span<const double> b, std::vector<double>& x, std::size_t from) const;
  void check_dim(std::size_t d) const;

  KernelSpec spec_;
  double lambda_;
  std::vector<Vector> inputs_;
  std::vector<std::vector<double>> input_images_;
  std::vector<double> targets_;
  std::vector<double> chol_;              // packed rows of L
  std::vector<double> whitened_targets_;  // L^{-1} y
  std::uint64_t generation_;
};

/// Full factorization of gram(inputs) + lambda I. Throws
/// std::invalid_argument for lambda <= 0 or mismatched lengths, and
/// FactorizationError with the failing pivot index.
Posterior fit(KernelSpec spec, std::span<const Vector> inputs, std::span<const double> targets,
              double lambda);

/// Query points whose whitened kernel vectors are kept in step with one
/// Posterior, so each appended input costs O(t) per probe instead of a fresh
/// O(t^2) solve.
class ProbeCache {
 public:
  /// Adds `z` unless an identical vector is present; returns its index.
  std::size_t add(const Vector& z);
  std::size_t size() const noexcept { return probes_.size(); }
  const Vector& point(std::size_t i) const { return probes_[i].z; }

  /// Brings every probe up to date with `posterior`; probes are processed in
  /// parallel.
  void sync(const Posterior& posterior);
  /// Single-threaded reference for sync().
  void sync_serial(const Posterior& posterior);

  /// Requires a preceding sync against the same posterior.
  double mean(std::size_t i, const Posterior& posterior) const;
  double stddev(std::size_t i, const Posterior& posterior) const;

  void clear();

 private:
  struct Probe {
    Vector z;
    double prior = 0.0;
    bool has_prior = false;
    std::vector<double> whitened;
  };
  void prepare(const Posterior& posterior);
  const Probe& checked(std::size_t i, const Posterior& posterior) const;

  std::vector<Probe> probes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t generation_ = 0;
};

/// Byte key for exact vector identity, with -0.0 folded into +0.0.
std::string vector_key(const Vector& z);

}  // namespace symrl
