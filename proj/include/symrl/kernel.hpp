#pragma once

// Isotropic base kernels and their group-averaged invariant versions.

#include "symrl/group.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace symrl {

enum class KernelFamily { rbf, matern_1_5, matern_2_5 };

/// Accepts `rbf`, `matern_1_5` and `matern_2_5`.
KernelFamily parse_kernel_family(std::string_view name);
std::string_view to_string(KernelFamily family) noexcept;

class KernelSpec {
 public:
  KernelSpec(KernelFamily family, double lengthscale,
             std::optional<FiniteGroup> symmetrization = std::nullopt);

  KernelFamily family() const noexcept { return family_; }
  double lengthscale() const noexcept { return lengthscale_; }
  const std::optional<FiniteGroup>& symmetrization() const noexcept { return group_; }
  std::size_t group_size() const noexcept { return group_ ? group_->size() : 1; }

  /// e.g. "rbf(l=0.5)" or "rbf(l=0.5)/d4:7".
  std::string label() const;

  /// Base kernel as a function of the squared Euclidean distance.
  double base_from_sqdist(double r2) const noexcept;
  double base(std::span<const double> a, std::span<const double> b) const noexcept;

  /// The |G| images g x stacked contiguously (|G| * dim values). Without a
  /// symmetrization this is x itself.
  std::vector<double> images(const Vector& x) const;

  /// k_G(x, z) = 1/|G| sum_g k(g x, z), given images(x).
  double eval_images(std::span<const double> images_x, std::span<const double> z) const noexcept;

 private:
  KernelFamily family_;
  double lengthscale_;
  std::optional<FiniteGroup> group_;
};

/// k_G(z, z'); the base kernel when no symmetrization is set.
/// Throws std::invalid_argument when dimensions disagree.
double eval(const KernelSpec& spec, const Vector& z, const Vector& zp);

/// Gram matrix [k(z_i, z_j)], rows assembled in parallel. The lower triangle
/// is computed and mirrored, so the result is exactly symmetric.
Matrix gram(const KernelSpec& spec, std::span<const Vector> points);

/// Single-threaded reference for gram().
Matrix gram_serial(const KernelSpec& spec, std::span<const Vector> points);

}  // namespace symrl
