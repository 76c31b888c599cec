#include "symrl/kernel.hpp"

#include <fmt/format.h>

#include <cmath>
#include <stdexcept>

namespace symrl {

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "rbf") return KernelFamily::rbf;
  if (name == "matern_1_5") return KernelFamily::matern_1_5;
  if (name == "matern_2_5") return KernelFamily::matern_2_5;
  throw std::invalid_argument(fmt::format(
      "unsupported kernel family '{}' (expected rbf, matern_1_5 or matern_2_5)", name));
}

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::rbf: return "rbf";
    case KernelFamily::matern_1_5: return "matern_1_5";
    case KernelFamily::matern_2_5: return "matern_2_5";
  }
  return "?";
}

KernelSpec::KernelSpec(KernelFamily family, double lengthscale,
                       std::optional<FiniteGroup> symmetrization)
    : family_(family), lengthscale_(lengthscale), group_(std::move(symmetrization)) {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw std::invalid_argument(fmt::format("lengthscale must be positive, got {}", lengthscale));
  }
}

std::string KernelSpec::label() const {
  std::string out = fmt::format("{}(l={})", to_string(family_), lengthscale_);
  if (group_) out += "/" + group_->name();
  return out;
}

double KernelSpec::base_from_sqdist(double r2) const noexcept {
  switch (family_) {
    case KernelFamily::rbf:
      return std::exp(-r2 / (2.0 * lengthscale_ * lengthscale_));
    case KernelFamily::matern_1_5: {
      const double u = std::sqrt(3.0 * r2) / lengthscale_;
      return (1.0 + u) * std::exp(-u);
    }
    case KernelFamily::matern_2_5: {
      const double u = std::sqrt(5.0 * r2) / lengthscale_;
      return (1.0 + u + u * u / 3.0) * std::exp(-u);
    }
  }
  return 0.0;
}

double KernelSpec::base(std::span<const double> a, std::span<const double> b) const noexcept {
  double r2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    r2 += diff * diff;
  }
  return base_from_sqdist(r2);
}

std::vector<double> KernelSpec::images(const Vector& x) const {
  if (!group_) return {x.data(), x.data() + x.size()};
  if (group_->dim() != x.size()) {
    throw std::invalid_argument(fmt::format(
        "symmetrization group '{}' acts on R^{} but the input has dimension {}", group_->name(),
        group_->dim(), x.size()));
  }
  std::vector<double> out(group_->size() * static_cast<std::size_t>(x.size()));
  for (std::size_t g = 0; g < group_->size(); ++g) {
    Eigen::Map<Vector>(out.data() + g * x.size(), x.size()) = (*group_)[g].matrix() * x;
  }
  return out;
}

double KernelSpec::eval_images(std::span<const double> images_x,
                               std::span<const double> z) const noexcept {
  const std::size_t d = z.size();
  const std::size_t count = images_x.size() / d;
  double sum = 0.0;
  for (std::size_t g = 0; g < count; ++g) sum += base(images_x.subspan(g * d, d), z);
  return count == 1 ? sum : sum / static_cast<double>(count);
}

double eval(const KernelSpec& spec, const Vector& z, const Vector& zp) {
  if (z.size() != zp.size()) {
    throw std::invalid_argument(
        fmt::format("kernel inputs differ in dimension ({} vs {})", z.size(), zp.size()));
  }
  const auto imgs = spec.images(z);
  return spec.eval_images(imgs, {zp.data(), static_cast<std::size_t>(zp.size())});
}

namespace {

void check_points(const KernelSpec& spec, std::span<const Vector> points) {
  for (const auto& p : points) {
    if (p.size() != points.front().size()) {
      throw std::invalid_argument("gram: points have inconsistent dimensions");
    }
  }
  if (!points.empty() && spec.symmetrization() &&
      spec.symmetrization()->dim() != points.front().size()) {
    throw std::invalid_argument("gram: group dimension does not match the points");
  }
}

void fill_row(const KernelSpec& spec, std::span<const Vector> points, Eigen::Index i, Matrix& k) {
  const auto imgs = spec.images(points[i]);
  for (Eigen::Index j = 0; j <= i; ++j) {
    k(i, j) = spec.eval_images(imgs, {points[j].data(), static_cast<std::size_t>(points[j].size())});
  }
}

void mirror_lower(Matrix& k) {
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < k.cols(); ++j) k(i, j) = k(j, i);
  }
}

}  // namespace

Matrix gram(const KernelSpec& spec, std::span<const Vector> points) {
  check_points(spec, points);
  const auto n = static_cast<Eigen::Index>(points.size());
  Matrix k(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) fill_row(spec, points, i, k);
  mirror_lower(k);
  return k;
}

Matrix gram_serial(const KernelSpec& spec, std::span<const Vector> points) {
  check_points(spec, points);
  const auto n = static_cast<Eigen::Index>(points.size());
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) fill_row(spec, points, i, k);
  mirror_lower(k);
  return k;
}

}  // namespace symrl
