#include "symrl/regression.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>

namespace symrl {

namespace {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

std::span<const double> as_span(const Vector& z) {
  return {z.data(), static_cast<std::size_t>(z.size())};
}

std::uint64_t next_generation() noexcept {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

}  // namespace

FactorizationError::FactorizationError(std::size_t pivot, double value)
    : std::runtime_error(fmt::format(
          "Cholesky factorization failed at pivot {} (squared pivot {:.3g})", pivot, value)),
      pivot_(pivot) {}

Posterior::Posterior(KernelSpec spec, double lambda)
    : spec_(std::move(spec)), lambda_(lambda), generation_(next_generation()) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument(fmt::format("lambda must be positive, got {}", lambda));
  }
}

void Posterior::check_dim(std::size_t d) const {
  if (!inputs_.empty() && static_cast<std::size_t>(inputs_.front().size()) != d) {
    throw std::invalid_argument(fmt::format(
        "posterior inputs have dimension {}, query has {}", inputs_.front().size(), d));
  }
}

void Posterior::forward_solve(std::span<const double> b, std::vector<double>& x,
                              std::size_t from) const {
  x.resize(b.size());
  for (std::size_t i = from; i < b.size(); ++i) {
    const double* row = chol_.data() + i * (i + 1) / 2;
    x[i] = (b[i] - dot(row, x.data(), i)) / row[i];
  }
}

void Posterior::extend_whitened(std::span<const double> z, std::vector<double>& v) const {
  const std::size_t t = inputs_.size();
  const std::size_t m = v.size();
  v.resize(t);
  for (std::size_t i = m; i < t; ++i) {
    const double k = spec_.eval_images(input_images_[i], z);
    const double* row = chol_.data() + i * (i + 1) / 2;
    v[i] = (k - dot(row, v.data(), i)) / row[i];
  }
}

std::vector<double> Posterior::whiten(const Vector& z) const {
  check_dim(static_cast<std::size_t>(z.size()));
  std::vector<double> v;
  extend_whitened(as_span(z), v);
  return v;
}

double Posterior::prior_variance(const Vector& z) const { return eval(spec_, z, z); }

double Posterior::mean_from_whitened(std::span<const double> v) const noexcept {
  return dot(v.data(), whitened_targets_.data(), v.size());
}

double Posterior::stddev_from_whitened(std::span<const double> v, double prior) const noexcept {
  const double var = prior - dot(v.data(), v.data(), v.size());
  return std::sqrt(std::max(var, 0.0));
}

double Posterior::mean(const Vector& z) const {
  if (inputs_.empty()) return 0.0;
  return mean_from_whitened(whiten(z));
}

double Posterior::stddev(const Vector& z) const {
  if (inputs_.empty()) return std::sqrt(std::max(prior_variance(z), 0.0));
  return stddev_from_whitened(whiten(z), prior_variance(z));
}

void Posterior::append(const Vector& z, double y) {
  check_dim(static_cast<std::size_t>(z.size()));
  std::vector<double> l;
  extend_whitened(as_span(z), l);
  const double prior = prior_variance(z);
  const double pivot2 = prior + lambda_ - dot(l.data(), l.data(), l.size());
  if (!(pivot2 > 0.0)) throw FactorizationError(inputs_.size(), pivot2);
  const double pivot = std::sqrt(pivot2);

  auto images = spec_.images(z);
  const double w = (y - dot(l.data(), whitened_targets_.data(), l.size())) / pivot;

  chol_.insert(chol_.end(), l.begin(), l.end());
  chol_.push_back(pivot);
  inputs_.push_back(z);
  input_images_.push_back(std::move(images));
  targets_.push_back(y);
  whitened_targets_.push_back(w);
}

void Posterior::set_targets(std::vector<double> y) {
  if (y.size() != inputs_.size()) {
    throw std::invalid_argument(
        fmt::format("expected {} targets, got {}", inputs_.size(), y.size()));
  }
  targets_ = std::move(y);
  forward_solve(targets_, whitened_targets_, 0);
}

void Posterior::refit() {
  const Matrix k = gram(spec_, inputs_);
  const std::size_t t = inputs_.size();
  std::vector<double> chol(t * (t + 1) / 2);
  // Left-looking column Cholesky of K + lambda I into packed rows.
  for (std::size_t j = 0; j < t; ++j) {
    double* rowj = chol.data() + j * (j + 1) / 2;
    const double pivot2 = k(j, j) + lambda_ - dot(rowj, rowj, j);
    if (!(pivot2 > 0.0)) throw FactorizationError(j, pivot2);
    rowj[j] = std::sqrt(pivot2);
    for (std::size_t i = j + 1; i < t; ++i) {
      double* rowi = chol.data() + i * (i + 1) / 2;
      rowi[j] = (k(i, j) - dot(rowi, rowj, j)) / rowj[j];
    }
  }
  chol_ = std::move(chol);
  forward_solve(targets_, whitened_targets_, 0);
  generation_ = next_generation();
}

Matrix Posterior::factor() const {
  const auto t = static_cast<Eigen::Index>(inputs_.size());
  Matrix l = Matrix::Zero(t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    auto row = factor_row(static_cast<std::size_t>(i));
    for (Eigen::Index j = 0; j <= i; ++j) l(i, j) = row[static_cast<std::size_t>(j)];
  }
  return l;
}

Posterior fit(KernelSpec spec, std::span<const Vector> inputs, std::span<const double> targets,
              double lambda) {
  if (inputs.size() != targets.size()) {
    throw std::invalid_argument(fmt::format("fit: {} inputs but {} targets", inputs.size(),
                                            targets.size()));
  }
  Posterior p(std::move(spec), lambda);
  for (const auto& z : inputs) {
    p.check_dim(static_cast<std::size_t>(z.size()));
    p.input_images_.push_back(p.spec_.images(z));
    p.inputs_.push_back(z);
  }
  p.targets_.assign(targets.begin(), targets.end());
  p.refit();
  return p;
}

std::string vector_key(const Vector& z) {
  std::string key(static_cast<std::size_t>(z.size()) * sizeof(double), '\0');
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double v = z[i] + 0.0;
    std::memcpy(key.data() + static_cast<std::size_t>(i) * sizeof(double), &v, sizeof(double));
  }
  return key;
}

std::size_t ProbeCache::add(const Vector& z) {
  auto [it, inserted] = index_.try_emplace(vector_key(z), probes_.size());
  if (inserted) probes_.push_back(Probe{z, 0.0, false, {}});
  return it->second;
}

void ProbeCache::clear() {
  probes_.clear();
  index_.clear();
}

void ProbeCache::prepare(const Posterior& posterior) {
  if (posterior.generation() != generation_) {
    for (auto& p : probes_) p.whitened.clear();
    generation_ = posterior.generation();
  }
  if (!probes_.empty() && posterior.size() > 0 &&
      probes_.front().z.size() != posterior.inputs().front().size()) {
    throw std::invalid_argument("probe dimension does not match the posterior inputs");
  }
}

void ProbeCache::sync(const Posterior& posterior) {
  prepare(posterior);
  const auto n = static_cast<std::ptrdiff_t>(probes_.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Probe& p = probes_[static_cast<std::size_t>(i)];
    if (!p.has_prior) {
      p.prior = posterior.prior_variance(p.z);
      p.has_prior = true;
    }
    posterior.extend_whitened(as_span(p.z), p.whitened);
  }
}

void ProbeCache::sync_serial(const Posterior& posterior) {
  prepare(posterior);
  for (auto& p : probes_) {
    if (!p.has_prior) {
      p.prior = posterior.prior_variance(p.z);
      p.has_prior = true;
    }
    posterior.extend_whitened(as_span(p.z), p.whitened);
  }
}

const ProbeCache::Probe& ProbeCache::checked(std::size_t i, const Posterior& posterior) const {
  const Probe& p = probes_.at(i);
  if (!p.has_prior || p.whitened.size() != posterior.size() ||
      generation_ != posterior.generation()) {
    throw std::logic_error("probe cache is out of date; call sync() first");
  }
  return p;
}

double ProbeCache::mean(std::size_t i, const Posterior& posterior) const {
  return posterior.mean_from_whitened(checked(i, posterior).whitened);
}

double ProbeCache::stddev(std::size_t i, const Posterior& posterior) const {
  const Probe& p = checked(i, posterior);
  return posterior.stddev_from_whitened(p.whitened, p.prior);
}

}  // namespace symrl
