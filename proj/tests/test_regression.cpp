#include "symrl/regression.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace symrl;

namespace {

std::vector<Vector> random_points(std::mt19937_64& rng, std::size_t n, Eigen::Index d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vector> out(n, Vector(d));
  for (auto& z : out) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = u(rng);
  }
  return out;
}

struct Dense {
  double mean;
  double var;
};

Dense dense_posterior(const KernelSpec& spec, const std::vector<Vector>& x, const std::vector<double>& y,
                      double lambda, const Vector& z) {
  const auto t = static_cast<Eigen::Index>(x.size());
  Matrix k = gram_serial(spec, x);
  k.diagonal().array() += lambda;
  const Matrix inv = k.inverse();
  Vector kz(t);
  Vector yy(t);
  for (Eigen::Index i = 0; i < t; ++i) {
    kz[i] = eval(spec, x[static_cast<std::size_t>(i)], z);
    yy[i] = y[static_cast<std::size_t>(i)];
  }
  return {kz.dot(inv * yy), eval(spec, z, z) - kz.dot(inv * kz)};
}

}  // namespace

TEST_CASE("single observation closed form") {
  // k(z,z) = 1, lambda = 1, y = 1: mean k/(k+lambda) = 0.5, var 1 - 1/2 = 0.5.
  const KernelSpec spec(KernelFamily::rbf, 1.0);
  Posterior p(spec, 1.0);
  const Vector z = Vector::Constant(2, 0.3);
  p.append(z, 1.0);
  CHECK(p.mean(z) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p.stddev(z) * p.stddev(z) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("empty posterior returns the prior") {
  Posterior p(KernelSpec(KernelFamily::rbf, 1.0), 0.1);
  const Vector z = Vector::Constant(2, 0.5);
  CHECK(p.mean(z) == 0.0);
  CHECK(p.stddev(z) == 1.0);
  CHECK(p.size() == 0);
}

TEST_CASE("posterior matches dense inversion; append matches refit") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const KernelSpec spec(trial % 2 ? KernelFamily::matern_2_5 : KernelFamily::rbf, 0.6,
                          trial % 3 ? std::optional<FiniteGroup>(sign_flip_group(3)) : std::nullopt);
    const double lambda = 0.05;
    const auto x = random_points(rng, 5 + 3 * static_cast<std::size_t>(trial), 3);
    std::vector<double> y;
    for (std::size_t i = 0; i < x.size(); ++i) y.push_back(u(rng));

    Posterior inc(spec, lambda);
    for (std::size_t i = 0; i < x.size(); ++i) inc.append(x[i], y[i]);
    const Posterior full = fit(spec, x, y, lambda);
    CHECK((inc.factor() - full.factor()).cwiseAbs().maxCoeff() < 1e-10);

    for (const auto& z : random_points(rng, 5, 3)) {
      const Dense d = dense_posterior(spec, x, y, lambda, z);
      CHECK(std::abs(inc.mean(z) - d.mean) < 1e-8);
      CHECK(std::abs(inc.stddev(z) - std::sqrt(std::max(d.var, 0.0))) < 1e-8);
      CHECK(std::abs(full.mean(z) - d.mean) < 1e-8);
    }
  }
}

TEST_CASE("variance is non-increasing as data arrives") {
  std::mt19937_64 rng(4);
  const KernelSpec spec(KernelFamily::rbf, 0.5);
  Posterior p(spec, 0.1);
  const Vector probe = Vector::Zero(2);
  double prev = p.stddev(probe);
  for (const auto& z : random_points(rng, 30, 2)) {
    p.append(z, 0.0);
    const double s = p.stddev(probe);
    CHECK(s <= prev + 1e-12);
    prev = s;
  }
}

TEST_CASE("set_targets recomputes the mean only") {
  std::mt19937_64 rng(8);
  const KernelSpec spec(KernelFamily::rbf, 0.5);
  const auto x = random_points(rng, 12, 2);
  std::vector<double> y0(12, 0.0);
  std::vector<double> y1;
  for (std::size_t i = 0; i < 12; ++i) y1.push_back(static_cast<double>(i) / 12.0);
  Posterior p = fit(spec, x, y0, 0.1);
  const Matrix before = p.factor();
  p.set_targets(y1);
  const Posterior q = fit(spec, x, y1, 0.1);
  CHECK(p.factor() == before);
  for (const auto& z : random_points(rng, 4, 2)) CHECK(std::abs(p.mean(z) - q.mean(z)) < 1e-12);
  CHECK_THROWS_AS(p.set_targets(std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST_CASE("non-positive pivot raises and leaves the posterior unchanged") {
  const KernelSpec spec(KernelFamily::rbf, 1.0);
  Posterior p(spec, 1e-300);
  const Vector z = Vector::Constant(1, 0.2);
  p.append(z, 1.0);
  const Matrix before = p.factor();
  CHECK_THROWS_AS(p.append(z, 1.0), FactorizationError);
  CHECK(p.size() == 1);
  CHECK(p.factor() == before);
  try {
    fit(spec, std::vector<Vector>{z, z}, std::vector<double>{0.0, 0.0}, 1e-300);
    FAIL("expected FactorizationError");
  } catch (const FactorizationError& e) {
    CHECK(e.pivot() == 1);
  }
}

TEST_CASE("argument validation") {
  const KernelSpec spec(KernelFamily::rbf, 1.0);
  CHECK_THROWS_AS(Posterior(spec, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fit(spec, std::vector<Vector>{Vector::Zero(1)}, std::vector<double>{}, 1.0),
                  std::invalid_argument);
  Posterior p(spec, 1.0);
  p.append(Vector::Zero(2), 0.0);
  CHECK_THROWS_AS(p.append(Vector::Zero(3), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(p.mean(Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("probe cache tracks appends, refits and serial reference") {
  std::mt19937_64 rng(13);
  const KernelSpec spec(KernelFamily::matern_1_5, 0.8, d4_block_group(1));
  const auto data = random_points(rng, 25, 2);
  const auto probes = random_points(rng, 40, 2);
  Posterior p(spec, 0.05);
  ProbeCache par;
  ProbeCache ser;
  for (const auto& z : probes) {
    par.add(z);
    ser.add(z);
  }
  CHECK(par.add(probes[3]) == 3);
  CHECK(par.size() == probes.size());

  std::vector<double> y;
  for (std::size_t i = 0; i < data.size(); ++i) {
    p.append(data[i], std::sin(static_cast<double>(i)));
    y.push_back(std::sin(static_cast<double>(i)));
    if (i % 4 == 0) {
      par.sync(p);
      ser.sync_serial(p);
      for (std::size_t j = 0; j < probes.size(); ++j) {
        CHECK(par.mean(j, p) == ser.mean(j, p));
        CHECK(std::abs(par.mean(j, p) - p.mean(probes[j])) < 1e-10);
        CHECK(std::abs(par.stddev(j, p) - p.stddev(probes[j])) < 1e-10);
      }
    }
  }
  p.append(data[0], 0.5);
  CHECK_THROWS_AS(par.mean(0, p), std::logic_error);

  p.refit();
  par.sync(p);
  for (std::size_t j = 0; j < probes.size(); ++j) CHECK(std::abs(par.mean(j, p) - p.mean(probes[j])) < 1e-10);

  // A different posterior of the same size must not be served from the cache.
  y.push_back(0.5);
  std::vector<Vector> x = data;
  x.push_back(data[0]);
  const Posterior other = fit(spec, x, y, 0.05);
  CHECK_THROWS_AS(par.mean(0, other), std::logic_error);
}

TEST_CASE("vector keys fold negative zero") {
  Vector a = Vector::Zero(2);
  Vector b(2);
  b << -0.0, 0.0;
  CHECK(vector_key(a) == vector_key(b));
  b[1] = 1e-300;
  CHECK(vector_key(a) != vector_key(b));
}
