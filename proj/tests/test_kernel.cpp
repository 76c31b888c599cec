#include "symrl/kernel.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace symrl;

namespace {

Vector random_vector(std::mt19937_64& rng, Eigen::Index d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(d);
  for (Eigen::Index i = 0; i < d; ++i) x[i] = u(rng);
  return x;
}

}  // namespace

TEST_CASE("base kernel values") {
  const Vector a = Vector::Zero(1);
  const Vector b = Vector::Constant(1, 1.0);
  CHECK(eval(KernelSpec(KernelFamily::rbf, 1.0), a, a) == 1.0);
  CHECK(eval(KernelSpec(KernelFamily::rbf, 1.0), a, b) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(eval(KernelSpec(KernelFamily::rbf, 0.5), a, b) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  const double u3 = std::sqrt(3.0);
  CHECK(eval(KernelSpec(KernelFamily::matern_1_5, 1.0), a, b) ==
        doctest::Approx((1 + u3) * std::exp(-u3)).epsilon(1e-15));
  const double u5 = std::sqrt(5.0);
  CHECK(eval(KernelSpec(KernelFamily::matern_2_5, 1.0), a, b) ==
        doctest::Approx((1 + u5 + 5.0 / 3.0) * std::exp(-u5)).epsilon(1e-15));
}

TEST_CASE("sign-flip invariant RBF closed form") {
  // k_G(z, z) = (k(z, z) + k(-z, z)) / 2 with |2z|^2 = 1.
  const KernelSpec spec(KernelFamily::rbf, 1.0, sign_flip_group(1));
  const Vector z = Vector::Constant(1, 0.5);
  CHECK(eval(spec, z, z) == doctest::Approx(0.5 * (1.0 + std::exp(-0.5))).epsilon(1e-15));
  CHECK(eval(spec, z, z) == doctest::Approx(0.80327).epsilon(1e-5));
}

TEST_CASE("invariant kernel is invariant in both arguments and symmetric") {
  std::mt19937_64 rng(11);
  for (const auto& g : {sign_flip_group(2), d4_block_group(1), d4_block_group(3)}) {
    for (auto family : {KernelFamily::rbf, KernelFamily::matern_1_5, KernelFamily::matern_2_5}) {
      const KernelSpec spec(family, 0.7, g);
      for (int t = 0; t < 20; ++t) {
        const Vector z = random_vector(rng, g.dim());
        const Vector zp = random_vector(rng, g.dim());
        const double k = eval(spec, z, zp);
        CHECK(std::abs(eval(spec, zp, z) - k) < 1e-12);
        for (const auto& e : g) {
          CHECK(std::abs(eval(spec, apply(e, z), zp) - k) < 1e-12);
          CHECK(std::abs(eval(spec, z, apply(e, zp)) - k) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("trivial symmetrization reproduces the base kernel") {
  std::mt19937_64 rng(3);
  const KernelSpec base(KernelFamily::matern_2_5, 0.4);
  const KernelSpec trivial(KernelFamily::matern_2_5, 0.4, trivial_group(3));
  for (int t = 0; t < 50; ++t) {
    const Vector z = random_vector(rng, 3);
    const Vector zp = random_vector(rng, 3);
    CHECK(eval(trivial, z, zp) == eval(base, z, zp));
  }
}

TEST_CASE("Gram matrices: parallel equals serial, exact symmetry, PSD") {
  std::mt19937_64 rng(7);
  std::vector<Vector> pts;
  for (int i = 0; i < 60; ++i) pts.push_back(random_vector(rng, 2));
  const KernelSpec spec(KernelFamily::rbf, 0.5, d4_block_group(1));
  const Matrix a = gram(spec, pts);
  const Matrix b = gram_serial(spec, pts);
  CHECK(a == b);
  CHECK(a == a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
  CHECK(gram(spec, std::vector<Vector>{}).size() == 0);
}

TEST_CASE("kernel spec validation") {
  CHECK_THROWS_AS(KernelSpec(KernelFamily::rbf, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec(KernelFamily::rbf, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel_family("laplace"), std::invalid_argument);
  CHECK(parse_kernel_family("matern_1_5") == KernelFamily::matern_1_5);
  const KernelSpec spec(KernelFamily::rbf, 0.5, d4_block_group(7));
  CHECK(spec.label() == "rbf(l=0.5)/d4:7");
  CHECK_THROWS_AS(eval(spec, Vector::Zero(14), Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(eval(spec, Vector::Zero(3), Vector::Zero(3)), std::invalid_argument);
}
