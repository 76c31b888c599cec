#include "symrl/analysis.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace symrl;

TEST_CASE("information gain closed forms") {
  const KernelSpec spec(KernelFamily::rbf, 1.0);
  CHECK(info_gain(spec, std::vector<Vector>{}, 1.0) == 0.0);
  const Vector z = Vector::Constant(2, 0.1);
  const double one = info_gain(spec, std::vector<Vector>{z}, 1.0);
  CHECK(one == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  // Duplicate: det [[2, 1], [1, 2]] = 3, so the second copy adds log 1.5.
  const double two = info_gain(spec, std::vector<Vector>{z, z}, 1.0);
  CHECK(two == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  CHECK(two - one < std::log(2.0));
  CHECK_THROWS_AS(info_gain(spec, std::vector<Vector>{z}, 0.0), std::invalid_argument);
}

TEST_CASE("log-det matches a dense determinant and is monotone") {
  const KernelSpec spec(KernelFamily::matern_2_5, 0.7, sign_flip_group(2));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pts = uniform_points(8, 2, seed);
    Matrix a = gram_serial(spec, pts) / 0.3;
    a.diagonal().array() += 1.0;
    const double naive = std::log(a.determinant());
    const double fast = info_gain(spec, pts, 0.3);
    CHECK(std::abs(fast - naive) <= 1e-8 * std::abs(naive));
    double prev = 0.0;
    for (std::size_t k = 1; k <= pts.size(); ++k) {
      const double g = info_gain(spec, std::span<const Vector>(pts.data(), k), 0.3);
      CHECK(g >= prev - 1e-10);
      prev = g;
    }
  }
}

TEST_CASE("greedy information gain") {
  const auto pts = uniform_points(60, 2, 3);
  const KernelSpec base(KernelFamily::rbf, 0.5);
  const KernelSpec inv(KernelFamily::rbf, 0.5, sign_flip_group(2));

  SUBCASE("first pick") {
    const auto r = greedy_info_gain(base, pts, 1, 0.1);
    CHECK(r.picks == std::vector<std::size_t>{0});  // stationary kernel: all variances 1, lowest index
    CHECK(r.gamma == doctest::Approx(std::log(1.0 + 1.0 / 0.1)).epsilon(1e-14));
  }
  SUBCASE("increments sum to the log-det of the picked set") {
    const auto r = greedy_info_gain(inv, pts, 15, 0.1);
    std::vector<Vector> chosen;
    for (auto i : r.picks) chosen.push_back(pts[i]);
    CHECK(r.gamma == doctest::Approx(info_gain(inv, chosen, 0.1)).epsilon(1e-10));
    for (std::size_t i = 1; i < r.increments.size(); ++i) CHECK(r.increments[i] <= r.increments[i - 1] + 1e-12);
    CHECK(r.label == "rbf(l=0.5)/sign_flip");
  }
  SUBCASE("single orbit collapses to a rank-one Gram matrix") {
    // All orbit members share one invariant-kernel column, so after T picks
    // the gain is log(1 + T k_G(z, z) / lambda) and the increments shrink
    // like 1/T instead of staying at the first-pick value.
    const Vector z = (Vector(2) << 0.3, -0.6).finished();
    std::vector<Vector> orbit_pts;
    for (const auto& g : d4_block_group(1)) orbit_pts.push_back(apply(g, z));
    const KernelSpec d4(KernelFamily::rbf, 0.5, d4_block_group(1));
    const double kzz = eval(d4, z, z);
    const auto r = greedy_info_gain(d4, orbit_pts, 8, 0.1);
    for (std::size_t t = 1; t <= 8; ++t) {
      const double partial = std::accumulate(r.increments.begin(), r.increments.begin() + static_cast<std::ptrdiff_t>(t), 0.0);
      CHECK(partial == doctest::Approx(std::log1p(static_cast<double>(t) * kzz / 0.1)).epsilon(1e-10));
    }
    const KernelSpec plain(KernelFamily::rbf, 0.5);
    CHECK(r.gamma < greedy_info_gain(plain, orbit_pts, 8, 0.1).gamma);
  }
  SUBCASE("invariant kernel gains less on the same candidates") {
    CHECK(greedy_info_gain(inv, pts, 20, 0.1).gamma < greedy_info_gain(base, pts, 20, 0.1).gamma);
  }
  CHECK_THROWS_AS(greedy_info_gain(base, pts, 61, 0.1), std::invalid_argument);
}

TEST_CASE("Gram eigendecay") {
  const auto pts = uniform_points(50, 2, 4);
  SUBCASE("rank one for a constant kernel") {
    // A huge lengthscale makes the RBF constant to double precision.
    const auto e = gram_eigen_decay(KernelSpec(KernelFamily::rbf, 1e9), pts);
    CHECK(e[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(e[i] == 0.0);
  }
  SUBCASE("descending, non-negative, trace identity") {
    const KernelSpec spec(KernelFamily::rbf, 0.5, sign_flip_group(2));
    const auto e = gram_eigen_decay(spec, pts);
    double sum = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      CHECK(e[i] >= 0.0);
      if (i > 0) CHECK(e[i] <= e[i - 1]);
      sum += e[i];
      diag += eval(spec, pts[i], pts[i]);
    }
    CHECK(sum == doctest::Approx(diag / 50.0).epsilon(1e-10));
  }
  SUBCASE("invariant spectrum decays faster past the leading block") {
    const auto big = uniform_points(200, 2, 5);
    const auto eb = gram_eigen_decay(KernelSpec(KernelFamily::rbf, 0.5), big);
    const auto ei = gram_eigen_decay(KernelSpec(KernelFamily::rbf, 0.5, sign_flip_group(2)), big);
    for (std::size_t m = 10; m < 40; ++m) CHECK(ei[m] <= eb[m]);
  }
  CHECK_THROWS_AS(gram_eigen_decay(KernelSpec(KernelFamily::rbf, 1.0), std::vector<Vector>(1, Vector::Zero(2))),
                  std::invalid_argument);
}
