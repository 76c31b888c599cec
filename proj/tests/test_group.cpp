#include "symrl/group.hpp"

#include <doctest.h>

#include <random>

using namespace symrl;

namespace {

Vector v2(double x, double y) { return (Vector(2) << x, y).finished(); }

}  // namespace

TEST_CASE("builtin groups satisfy the axioms") {
  for (const auto& g : {trivial_group(3), sign_flip_group(1), sign_flip_group(4), d4_block_group(1),
                        d4_block_group(7), d4_block_group(17),
                        extend_with_identity(d4_block_group(1), 2)}) {
    CAPTURE(g.name());
    const auto report = verify_group(g);
    CHECK(report.ok());
    CHECK(g[0].matrix().isIdentity());
  }
  CHECK(d4_block_group(7).size() == 8);
  CHECK(d4_block_group(7).dim() == 14);
  CHECK(sign_flip_group(2).size() == 2);
}

TEST_CASE("verify_group reports a set that is not closed") {
  Matrix r(2, 2);
  r << 0, -1, 1, 0;
  FiniteGroup half("half", {GroupElement(Matrix::Identity(2, 2)), GroupElement(r)});
  CHECK_FALSE(verify_group(half).ok());

  Matrix shear(2, 2);
  shear << 1, 1, 0, 1;
  FiniteGroup bad("shear", {GroupElement(Matrix::Identity(2, 2)), GroupElement(shear)});
  CHECK_FALSE(verify_group(bad).ok());
}

TEST_CASE("D4 orbit sizes on the plane") {
  const auto g = d4_block_group(1);
  CHECK(orbit(g, v2(0.3, 0.7)).size() == 8);
  CHECK(orbit(g, v2(0.5, 0.5)).size() == 4);
  CHECK(orbit(g, v2(1.0, 0.0)).size() == 4);
  CHECK(orbit(g, v2(0.0, 0.0)).size() == 1);
  CHECK(orbit(sign_flip_group(2), v2(0.0, 0.0)).size() == 1);
  CHECK(orbit(sign_flip_group(2), v2(0.1, 0.0)).size() == 2);
}

TEST_CASE("orbits are sorted, closed under the group and identical for orbit mates") {
  const auto g = d4_block_group(2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(4);
    for (int i = 0; i < 4; ++i) x[i] = u(rng);
    const auto o = orbit(g, x);
    for (std::size_t i = 1; i < o.size(); ++i) CHECK(lex_less(o[i - 1], o[i]));
    for (const auto& e : g) {
      const auto og = orbit(g, apply(e, x));
      REQUIRE(og.size() == o.size());
      for (std::size_t i = 0; i < o.size(); ++i) CHECK((og[i] - o[i]).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("element order of the D4 block group") {
  const auto g = d4_block_group(1);
  const Vector x = v2(1.0, 0.0);
  // r rotates by a quarter turn, c reflects across the x axis.
  CHECK((apply(g[1], x) - v2(0.0, 1.0)).norm() < 1e-15);
  CHECK((apply(g[4], v2(0.0, 1.0)) - v2(0.0, -1.0)).norm() < 1e-15);
  CHECK(g.find(g[5].matrix()) == 5);
  CHECK(g.find(Matrix::Zero(2, 2)) == g.size());
}

TEST_CASE("group lookup by name") {
  CHECK(group_from_name("identity", 3).size() == 1);
  CHECK(group_from_name("sign_flip", 2).size() == 2);
  CHECK(group_from_name("d4:7", 14).dim() == 14);
  CHECK_THROWS_AS(group_from_name("d4:3", 4), std::invalid_argument);
  CHECK_THROWS_AS(group_from_name("d4:x", 2), std::invalid_argument);
  CHECK_THROWS_AS(group_from_name("cyclic", 2), std::invalid_argument);
}

TEST_CASE("apply rejects mismatched dimensions") {
  CHECK_THROWS_AS(apply(d4_block_group(1)[1], Vector::Zero(3)), std::invalid_argument);
  CHECK_THROWS(GroupElement(Matrix::Zero(2, 3)));
}
