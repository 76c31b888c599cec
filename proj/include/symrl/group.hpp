#pragma once

// Finite orthogonal groups acting linearly on embedded state-action vectors.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace symrl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One group element, represented by an orthogonal d x d matrix acting by
/// left multiplication.
class GroupElement {
 public:
  explicit GroupElement(Matrix matrix);

  const Matrix& matrix() const noexcept { return matrix_; }
  Eigen::Index dim() const noexcept { return matrix_.rows(); }

 private:
  Matrix matrix_;
};

/// Finite set of orthogonal matrices, identity first. Construction does not
/// check the group axioms; use verify_group for that.
class FiniteGroup {
 public:
  FiniteGroup(std::string name, std::vector<GroupElement> elements);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return elements_.size(); }
  Eigen::Index dim() const noexcept { return elements_.front().dim(); }

  const GroupElement& operator[](std::size_t i) const { return elements_[i]; }
  auto begin() const noexcept { return elements_.begin(); }
  auto end() const noexcept { return elements_.end(); }

  /// Index of the element whose matrix equals `m` within `tol`, or size().
  std::size_t find(const Matrix& m, double tol = 1e-10) const;

 private:
  std::string name_;
  std::vector<GroupElement> elements_;
};

FiniteGroup trivial_group(Eigen::Index d);

/// {I, -I} on R^d.
FiniteGroup sign_flip_group(Eigen::Index d);

/// The dihedral group of the square acting simultaneously on `blocks`
/// consecutive (x, y) pairs; d = 2 * blocks. Element order is r^k for
/// k = 0..3 followed by r^k c, where r rotates by pi/2 and c conjugates.
FiniteGroup d4_block_group(Eigen::Index blocks);

/// Block-diagonal extension diag(g, I_extra): acts as `group` on the leading
/// coordinates and fixes the trailing `extra` ones.
FiniteGroup extend_with_identity(const FiniteGroup& group, Eigen::Index extra);

/// Resolves `identity`, `sign_flip` or `d4:<blocks>` for ambient dimension d.
/// Throws std::invalid_argument for unknown names or mismatched dimensions.
FiniteGroup group_from_name(std::string_view name, Eigen::Index d);

/// M x. Throws std::invalid_argument on dimension mismatch.
Vector apply(const GroupElement& g, const Vector& x);

/// Distinct images g x, identified when their max-norm distance is below
/// `tol`, in lexicographic order.
std::vector<Vector> orbit(const FiniteGroup& group, const Vector& x,
                          double tol = 1e-9);

/// Lexicographic order on vectors of equal length.
bool lex_less(const Vector& a, const Vector& b);

struct GroupReport {
  std::vector<std::string> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// Checks orthogonality, identity, closure and inverses.
GroupReport verify_group(const FiniteGroup& group, double tol = 1e-10);

}  // namespace symrl
