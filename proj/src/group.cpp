#include "symrl/group.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace symrl {

GroupElement::GroupElement(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
    throw std::invalid_argument("group element must be a non-empty square matrix");
  }
}

FiniteGroup::FiniteGroup(std::string name, std::vector<GroupElement> elements)
    : name_(std::move(name)), elements_(std::move(elements)) {
  if (elements_.empty()) {
    throw std::invalid_argument("group must have at least one element");
  }
  for (const auto& g : elements_) {
    if (g.dim() != elements_.front().dim()) {
      throw std::invalid_argument("group elements have inconsistent dimensions");
    }
  }
}

std::size_t FiniteGroup::find(const Matrix& m, double tol) const {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if ((elements_[i].matrix() - m).cwiseAbs().maxCoeff() < tol) return i;
  }
  return elements_.size();
}

FiniteGroup trivial_group(Eigen::Index d) {
  return FiniteGroup("identity", {GroupElement(Matrix::Identity(d, d))});
}

FiniteGroup sign_flip_group(Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("sign_flip_group requires d >= 1");
  return FiniteGroup("sign_flip", {GroupElement(Matrix::Identity(d, d)),
                                   GroupElement(-Matrix::Identity(d, d))});
}

FiniteGroup d4_block_group(Eigen::Index blocks) {
  if (blocks < 1) throw std::invalid_argument("d4_block_group requires blocks >= 1");
  Eigen::Matrix2d rot;
  rot << 0.0, -1.0, 1.0, 0.0;
  Eigen::Matrix2d conj;
  conj << 1.0, 0.0, 0.0, -1.0;

  std::vector<Eigen::Matrix2d> small;
  Eigen::Matrix2d r = Eigen::Matrix2d::Identity();
  for (int k = 0; k < 4; ++k) {
    small.push_back(r);
    r = rot * r;
  }
  for (int k = 0; k < 4; ++k) small.push_back(small[k] * conj);

  const Eigen::Index d = 2 * blocks;
  std::vector<GroupElement> elements;
  for (const auto& s : small) {
    Matrix m = Matrix::Zero(d, d);
    for (Eigen::Index b = 0; b < blocks; ++b) m.block<2, 2>(2 * b, 2 * b) = s;
    elements.emplace_back(std::move(m));
  }
  return FiniteGroup(fmt::format("d4:{}", blocks), std::move(elements));
}

FiniteGroup extend_with_identity(const FiniteGroup& group, Eigen::Index extra) {
  const Eigen::Index d = group.dim() + extra;
  std::vector<GroupElement> elements;
  for (const auto& g : group) {
    Matrix m = Matrix::Identity(d, d);
    m.topLeftCorner(group.dim(), group.dim()) = g.matrix();
    elements.emplace_back(std::move(m));
  }
  return FiniteGroup(fmt::format("{}+id{}", group.name(), extra), std::move(elements));
}

FiniteGroup group_from_name(std::string_view name, Eigen::Index d) {
  if (name == "identity") return trivial_group(d);
  if (name == "sign_flip") return sign_flip_group(d);
  if (name.starts_with("d4:")) {
    auto digits = name.substr(3);
    Eigen::Index blocks = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), blocks);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || blocks < 1) {
      throw std::invalid_argument(fmt::format("malformed group name '{}'", name));
    }
    if (2 * blocks != d) {
      throw std::invalid_argument(fmt::format(
          "group '{}' acts on R^{} but the embedding has dimension {}", name, 2 * blocks, d));
    }
    return d4_block_group(blocks);
  }
  throw std::invalid_argument(fmt::format("unknown group '{}'", name));
}

Vector apply(const GroupElement& g, const Vector& x) {
  if (x.size() != g.dim()) {
    throw std::invalid_argument(
        fmt::format("cannot apply a {}-dim group element to a {}-dim vector", g.dim(), x.size()));
  }
  return g.matrix() * x;
}

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

std::vector<Vector> orbit(const FiniteGroup& group, const Vector& x, double tol) {
  std::vector<Vector> out;
  for (const auto& g : group) {
    Vector y = apply(g, x);
    bool seen = std::any_of(out.begin(), out.end(), [&](const Vector& o) {
      return (o - y).cwiseAbs().maxCoeff() < tol;
    });
    if (!seen) out.push_back(std::move(y));
  }
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

GroupReport verify_group(const FiniteGroup& group, double tol) {
  GroupReport report;
  const Eigen::Index d = group.dim();
  const Matrix eye = Matrix::Identity(d, d);

  for (std::size_t i = 0; i < group.size(); ++i) {
    const Matrix& m = group[i].matrix();
    double err = (m * m.transpose() - eye).cwiseAbs().maxCoeff();
    if (err > tol) {
      report.violations.push_back(fmt::format("orthogonality: element {} off by {:.3g}", i, err));
    }
  }
  if (group.find(eye, tol) == group.size()) {
    report.violations.emplace_back("identity: identity matrix missing");
  }
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (std::size_t j = 0; j < group.size(); ++j) {
      if (group.find(group[i].matrix() * group[j].matrix(), tol) == group.size()) {
        report.violations.push_back(fmt::format("closure: product of {} and {} not in set", i, j));
      }
    }
    bool has_inverse = false;
    for (std::size_t j = 0; j < group.size() && !has_inverse; ++j) {
      has_inverse = ((group[i].matrix() * group[j].matrix()) - eye).cwiseAbs().maxCoeff() <= tol;
    }
    if (!has_inverse) {
      report.violations.push_back(fmt::format("inverse: element {} has no inverse in set", i));
    }
  }
  return report;
}

}  // namespace symrl
