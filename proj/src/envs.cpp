#include "symrl/envs.hpp"

#include "symrl/kernel.hpp"
#include "symrl/regression.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace symrl {

Vector EpisodicEnv::joint(const Vector& s, const Vector& a) const {
  Vector z(s.size() + a.size());
  z << s, a;
  return z;
}

std::unique_ptr<EpisodicEnv> make_env(const EnvConfig& config) {
  if (config.horizon && *config.horizon < 1) {
    throw std::invalid_argument("env.H must be at least 1");
  }
  if (config.name == "synthetic") {
    if (config.grid_points < 2) throw std::invalid_argument("env.grid_points must be >= 2");
    return std::make_unique<SyntheticEnv>(config.seed, config.grid_points,
                                          config.horizon.value_or(10));
  }
  if (config.name == "frozen_fixed" || config.name == "frozen_random") {
    auto mode = config.name == "frozen_fixed" ? FrozenLakeEnv::Mode::fixed
                                              : FrozenLakeEnv::Mode::random;
    return std::make_unique<FrozenLakeEnv>(mode, config.seed, config.horizon.value_or(10));
  }
  if (config.name == "synpl") {
    if (config.horizon && *config.horizon != SynPlEnv::kUnits) {
      throw std::invalid_argument(fmt::format("synpl has horizon {} (one step per unit)",
                                              SynPlEnv::kUnits));
    }
    if (config.rollouts < 1) throw std::invalid_argument("synpl.rollouts must be >= 1");
    return std::make_unique<SynPlEnv>(config.seed, config.rollouts);
  }
  throw std::invalid_argument(fmt::format("unknown environment '{}'", config.name));
}

// --- synthetic -------------------------------------------------------------

namespace {

Vector sample_gp(const KernelSpec& spec, std::span<const Vector> points, Rng& rng) {
  const Matrix k = gram(spec, points);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
  std::normal_distribution<double> normal;
  Vector xi(k.rows());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi[i] = normal(rng);
  const Vector scale = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * scale.cwiseProduct(xi);
}

std::vector<double> even_grid(int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<double>(2 * i - (n - 1)) / (n - 1);
  }
  return out;
}

constexpr double kSyntheticLengthscale = 0.1;
constexpr double kSyntheticLambda = 0.01;
constexpr double kTransitionFloor = 1e-6;

}  // namespace

SyntheticEnv::SyntheticEnv(std::uint64_t seed, int grid_points, int horizon)
    : horizon_(horizon),
      grid_(even_grid(grid_points)),
      initial_(0),
      group_(sign_flip_group(2)) {
  if (grid_points < 2) throw std::invalid_argument("synthetic env needs >= 2 grid points");
  const std::size_t n = grid_.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(grid_[i]) < std::abs(grid_[initial_])) initial_ = i;
  }

  const auto coarse = even_grid(5);

  // Reward: GP sample on a 5x5 grid over Z, smoothed by KRR, rescaled.
  {
    KernelSpec spec(KernelFamily::rbf, kSyntheticLengthscale, sign_flip_group(2));
    std::vector<Vector> pts;
    for (double s : coarse) {
      for (double a : coarse) pts.push_back((Vector(2) << s, a).finished());
    }
    Rng rng = make_rng(seed, "synthetic-reward");
    const Vector f = sample_gp(spec, pts, rng);
    const Posterior krr = fit(spec, pts, std::vector<double>(f.data(), f.data() + f.size()),
                              kSyntheticLambda);
    std::vector<double> raw(n * n);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < n; ++a) {
        raw[s * n + a] = krr.mean((Vector(2) << grid_[s], grid_[a]).finished());
      }
    }
    const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
    const double low = *lo;
    const double span = *hi - *lo;
    model_ = TabularMdp(n, n, horizon_);
    for (int h = 0; h < horizon_; ++h) {
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t a = 0; a < n; ++a) {
          model_.r(h, s, a) = span > 0.0 ? (raw[s * n + a] - low) / span : 0.0;
        }
      }
    }
  }

  // Transitions: GP sample on a 5x5x5 grid over Z x S, smoothed, then each
  // row P(.|z) shifted, floored and normalized.
  {
    KernelSpec spec(KernelFamily::rbf, kSyntheticLengthscale, sign_flip_group(3));
    std::vector<Vector> pts;
    for (double s : coarse) {
      for (double a : coarse) {
        for (double next : coarse) pts.push_back((Vector(3) << s, a, next).finished());
      }
    }
    Rng rng = make_rng(seed, "synthetic-transition");
    const Vector f = sample_gp(spec, pts, rng);
    const Posterior krr = fit(spec, pts, std::vector<double>(f.data(), f.data() + f.size()),
                              kSyntheticLambda);
    std::vector<double> row(n);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t next = 0; next < n; ++next) {
          row[next] = krr.mean((Vector(3) << grid_[s], grid_[a], grid_[next]).finished());
        }
        const double low = *std::min_element(row.begin(), row.end());
        for (auto& v : row) v = v - low + kTransitionFloor;
        // Summing in sorted order makes the normalizer independent of the
        // row's orientation, so mirrored rows stay bitwise mirrored.
        std::vector<double> sorted = row;
        std::sort(sorted.begin(), sorted.end());
        double total = 0.0;
        for (double v : sorted) total += v;
        for (int h = 0; h < horizon_; ++h) {
          for (std::size_t next = 0; next < n; ++next) model_.p(h, s, a, next) = row[next] / total;
        }
      }
    }
  }
  optimal_ = value_iteration(model_);
}

std::size_t SyntheticEnv::index_of(double x) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (std::abs(grid_[i] - x) < std::abs(grid_[best] - x)) best = i;
  }
  if (std::abs(grid_[best] - x) > 1e-9) {
    throw std::invalid_argument(fmt::format("{} is not a synthetic grid point", x));
  }
  return best;
}

Vector SyntheticEnv::reset(std::uint64_t episode_index, std::uint64_t run_seed) {
  rng_ = make_rng(run_seed, "env", episode_index);
  return Vector::Constant(1, grid_[initial_]);
}

StepResult SyntheticEnv::step(int h, const Vector& s, const Vector& a) {
  if (h < 1 || h > horizon_) throw std::invalid_argument("step index out of range");
  if (s.size() != 1 || a.size() != 1) throw std::invalid_argument("synthetic state/action is 1-D");
  const std::size_t si = index_of(s[0]);
  const std::size_t ai = index_of(a[0]);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng_);
  const std::size_t n = grid_.size();
  std::size_t next = n - 1;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += model_.p(h - 1, si, ai, k);
    if (u < acc) {
      next = k;
      break;
    }
  }
  return {model_.r(h - 1, si, ai), Vector::Constant(1, grid_[next]), h == horizon_};
}

std::vector<Vector> SyntheticEnv::actions(const Vector& /*s*/) const {
  std::vector<Vector> out;
  for (double a : grid_) out.push_back(Vector::Constant(1, a));
  return out;
}

double SyntheticEnv::optimal_value(const Vector& s1) const {
  return optimal_.v[0][index_of(s1[0])];
}

std::optional<double> SyntheticEnv::policy_value(const Vector& s1, const PolicyFn& policy) const {
  const auto acts = actions(s1);
  TabularPolicy table(static_cast<std::size_t>(horizon_), std::vector<std::size_t>(grid_.size()));
  for (int h = 1; h <= horizon_; ++h) {
    for (std::size_t s = 0; s < grid_.size(); ++s) {
      table[static_cast<std::size_t>(h - 1)][s] = policy(h, Vector::Constant(1, grid_[s]), acts);
    }
  }
  return evaluate_policy(model_, table)[0][index_of(s1[0])];
}

// --- frozen lake -------------------------------------------------------------

namespace {

constexpr double kFrozenHalf = 1.5;

bool on_grid(const Eigen::Vector2d& p, double half) {
  return std::abs(p.x()) <= half + 1e-9 && std::abs(p.y()) <= half + 1e-9;
}

bool same_cell(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a - b).cwiseAbs().maxCoeff() < 1e-9;
}

int cell_index(const Eigen::Vector2d& p) {
  const int col = static_cast<int>(std::lround(p.x() + kFrozenHalf));
  const int row = static_cast<int>(std::lround(p.y() + kFrozenHalf));
  return row * 4 + col;
}

Eigen::Vector2d cell_center(int index) {
  return {static_cast<double>(index % 4) - kFrozenHalf, static_cast<double>(index / 4) - kFrozenHalf};
}

const std::array<Eigen::Vector2d, 4>& frozen_moves() {
  static const std::array<Eigen::Vector2d, 4> moves = {
      Eigen::Vector2d(-1, 0), Eigen::Vector2d(0, -1), Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 0)};
  return moves;
}

}  // namespace

Vector Layout::to_state() const {
  Vector s(12);
  s.segment<2>(0) = agent;
  s.segment<2>(2) = goal;
  for (int i = 0; i < 4; ++i) s.segment<2>(4 + 2 * i) = holes[static_cast<std::size_t>(i)];
  return s;
}

Layout Layout::from_state(const Vector& s) {
  if (s.size() != 12) throw std::invalid_argument("frozen lake state has 12 coordinates");
  Layout l;
  l.agent = s.segment<2>(0);
  l.goal = s.segment<2>(2);
  for (int i = 0; i < 4; ++i) l.holes[static_cast<std::size_t>(i)] = s.segment<2>(4 + 2 * i);
  return l;
}

int shortest_path(const Layout& layout) {
  std::array<bool, 16> blocked{};
  for (const auto& h : layout.holes) blocked[static_cast<std::size_t>(cell_index(h))] = true;
  std::array<int, 16> dist;
  dist.fill(-1);
  const int start = cell_index(layout.agent);
  const int goal = cell_index(layout.goal);
  if (blocked[static_cast<std::size_t>(start)]) return -1;
  std::deque<int> queue{start};
  dist[static_cast<std::size_t>(start)] = 0;
  while (!queue.empty()) {
    const int cur = queue.front();
    queue.pop_front();
    if (cur == goal) return dist[static_cast<std::size_t>(cur)];
    for (const auto& m : frozen_moves()) {
      const Eigen::Vector2d next = cell_center(cur) + m;
      if (!on_grid(next, kFrozenHalf)) continue;
      const int ni = cell_index(next);
      if (blocked[static_cast<std::size_t>(ni)] || dist[static_cast<std::size_t>(ni)] >= 0) continue;
      dist[static_cast<std::size_t>(ni)] = dist[static_cast<std::size_t>(cur)] + 1;
      queue.push_back(ni);
    }
  }
  return -1;
}

bool Layout::valid() const {
  std::vector<Eigen::Vector2d> all = {agent, goal};
  all.insert(all.end(), holes.begin(), holes.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!on_grid(all[i], kFrozenHalf)) return false;
    const double fx = all[i].x() - std::floor(all[i].x());
    const double fy = all[i].y() - std::floor(all[i].y());
    if (std::abs(fx - 0.5) > 1e-9 || std::abs(fy - 0.5) > 1e-9) return false;
    for (std::size_t j = 0; j < i; ++j) {
      if (same_cell(all[i], all[j])) return false;
    }
  }
  return shortest_path(*this) >= 0;
}

Layout default_layout() {
  // SFFF / FHFH / FFFH / HFFG, row 0 on top.
  auto at = [](int row, int col) {
    return Eigen::Vector2d(col - kFrozenHalf, kFrozenHalf - row);
  };
  return Layout{at(0, 0), at(3, 3), {at(1, 1), at(1, 3), at(2, 3), at(3, 0)}};
}

FrozenLakeEnv::FrozenLakeEnv(Mode mode, std::uint64_t seed, int horizon)
    : mode_(mode), horizon_(horizon), base_(default_layout()), group_(d4_block_group(7)),
      rng_(make_rng(seed, "frozen")) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
}

Layout FrozenLakeEnv::sample_layout(Rng& rng) {
  std::array<int, 16> cells;
  for (int i = 0; i < 16; ++i) cells[static_cast<std::size_t>(i)] = i;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    // Partial Fisher-Yates for six distinct cells: goal, start, 4 holes.
    for (int i = 0; i < 6; ++i) {
      std::uniform_int_distribution<int> pick(i, 15);
      std::swap(cells[static_cast<std::size_t>(i)], cells[static_cast<std::size_t>(pick(rng))]);
    }
    Layout l{cell_center(cells[1]), cell_center(cells[0]),
             {cell_center(cells[2]), cell_center(cells[3]), cell_center(cells[4]),
              cell_center(cells[5])}};
    if (shortest_path(l) >= 0) return l;
  }
  throw std::runtime_error("could not sample a solvable FrozenLake layout in 10000 tries");
}

Vector FrozenLakeEnv::reset(std::uint64_t episode_index, std::uint64_t run_seed) {
  rng_ = make_rng(run_seed, "env", episode_index);
  if (mode_ == Mode::random) return sample_layout(rng_).to_state();
  std::uniform_int_distribution<std::size_t> pick(0, 7);
  const std::size_t g = pick(rng_);
  const Matrix m = group_[g].matrix().topLeftCorner(12, 12);
  return m * base_.to_state();
}

bool FrozenLakeEnv::is_terminal(const Vector& s) const {
  const Layout l = Layout::from_state(s);
  if (same_cell(l.agent, l.goal)) return true;
  return std::any_of(l.holes.begin(), l.holes.end(),
                     [&](const Eigen::Vector2d& h) { return same_cell(l.agent, h); });
}

StepResult FrozenLakeEnv::step(int h, const Vector& s, const Vector& a) {
  if (h < 1 || h > horizon_) throw std::invalid_argument("step index out of range");
  if (a.size() != 2 || std::none_of(frozen_moves().begin(), frozen_moves().end(),
                                    [&](const Eigen::Vector2d& m) { return same_cell(m, a); })) {
    throw std::invalid_argument("illegal FrozenLake action");
  }
  StepResult out{0.0, s, h == horizon_};
  if (is_terminal(s)) {
    out.done = true;
    return out;
  }
  Layout l = Layout::from_state(s);
  const Eigen::Vector2d moved = l.agent + Eigen::Vector2d(a[0], a[1]);
  if (on_grid(moved, kFrozenHalf)) l.agent = moved;
  out.next = l.to_state();
  if (same_cell(l.agent, l.goal)) out.reward = 1.0;
  out.done = out.done || is_terminal(out.next);
  return out;
}

std::vector<Vector> FrozenLakeEnv::actions(const Vector& /*s*/) const {
  std::vector<Vector> out;
  for (const auto& m : frozen_moves()) out.push_back(Vector(m));
  return out;
}

double FrozenLakeEnv::optimal_value(const Vector& s1) const {
  if (is_terminal(s1)) return 0.0;
  const int d = shortest_path(Layout::from_state(s1));
  return d >= 0 && d <= horizon_ ? 1.0 : 0.0;
}

}  // namespace symrl
