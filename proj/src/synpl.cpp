#include "symrl/envs.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace symrl {

namespace {

constexpr double kSynPlHalf = 3.5;

using Cell = std::array<double, 2>;

Cell slot(const Vector& s, int i) { return {s[2 * i], s[2 * i + 1]}; }

bool is_empty(const Cell& c) { return c[0] == 0.0 && c[1] == 0.0; }

double manhattan(const Cell& a, const Cell& b) {
  return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]);
}

const std::vector<Cell>& all_cells() {
  static const std::vector<Cell> cells = [] {
    std::vector<Cell> out;
    for (int i = 0; i < SynPlEnv::kSide; ++i) {
      for (int j = 0; j < SynPlEnv::kSide; ++j) {
        out.push_back({i - kSynPlHalf, j - kSynPlHalf});
      }
    }
    return out;  // lexicographic: x, then y
  }();
  return cells;
}

std::vector<Cell> free_cells(const Vector& s, int placed) {
  std::vector<Cell> out;
  for (const auto& c : all_cells()) {
    bool taken = false;
    for (int i = 0; i < placed && !taken; ++i) taken = slot(s, i) == c;
    if (!taken) out.push_back(c);
  }
  return out;
}

void place(Vector& s, int i, const Cell& c) {
  s[2 * i] = c[0];
  s[2 * i + 1] = c[1];
}

// Ring C8 on placements in unit order; branch and bound on total edge length.
struct RingSearch {
  std::array<Cell, SynPlEnv::kUnits> units{};
  std::array<bool, 64> used{};
  double best = std::numeric_limits<double>::infinity();

  static int index(const Cell& c) {
    return static_cast<int>((c[0] + kSynPlHalf) * SynPlEnv::kSide + (c[1] + kSynPlHalf));
  }

  void search(int k, double cost) {
    constexpr int n = SynPlEnv::kUnits;
    if (k == n) {
      best = std::min(best, cost + manhattan(units[n - 1], units[0]));
      return;
    }
    std::vector<Cell> candidates;
    for (const auto& c : all_cells()) {
      if (!used[static_cast<std::size_t>(index(c))]) candidates.push_back(c);
    }
    if (k > 0) {
      std::stable_sort(candidates.begin(), candidates.end(), [&](const Cell& a, const Cell& b) {
        return manhattan(a, units[k - 1]) < manhattan(b, units[k - 1]);
      });
    }
    for (const auto& c : candidates) {
      const double step = k > 0 ? manhattan(c, units[k - 1]) : 0.0;
      // Each of the n - k remaining edges is at least 1 long, and the path
      // back to unit 0 is at least its Manhattan distance.
      const double remaining = k > 0 ? std::max<double>(n - k, manhattan(c, units[0])) : n;
      if (cost + step + remaining >= best) continue;
      units[static_cast<std::size_t>(k)] = c;
      used[static_cast<std::size_t>(index(c))] = true;
      search(k + 1, cost + step);
      used[static_cast<std::size_t>(index(c))] = false;
    }
  }
};

}  // namespace

SynPlEnv::SynPlEnv(std::uint64_t seed, int rollouts, int calibration_episodes)
    : rollouts_(rollouts), group_(d4_block_group(kSlots + 1)) {
  if (rollouts < 1) throw std::invalid_argument("synpl needs at least one rollout");
  if (calibration_episodes < 1) throw std::invalid_argument("synpl needs calibration episodes");

  Rng rng = make_rng(seed, "synpl-calibration");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double total = 0.0;
  for (int ep = 0; ep < calibration_episodes; ++ep) {
    Vector s = Vector::Zero(2 * kSlots);
    for (int t = 0; t < kUnits; ++t) {
      const auto cells = free_cells(s, t);
      std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
      Vector next = s;
      place(next, t, cells[pick(rng)]);
      const double before = estimate_potential(s, rng);
      const double after = estimate_potential(next, rng);
      lo = std::min(lo, after - before);
      hi = std::max(hi, after - before);
      s = std::move(next);
    }
    total += objective(s);
  }
  dmin_ = lo;
  dmax_ = hi > lo ? hi : lo + 1.0;
  random_mean_ = total / calibration_episodes;
}

int SynPlEnv::placed_count(const Vector& s) {
  int n = 0;
  while (n < kUnits && !is_empty(slot(s, n))) ++n;
  return n;
}

double SynPlEnv::objective(const Vector& s) {
  const int n = placed_count(s);
  double total = 0.0;
  for (int i = 0; i < kUnits; ++i) {
    const int j = (i + 1) % kUnits;
    if (i < n && j < n) total += manhattan(slot(s, i), slot(s, j));
  }
  return -total;
}

double SynPlEnv::optimal_objective() {
  static const double value = [] {
    RingSearch search;
    search.search(0, 0.0);
    return -search.best;
  }();
  return value;
}

double SynPlEnv::estimate_potential(const Vector& s, Rng& rng) const {
  const int placed = placed_count(s);
  if (placed == kUnits) return objective(s);
  double total = 0.0;
  for (int r = 0; r < rollouts_; ++r) {
    Vector done = s;
    auto cells = free_cells(s, placed);
    for (int u = placed; u < kUnits; ++u) {
      std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
      const std::size_t k = pick(rng);
      place(done, u, cells[k]);
      cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(k));
    }
    total += objective(done);
  }
  return total / rollouts_;
}

double SynPlEnv::normalize(double difference) const noexcept {
  return std::clamp((difference - dmin_) / (dmax_ - dmin_), 0.0, 1.0);
}

Vector SynPlEnv::reset(std::uint64_t episode_index, std::uint64_t run_seed) {
  rng_ = make_rng(run_seed, "env", episode_index);
  return Vector::Zero(2 * kSlots);
}

bool SynPlEnv::is_terminal(const Vector& s) const { return placed_count(s) == kUnits; }

std::vector<Vector> SynPlEnv::actions(const Vector& s) const {
  std::vector<Vector> out;
  for (const auto& c : free_cells(s, placed_count(s))) out.push_back((Vector(2) << c[0], c[1]).finished());
  return out;
}

StepResult SynPlEnv::step(int h, const Vector& s, const Vector& a) {
  if (h < 1 || h > kUnits) throw std::invalid_argument("step index out of range");
  if (s.size() != 2 * kSlots || a.size() != 2) throw std::invalid_argument("bad synpl shapes");
  const int placed = placed_count(s);
  if (placed == kUnits) throw std::invalid_argument("all units are already placed");
  const Cell cell{a[0], a[1]};
  const auto legal = free_cells(s, placed);
  if (std::find(legal.begin(), legal.end(), cell) == legal.end()) {
    throw std::invalid_argument(fmt::format("cell ({}, {}) is occupied or off the grid", a[0], a[1]));
  }
  Vector next = s;
  place(next, placed, cell);
  const double before = estimate_potential(s, rng_);
  const double after = estimate_potential(next, rng_);
  return {normalize(after - before), next, h == kUnits || placed + 1 == kUnits};
}

double SynPlEnv::optimal_value(const Vector& /*s1*/) const {
  return (optimal_objective() - random_mean_ - kUnits * dmin_) / (dmax_ - dmin_);
}

}  // namespace symrl
