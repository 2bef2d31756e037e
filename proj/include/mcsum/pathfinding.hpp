#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "mcsum/error.hpp"
#include "mcsum/markov.hpp"

namespace mcsum {

enum class PathMethod { kDp, kBrute, kGreedy };

inline std::string_view to_string(PathMethod m) {
  switch (m) {
    case PathMethod::kDp: return "dp";
    case PathMethod::kBrute: return "brute";
    case PathMethod::kGreedy: return "greedy";
  }
  return "unknown";
}

inline PathMethod path_method_from_string(std::string_view s) {
  if (s == "dp") return PathMethod::kDp;
  if (s == "brute") return PathMethod::kBrute;
  if (s == "greedy") return PathMethod::kGreedy;
  throw Error(ErrorKind::kParse, "unknown path method '" + std::string(s) + "'");
}

struct HamiltonianPath {
  std::vector<std::size_t> order;
  double log_prob = 0.0;  // -inf when the path crosses a zero-probability edge
  PathMethod method = PathMethod::kDp;

  double probability() const { return std::exp(log_prob); }
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr std::size_t kDefaultDpCap = 22;
inline constexpr std::size_t kBruteForceCap = 10;

inline double log_edge(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

/// Sum of log edge probabilities along `order`. Terms are accumulated from
/// the last edge backwards, the same association the DP uses, so equal paths
/// score bit-identically in every solver.
inline double path_probability(const TransitionMatrix& t, const std::vector<std::size_t>& order) {
  std::vector<bool> seen(t.k, false);
  if (order.size() != t.k) throw Error(ErrorKind::kContract, "path is not a permutation of the clusters");
  for (auto v : order) {
    if (v >= t.k || seen[v]) throw Error(ErrorKind::kContract, "path is not a permutation of the clusters");
    seen[v] = true;
  }
  double acc = 0.0;
  for (std::size_t step = order.size(); step-- > 1;) acc = acc + log_edge(t(order[step - 1], order[step]));
  return acc;
}

/// Subset DP table over a transition matrix. dp(subset, i) is the best log
/// probability of a path visiting exactly the nodes of `subset` and ending at
/// i; parent(subset, i) is the node preceding i on that path (kNone for
/// single-node subsets).
class HeldKarpTable {
 public:
  static constexpr std::uint8_t kNone = 0xFF;

  explicit HeldKarpTable(const TransitionMatrix& t) : k_(t.k) {
    const std::size_t subsets = std::size_t{1} << k_;
    dp_.assign(subsets * k_, kNegInf);
    parent_.assign(subsets * k_, kNone);

    std::vector<double> logp(k_ * k_);
    for (std::size_t i = 0; i < k_ * k_; ++i) logp[i] = log_edge(t.probs[i]);

    for (std::size_t i = 0; i < k_; ++i) dp_[(std::size_t{1} << i) * k_ + i] = 0.0;

    // Removing a bit always yields a smaller integer, so ascending numeric
    // order finishes every S \ {i} before S.
    for (std::size_t subset = 1; subset < subsets; ++subset) {
      if (std::has_single_bit(subset)) continue;
      for (auto ends = subset; ends != 0; ends &= ends - 1) {
        const auto i = static_cast<std::size_t>(std::countr_zero(ends));
        const std::size_t prev = subset ^ (std::size_t{1} << i);
        const double* prev_row = &dp_[prev * k_];
        double best = kNegInf;
        std::uint8_t best_j = kNone;
        for (auto preds = prev; preds != 0; preds &= preds - 1) {
          const auto j = static_cast<std::size_t>(std::countr_zero(preds));
          const double cand = prev_row[j] + logp[j * k_ + i];
          if (best_j == kNone || cand > best) {
            best = cand;
            best_j = static_cast<std::uint8_t>(j);
          }
        }
        dp_[subset * k_ + i] = best;
        parent_[subset * k_ + i] = best_j;
      }
    }
  }

  std::size_t k() const noexcept { return k_; }
  double dp(std::size_t subset, std::size_t end) const { return dp_[subset * k_ + end]; }
  std::uint8_t parent(std::size_t subset, std::size_t end) const { return parent_[subset * k_ + end]; }

 private:
  std::size_t k_;
  std::vector<double> dp_;
  std::vector<std::uint8_t> parent_;
};

inline TransitionMatrix transposed(const TransitionMatrix& t) {
  TransitionMatrix r;
  r.k = t.k;
  r.probs.resize(t.probs.size());
  for (std::size_t i = 0; i < t.k; ++i) {
    for (std::size_t j = 0; j < t.k; ++j) r(j, i) = t(i, j);
  }
  return r;
}

/// Exact most probable Hamiltonian path, free endpoints, O(k^2 2^k) time.
/// Among equally probable paths the lexicographically smallest order wins.
///
/// The table is built on the transposed matrix: a path ending at i there is,
/// read backwards, a path starting at i in the original. Choosing the
/// smallest optimal end node and then the recorded (smallest) parents yields
/// the lexicographically smallest optimal order front to back.
inline HamiltonianPath solve_dp(const TransitionMatrix& t, std::size_t cap = kDefaultDpCap) {
  if (t.k == 0) throw Error(ErrorKind::kContract, "path solver needs at least one cluster");
  if (cap > 30) throw Error(ErrorKind::kContract, "DP cap above 30 is not supported");
  if (t.k > cap) {
    throw Error(ErrorKind::kInfeasible, "k=" + std::to_string(t.k) + " exceeds the DP cap of " + std::to_string(cap) +
                                            "; use the greedy solver");
  }
  const HeldKarpTable table(transposed(t));
  const std::size_t full = (std::size_t{1} << t.k) - 1;

  std::size_t start = 0;
  for (std::size_t i = 1; i < t.k; ++i) {
    if (table.dp(full, i) > table.dp(full, start)) start = i;
  }

  HamiltonianPath path;
  path.method = PathMethod::kDp;
  path.log_prob = table.dp(full, start);
  if (path.log_prob == kNegInf) {
    // Every ordering crosses a zero edge, so all tie; the smallest is the identity.
    path.order.resize(t.k);
    std::iota(path.order.begin(), path.order.end(), std::size_t{0});
    return path;
  }
  std::size_t subset = full;
  std::size_t node = start;
  path.order.push_back(node);
  while (!std::has_single_bit(subset)) {
    const auto next = table.parent(subset, node);
    subset ^= std::size_t{1} << node;
    node = next;
    path.order.push_back(node);
  }
  return path;
}

/// Exhaustive O(k * k!) search in lexicographic permutation order; refuses k > 10.
inline HamiltonianPath solve_brute_force(const TransitionMatrix& t) {
  if (t.k == 0) throw Error(ErrorKind::kContract, "path solver needs at least one cluster");
  if (t.k > kBruteForceCap) {
    throw Error(ErrorKind::kInfeasible, "brute force refuses k=" + std::to_string(t.k) + " (limit " +
                                            std::to_string(kBruteForceCap) + ")");
  }
  std::vector<std::size_t> perm(t.k);
  std::iota(perm.begin(), perm.end(), 0);
  HamiltonianPath best{perm, path_probability(t, perm), PathMethod::kBrute};
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double lp = path_probability(t, perm);
    if (lp > best.log_prob) {
      best.order = perm;
      best.log_prob = lp;
    }
  }
  return best;
}

/// Best of k nearest-neighbour walks, one from each start node; each step
/// takes the most probable unvisited successor (lowest id on ties).
inline HamiltonianPath solve_greedy(const TransitionMatrix& t) {
  if (t.k == 0) throw Error(ErrorKind::kContract, "path solver needs at least one cluster");
  HamiltonianPath best;
  best.method = PathMethod::kGreedy;
  for (std::size_t start = 0; start < t.k; ++start) {
    std::vector<bool> visited(t.k, false);
    std::vector<std::size_t> order{start};
    visited[start] = true;
    while (order.size() < t.k) {
      const auto cur = order.back();
      std::size_t next = t.k;
      for (std::size_t j = 0; j < t.k; ++j) {
        if (visited[j]) continue;
        if (next == t.k || t(cur, j) > t(cur, next)) next = j;
      }
      visited[next] = true;
      order.push_back(next);
    }
    const double lp = path_probability(t, order);
    if (start == 0 || lp > best.log_prob) {
      best.order = std::move(order);
      best.log_prob = lp;
    }
  }
  return best;
}

/// DP when k fits under `cap`, greedy otherwise.
inline HamiltonianPath solve_path(const TransitionMatrix& t, std::size_t cap = kDefaultDpCap) {
  return t.k <= cap ? solve_dp(t, cap) : solve_greedy(t);
}

}  // namespace mcsum
