#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mcsum/error.hpp"
#include "mcsum/rng.hpp"

namespace mcsum {

/// Row-stochastic k x k matrix of cluster-to-cluster transition
/// probabilities, stored row-major. Rows of clusters with no observed
/// outgoing transition are all zero and listed in `zero_rows`.
struct TransitionMatrix {
  std::size_t k = 0;
  std::vector<double> probs;
  std::vector<std::size_t> zero_rows;  // ascending

  double operator()(std::size_t from, std::size_t to) const { return probs[from * k + to]; }
  double& operator()(std::size_t from, std::size_t to) { return probs[from * k + to]; }

  bool is_zero_row(std::size_t row) const {
    for (auto r : zero_rows) {
      if (r == row) return true;
    }
    return false;
  }

  std::vector<std::vector<double>> rows() const {
    std::vector<std::vector<double>> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i].assign(probs.begin() + i * k, probs.begin() + (i + 1) * k);
    return out;
  }

  /// Builds a matrix from explicit rows; all-zero rows are recorded as zero rows.
  static TransitionMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    TransitionMatrix t;
    t.k = rows.size();
    t.probs.reserve(t.k * t.k);
    for (std::size_t i = 0; i < t.k; ++i) {
      if (rows[i].size() != t.k) throw Error(ErrorKind::kContract, "transition matrix must be square");
      bool all_zero = true;
      for (double p : rows[i]) {
        t.probs.push_back(p);
        all_zero = all_zero && p == 0.0;
      }
      if (all_zero) t.zero_rows.push_back(i);
    }
    return t;
  }

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;
};

/// count[i * k + j] = number of positions t with labels[t] == i and labels[t + 1] == j.
inline std::vector<std::size_t> count_transitions(const std::vector<std::size_t>& labels, std::size_t k) {
  std::vector<std::size_t> counts(k * k, 0);
  for (auto l : labels) {
    if (l >= k) {
      throw Error(ErrorKind::kContract,
                  "label " + std::to_string(l) + " out of range for k=" + std::to_string(k));
    }
  }
  for (std::size_t t = 0; t + 1 < labels.size(); ++t) ++counts[labels[t] * k + labels[t + 1]];
  return counts;
}

/// Drops consecutive repeats: [0,0,1,1,0] -> [0,1,0].
inline std::vector<std::size_t> collapse_runs(const std::vector<std::size_t>& labels) {
  std::vector<std::size_t> out;
  for (auto l : labels) {
    if (out.empty() || out.back() != l) out.push_back(l);
  }
  return out;
}

/// Maximum-likelihood transition estimate: each observed pair (i -> j),
/// self-transitions included, divided by the total outgoing count of i.
inline TransitionMatrix build_transition_matrix(const std::vector<std::size_t>& labels, std::size_t k,
                                                bool collapse_repeats = false) {
  if (labels.empty()) throw Error(ErrorKind::kContract, "transition matrix needs at least one label");
  if (k == 0) throw Error(ErrorKind::kContract, "transition matrix needs k >= 1");
  const auto counts = count_transitions(collapse_repeats ? collapse_runs(labels) : labels, k);

  TransitionMatrix t;
  t.k = k;
  t.probs.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t total = 0;
    for (std::size_t j = 0; j < k; ++j) total += counts[i * k + j];
    if (total == 0) {
      t.zero_rows.push_back(i);
      continue;
    }
    for (std::size_t j = 0; j < k; ++j) {
      t.probs[i * k + j] = static_cast<double>(counts[i * k + j]) / static_cast<double>(total);
    }
  }
  return t;
}

inline bool validate_row_stochastic(const TransitionMatrix& t, double tol = 1e-9) {
  if (t.probs.size() != t.k * t.k) return false;
  for (std::size_t i = 0; i < t.k; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < t.k; ++j) {
      const double p = t(i, j);
      if (!(p >= 0.0 && p <= 1.0)) return false;
      sum += p;
    }
    if (t.is_zero_row(i)) {
      if (sum != 0.0) return false;
    } else if (std::abs(sum - 1.0) > tol) {
      return false;
    }
  }
  return true;
}

/// Dense random row-stochastic matrix with entries drawn uniform in (0, 1]
/// before normalization. Used by benchmarks and property tests.
inline TransitionMatrix random_row_stochastic(std::size_t k, Rng& rng) {
  TransitionMatrix t;
  t.k = k;
  t.probs.resize(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double w = 1.0 - rng.uniform();
      t(i, j) = w;
      sum += w;
    }
    for (std::size_t j = 0; j < k; ++j) t(i, j) /= sum;
  }
  return t;
}

}  // namespace mcsum
