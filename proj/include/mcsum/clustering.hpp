#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "mcsum/embeddings.hpp"
#include "mcsum/error.hpp"
#include "mcsum/rng.hpp"

namespace mcsum {

struct ClusterAssignment {
  std::vector<std::size_t> labels;  // chunk order; this is the sequence fed to the Markov model
  std::vector<EmbeddingVector> centroids;
  double inertia = 0.0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::size_t restart = 0;
  std::vector<double> inertia_history;  // inertia after each Lloyd iteration of the winning run
};

struct ClusterRepresentatives {
  // per_cluster[c] holds chunk indices of cluster c, closest to the centroid first.
  std::vector<std::vector<std::size_t>> per_cluster;
};

struct KMeansOptions {
  std::size_t max_iters = 100;
  double tol = 1e-6;
  // Independent k-means++ restarts; the lowest-inertia run is kept.
  std::size_t n_init = 10;
};

inline double squared_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

inline std::size_t count_distinct(const std::vector<EmbeddingVector>& vectors) {
  std::vector<const std::vector<double>*> refs;
  refs.reserve(vectors.size());
  for (const auto& v : vectors) refs.push_back(&v.values());
  std::sort(refs.begin(), refs.end(), [](auto* a, auto* b) { return *a < *b; });
  return static_cast<std::size_t>(
      std::unique(refs.begin(), refs.end(), [](auto* a, auto* b) { return *a == *b; }) - refs.begin());
}

namespace detail {

inline void check_feasible(const std::vector<EmbeddingVector>& vectors, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::kContract, "k-means needs k >= 1");
  if (vectors.empty()) throw Error(ErrorKind::kContract, "k-means needs at least one vector");
  const auto dim = vectors.front().dim();
  for (const auto& v : vectors) {
    if (v.dim() != dim) throw Error(ErrorKind::kContract, "k-means input vectors differ in dimension");
  }
  const auto distinct = count_distinct(vectors);
  if (k > distinct) {
    throw Error(ErrorKind::kInfeasible, "k=" + std::to_string(k) + " exceeds the number of distinct vectors (" +
                                            std::to_string(distinct) + ")");
  }
}

}  // namespace detail

/// k-means++ seeding; returns indices into `vectors`. The first pick is
/// uniform, each further pick has probability proportional to the squared
/// distance to the nearest centroid chosen so far.
inline std::vector<std::size_t> kmeanspp_seed_indices(const std::vector<EmbeddingVector>& vectors, std::size_t k,
                                                      std::uint64_t seed) {
  detail::check_feasible(vectors, k);
  Rng rng(seed);
  const std::size_t n = vectors.size();

  std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.below(n))};
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(vectors[i], vectors[chosen[0]]);

  while (chosen.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    const double target = rng.uniform() * total;

    std::size_t pick = n;
    std::size_t last_positive = n;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      last_positive = i;
      cumulative += d2[i];
      if (cumulative > target) {
        pick = i;
        break;
      }
    }
    if (pick == n) pick = last_positive;  // rounding left target at the very end
    chosen.push_back(pick);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(vectors[i], vectors[pick]));
  }
  return chosen;
}

inline std::vector<EmbeddingVector> kmeanspp_seed(const std::vector<EmbeddingVector>& vectors, std::size_t k,
                                                  std::uint64_t seed) {
  std::vector<EmbeddingVector> centroids;
  for (auto idx : kmeanspp_seed_indices(vectors, k, seed)) centroids.push_back(vectors[idx]);
  return centroids;
}

namespace detail {

inline std::size_t nearest_centroid(const EmbeddingVector& v, const std::vector<EmbeddingVector>& centroids) {
  std::size_t best = 0;
  double best_d = squared_distance(v, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = squared_distance(v, centroids[c]);
    if (d < best_d) {  // strict: lowest id wins ties
      best_d = d;
      best = c;
    }
  }
  return best;
}

// Gives every empty cluster the point lying farthest from its own centroid,
// taken from a cluster that keeps at least one member.
inline void repair_empty_clusters(const std::vector<EmbeddingVector>& vectors, std::vector<std::size_t>& labels,
                                  std::vector<EmbeddingVector>& centroids) {
  const std::size_t k = centroids.size();
  std::vector<std::size_t> sizes(k, 0);
  for (auto l : labels) ++sizes[l];
  for (std::size_t c = 0; c < k; ++c) {
    if (sizes[c] != 0) continue;
    std::size_t far = vectors.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (sizes[labels[i]] < 2) continue;
      const double d = squared_distance(vectors[i], centroids[labels[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    assert(far < vectors.size());
    --sizes[labels[far]];
    labels[far] = c;
    sizes[c] = 1;
    centroids[c] = vectors[far];
  }
}

inline std::vector<EmbeddingVector> cluster_means(const std::vector<EmbeddingVector>& vectors,
                                                  const std::vector<std::size_t>& labels, std::size_t k) {
  const std::size_t dim = vectors.front().dim();
  std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    auto& s = sums[labels[i]];
    for (std::size_t d = 0; d < dim; ++d) s[d] += vectors[i][d];
    ++sizes[labels[i]];
  }
  std::vector<EmbeddingVector> means;
  means.reserve(k);
  for (std::size_t c = 0; c < k; ++c) {
    for (double& x : sums[c]) x /= static_cast<double>(sizes[c]);
    means.emplace_back(std::move(sums[c]));
  }
  return means;
}

inline double inertia_of(const std::vector<EmbeddingVector>& vectors, const std::vector<std::size_t>& labels,
                         const std::vector<EmbeddingVector>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) total += squared_distance(vectors[i], centroids[labels[i]]);
  return total;
}

}  // namespace detail

namespace detail {

inline ClusterAssignment lloyd(const std::vector<EmbeddingVector>& vectors, std::size_t k, std::uint64_t seed,
                               const KMeansOptions& opts) {
  ClusterAssignment result;
  result.k = k;
  result.seed = seed;
  auto centroids = kmeanspp_seed(vectors, k, seed);
  std::vector<std::size_t> labels(vectors.size(), 0);

  for (std::size_t iter = 0; iter < std::max<std::size_t>(1, opts.max_iters); ++iter) {
    for (std::size_t i = 0; i < vectors.size(); ++i) labels[i] = nearest_centroid(vectors[i], centroids);
    repair_empty_clusters(vectors, labels, centroids);

    auto updated = cluster_means(vectors, labels, k);
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, std::sqrt(squared_distance(updated[c], centroids[c])));
    centroids = std::move(updated);

    const double inertia = inertia_of(vectors, labels, centroids);
    assert(result.inertia_history.empty() ||
           inertia <= result.inertia_history.back() + 1e-12 * std::max(1.0, result.inertia_history.back()));
    result.inertia_history.push_back(inertia);
    result.iterations = iter + 1;
    if (shift < opts.tol) break;
  }

  result.labels = std::move(labels);
  result.centroids = std::move(centroids);
  result.inertia = result.inertia_history.back();
  return result;
}

// Seed of restart r; restart 0 uses the caller's seed unchanged.
inline std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart) {
  if (restart == 0) return seed;
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * restart;  // splitmix64 finalizer
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Lloyd's algorithm from k-means++ seeds. Each run stops once no centroid
/// moves by `tol` or more (Euclidean), or after `max_iters` iterations; the
/// best of `n_init` runs is returned. `seed` in the result is the caller's
/// seed, `restart` tells which run won.
inline ClusterAssignment kmeans(const std::vector<EmbeddingVector>& vectors, std::size_t k, std::uint64_t seed,
                                const KMeansOptions& opts = {}) {
  detail::check_feasible(vectors, k);
  ClusterAssignment best;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, opts.n_init); ++r) {
    auto run = detail::lloyd(vectors, k, detail::restart_seed(seed, r), opts);
    if (r == 0 || run.inertia < best.inertia) {
      best = std::move(run);
      best.restart = r;
    }
  }
  best.seed = seed;
  return best;
}

/// Up to `top_k` members per cluster, nearest to the centroid first; equal
/// distances keep chunk order.
inline ClusterRepresentatives representatives(const ClusterAssignment& assignment,
                                              const std::vector<EmbeddingVector>& vectors, std::size_t top_k = 5) {
  ClusterRepresentatives reps;
  reps.per_cluster.resize(assignment.k);
  std::vector<std::vector<std::pair<double, std::size_t>>> members(assignment.k);
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    const auto c = assignment.labels[i];
    members[c].emplace_back(squared_distance(vectors[i], assignment.centroids[c]), i);
  }
  for (std::size_t c = 0; c < assignment.k; ++c) {
    auto& m = members[c];
    std::sort(m.begin(), m.end());
    const auto take = std::min(top_k, m.size());
    for (std::size_t j = 0; j < take; ++j) reps.per_cluster[c].push_back(m[j].second);
  }
  return reps;
}

struct ChooseKConfig {
  std::optional<std::size_t> explicit_k;
  std::size_t min_k = 2;
  std::size_t max_k = 22;
};

/// Explicit k when configured, otherwise clamp(round(sqrt(n / 2)), 2, 22);
/// never more than the number of chunks.
inline std::size_t choose_k(std::size_t num_chunks, const ChooseKConfig& cfg = {}) {
  if (num_chunks == 0) throw Error(ErrorKind::kContract, "choose_k needs at least one chunk");
  std::size_t k = 0;
  if (cfg.explicit_k) {
    k = *cfg.explicit_k;
  } else {
    const auto raw = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(num_chunks) / 2.0)));
    k = std::clamp(raw, cfg.min_k, cfg.max_k);
  }
  return std::max<std::size_t>(1, std::min(k, num_chunks));
}

}  // namespace mcsum
