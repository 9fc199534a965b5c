#include "patvar/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "patvar/error.hpp"
#include "patvar/strings.hpp"

namespace patvar {

Vector HashedEmbedder::embed(std::string_view text) const {
  Vector v(dim_, 0.0);
  for (const auto& w : bag_of_words(text, provider_)) v[str::fnv1a(w) % dim_] += 1.0;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0) {
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
  }
  return v;
}

double cosine(const Vector& a, const Vector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double squared_distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

KMeansResult kmeans(const std::vector<Vector>& vectors, std::size_t k, std::uint64_t seed,
                    int max_iter) {
  const std::size_t n = vectors.size();
  if (k == 0 || k > n) throw KOverN(k, n);
  std::mt19937_64 rng(seed);
  const std::size_t dim = vectors.front().size();

  KMeansResult r;
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  r.centroids.push_back(vectors[first]);
  chosen[first] = true;
  while (r.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(vectors[i], r.centroids.back()));
      if (!chosen[i]) total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        pick = i;
        if (u < d2[i]) break;
        u -= d2[i];
      }
    } else {
      for (std::size_t i = 0; i < n && pick == n; ++i)
        if (!chosen[i]) pick = i;
    }
    chosen[pick] = true;
    r.centroids.push_back(vectors[pick]);
  }

  r.assignments.assign(n, k);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(vectors[i], r.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        double d = squared_distance(vectors[i], r.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (r.assignments[i] != best) {
        r.assignments[i] = best;
        changed = true;
      }
    }

    std::vector<std::size_t> sizes(k, 0);
    for (auto a : r.assignments) ++sizes[a];
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      const auto largest =
          static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (r.assignments[i] != largest) continue;
        double d = squared_distance(vectors[i], r.centroids[largest]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      r.assignments[far] = c;
      --sizes[largest];
      ++sizes[c];
      changed = true;
    }

    for (std::size_t c = 0; c < k; ++c) r.centroids[c].assign(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < dim; ++j) r.centroids[r.assignments[i]][j] += vectors[i][j];
    for (std::size_t c = 0; c < k; ++c)
      for (auto& x : r.centroids[c]) x /= static_cast<double>(sizes[c]);

    if (!changed) break;
  }

  for (std::size_t i = 0; i < n; ++i)
    r.inertia += squared_distance(vectors[i], r.centroids[r.assignments[i]]);
  return r;
}

std::vector<std::size_t> select_random(std::size_t pool_size, std::size_t n, std::uint64_t seed) {
  if (n > pool_size) throw NOverPool(n, pool_size);
  std::vector<std::size_t> order(pool_size);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(n);
  return order;
}

std::vector<std::size_t> cluster_rotation(const std::vector<Vector>& vectors, std::size_t k,
                                          std::uint64_t seed) {
  if (vectors.empty()) return {};
  auto km = kmeans(vectors, k, seed);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < vectors.size(); ++i) members[km.assignments[i]].push_back(i);
  for (std::size_t c = 0; c < k; ++c) {
    auto& m = members[c];
    std::stable_sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) {
      return squared_distance(vectors[a], km.centroids[c]) <
             squared_distance(vectors[b], km.centroids[c]);
    });
  }
  std::vector<std::size_t> order;
  std::vector<std::size_t> next(k, 0);
  while (order.size() < vectors.size()) {
    for (std::size_t c = 0; c < k; ++c)
      if (next[c] < members[c].size()) order.push_back(members[c][next[c]++]);
  }
  return order;
}

std::vector<std::size_t> select_cluster(const std::vector<Vector>& vectors, std::size_t n,
                                        std::size_t k, std::uint64_t seed) {
  if (n > vectors.size()) throw NOverPool(n, vectors.size());
  auto order = cluster_rotation(vectors, k, seed);
  order.resize(n);
  return order;
}

std::vector<std::size_t> select_uncertainty(const std::vector<std::string>& pool, std::size_t n,
                                            const Classifier& clf) {
  if (!clf.trained()) throw UntrainedClassifier();
  if (n > pool.size()) throw NOverPool(n, pool.size());
  std::vector<double> conf(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) conf[i] = clf.predict(pool[i]).confidence;
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return conf[a] < conf[b]; });
  order.resize(n);
  return order;
}

}  // namespace patvar
