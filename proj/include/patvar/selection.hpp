#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "patvar/annotation.hpp"
#include "patvar/classifier.hpp"

namespace patvar {

using Vector = std::vector<double>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Vector embed(std::string_view text) const = 0;
};

/// Hashed bag-of-lemmas, L2-normalized. Empty text maps to the zero vector.
class HashedEmbedder final : public Embedder {
 public:
  explicit HashedEmbedder(std::size_t dim = 64, const AnnotationProvider* provider = nullptr)
      : dim_(dim), provider_(provider) {}
  Vector embed(std::string_view text) const override;

 private:
  std::size_t dim_;
  const AnnotationProvider* provider_;
};

double cosine(const Vector& a, const Vector& b);
double squared_distance(const Vector& a, const Vector& b);

struct KMeansResult {
  std::vector<std::size_t> assignments;
  std::vector<Vector> centroids;
  double inertia = 0.0;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment stops
/// changing or max_iter. An empty cluster takes the point of the largest
/// cluster that lies farthest from its centroid. Throws KOverN.
KMeansResult kmeans(const std::vector<Vector>& vectors, std::size_t k, std::uint64_t seed,
                    int max_iter = 100);

/// First n entries of a seeded permutation of [0, pool_size); selections for
/// growing n with one seed are nested. Throws NOverPool.
std::vector<std::size_t> select_random(std::size_t pool_size, std::size_t n, std::uint64_t seed);

/// Full rotation order over the clusters: cluster 0, 1, ..., k-1, 0, ...,
/// each visit taking the unvisited member nearest its centroid; exhausted
/// clusters are skipped.
std::vector<std::size_t> cluster_rotation(const std::vector<Vector>& vectors, std::size_t k,
                                          std::uint64_t seed);

/// First n entries of cluster_rotation. Throws NOverPool.
std::vector<std::size_t> select_cluster(const std::vector<Vector>& vectors, std::size_t n,
                                        std::size_t k, std::uint64_t seed);

/// The n texts with the lowest classifier confidence; ties keep pool order.
/// Throws UntrainedClassifier, NOverPool.
std::vector<std::size_t> select_uncertainty(const std::vector<std::string>& pool, std::size_t n,
                                            const Classifier& clf);

}  // namespace patvar
