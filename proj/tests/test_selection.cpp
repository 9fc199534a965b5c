#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "patvar/error.hpp"
#include "patvar/selection.hpp"

using namespace patvar;

namespace {

std::vector<Vector> points_1d(const std::vector<double>& xs) {
  std::vector<Vector> out;
  for (double x : xs) out.push_back({x});
  return out;
}

// Minimum within-cluster sum of squares over every assignment of the points
// to k non-empty clusters.
double optimal_inertia(const std::vector<Vector>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> assign(n, 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto a : assign) ++sizes[a];
    if (std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; })) {
      const std::size_t dim = pts[0].size();
      std::vector<Vector> centroids(k, Vector(dim, 0.0));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) centroids[assign[i]][j] += pts[i][j] / sizes[assign[i]];
      double total = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j)
          total += std::pow(pts[i][j] - centroids[assign[i]][j], 2);
      best = std::min(best, total);
    }
    std::size_t pos = 0;
    while (pos < n && ++assign[pos] == k) assign[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

struct FixedConfidence final : Classifier {
  std::vector<double> conf;
  bool is_trained = true;
  void train(const std::vector<TrainingItem>&) override {}
  Prediction predict(std::string_view text) const override {
    return {"x", conf[static_cast<std::size_t>(std::stoi(std::string(text)))]};
  }
  bool trained() const override { return is_trained; }
};

}  // namespace

TEST_CASE("kmeans on two well-separated pairs") {
  auto pts = points_1d({0, 0.1, 10, 10.1});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = kmeans(pts, 2, seed);
    CHECK(r.assignments[0] == r.assignments[1]);
    CHECK(r.assignments[2] == r.assignments[3]);
    CHECK(r.assignments[0] != r.assignments[2]);
    CHECK(r.inertia == doctest::Approx(optimal_inertia(pts, 2)));
    CHECK(r.inertia == doctest::Approx(0.01));
  }
}

TEST_CASE("kmeans edge cases") {
  auto pts = points_1d({1, 2, 6, 9});
  auto all = kmeans(pts, 4, 1);
  CHECK(all.inertia == doctest::Approx(0.0));
  auto one = kmeans(pts, 1, 1);
  CHECK(one.centroids[0][0] == doctest::Approx(4.5));
  CHECK(one.inertia == doctest::Approx(optimal_inertia(pts, 1)));
  CHECK_THROWS_AS(kmeans(pts, 5, 1), KOverN);
}

TEST_CASE("kmeans with duplicate points keeps every cluster non-empty") {
  auto pts = points_1d({3, 3, 3, 3, 3});
  auto r = kmeans(pts, 3, 9);
  std::set<std::size_t> used(r.assignments.begin(), r.assignments.end());
  CHECK(used.size() == 3);
  CHECK(r.inertia == doctest::Approx(0.0));
}

TEST_CASE("kmeans never beats the exhaustive optimum and is deterministic") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0, 10);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Vector> pts;
    for (int i = 0; i < 7; ++i) pts.push_back({u(rng), u(rng)});
    for (std::size_t k : {2, 3}) {
      auto r = kmeans(pts, k, static_cast<std::uint64_t>(trial));
      CHECK(r.inertia >= optimal_inertia(pts, k) - 1e-9);
      CHECK(kmeans(pts, k, static_cast<std::uint64_t>(trial)).assignments == r.assignments);
    }
  }
}

TEST_CASE("random selection: nested prefixes, distinct, deterministic") {
  auto big = select_random(50, 30, 7);
  auto small = select_random(50, 10, 7);
  CHECK(std::equal(small.begin(), small.end(), big.begin()));
  CHECK(std::set<std::size_t>(big.begin(), big.end()).size() == 30);
  CHECK(select_random(50, 30, 7) == big);
  CHECK(select_random(50, 30, 8) != big);
  CHECK(select_random(5, 0, 1).empty());
  CHECK_THROWS_AS(select_random(5, 6, 1), NOverPool);
}

TEST_CASE("cluster rotation alternates between clusters") {
  auto pts = points_1d({0, 0.1, 10, 10.1, 0.2, 10.2});
  auto order = cluster_rotation(pts, 2, 3);
  REQUIRE(order.size() == 6);
  CHECK(std::set<std::size_t>(order.begin(), order.end()).size() == 6);
  auto side = [&](std::size_t i) { return pts[i][0] > 5; };
  for (std::size_t i = 0; i + 1 < order.size(); i += 2) CHECK(side(order[i]) != side(order[i + 1]));
  // Each cluster is visited nearest-to-centroid first.
  CHECK((order[0] == 1 || order[0] == 3));
  auto sel = select_cluster(pts, 4, 2, 3);
  CHECK(std::equal(sel.begin(), sel.end(), order.begin()));
  CHECK_THROWS_AS(select_cluster(pts, 7, 2, 3), NOverPool);
}

TEST_CASE("cluster rotation skips exhausted clusters") {
  auto pts = points_1d({0, 10, 10.1, 10.2, 10.3});
  auto order = cluster_rotation(pts, 2, 1);
  REQUIRE(order.size() == 5);
  CHECK(std::set<std::size_t>(order.begin(), order.end()).size() == 5);
}

TEST_CASE("uncertainty selection picks the least confident") {
  FixedConfidence clf;
  clf.conf = {0.9, 0.1, 0.5};
  CHECK(select_uncertainty({"0", "1", "2"}, 2, clf) == std::vector<std::size_t>{1, 2});
  clf.conf = {0.4, 0.4, 0.2};
  CHECK(select_uncertainty({"0", "1", "2"}, 3, clf) == std::vector<std::size_t>{2, 0, 1});
  CHECK_THROWS_AS(select_uncertainty({"0"}, 2, clf), NOverPool);
  clf.is_trained = false;
  CHECK_THROWS_AS(select_uncertainty({"0"}, 1, clf), UntrainedClassifier);
}

TEST_CASE("hashed embedder") {
  HashedEmbedder e(16);
  auto a = e.embed("cheap food here");
  auto b = e.embed("Food here, cheap!");
  double norm = 0;
  for (double x : a) norm += x * x;
  CHECK(a.size() == 16);
  CHECK(norm == doctest::Approx(1.0));
  CHECK(cosine(a, b) == doctest::Approx(1.0));
  auto z = e.embed("");
  CHECK(std::all_of(z.begin(), z.end(), [](double x) { return x == 0.0; }));
  CHECK(squared_distance({0, 3}, {4, 0}) == doctest::Approx(25.0));
}
