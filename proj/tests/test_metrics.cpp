#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "geoclust/errors.hpp"
#include "geoclust/metrics.hpp"
#include "geoclust/synthetic.hpp"
#include "geoclust/ward.hpp"
#include "support/oracles.hpp"

using geoclust::DegenerateDataError;
using geoclust::DissimilarityMatrix;
using geoclust::Partition;
using geoclust::ValidationError;
using geoclust::WeightVector;

namespace {
Partition make_partition(std::vector<int> assignment, int k) {
  Partition p;
  p.assignment = std::move(assignment);
  p.k = k;
  return p;
}
}  // namespace

TEST_CASE("pseudo-inertia closed forms") {
  const auto d = geoclust::validate_matrix({{0, 1}, {1, 0}}, "m");

  CHECK(geoclust::pseudo_inertia({0}, d, WeightVector::uniform(2)) == 0.0);

  // Two points, d = 1, uniform weights 1/2: (w w / 2 sum_w) counted for both
  // ordered pairs = 2 * (0.25 / 2) * 1 = 0.25.
  CHECK(geoclust::pseudo_inertia({0, 1}, d, WeightVector::uniform(2)) ==
        doctest::Approx(0.25).epsilon(1e-15));

  // Unit weights w = (1,1): 2 * (1 / 4) * 1 = 0.5.
  CHECK(geoclust::pseudo_inertia({0, 1}, d, WeightVector::from_values({1.0, 1.0})) ==
        doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(geoclust::pseudo_inertia({}, d, WeightVector::uniform(2)), ValidationError);
}

TEST_CASE("within-inertia boundary partitions") {
  const auto d = geoclust::random_matrix(6, 71, "m");
  const auto w = WeightVector::uniform(6);
  CHECK(geoclust::within_inertia(make_partition({1, 2, 3, 4, 5, 6}, 6), d, w) == 0.0);

  std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
  CHECK(geoclust::within_inertia(make_partition({1, 1, 1, 1, 1, 1}, 1), d, w) ==
        doctest::Approx(geoclust::pseudo_inertia(all, d, w)).epsilon(1e-14));
}

TEST_CASE("within-inertia is linear at the squared level") {
  std::mt19937_64 rng(73);
  const auto d0 = geoclust::random_matrix(8, 79, "a");
  const auto d1 = geoclust::random_matrix(8, 83, "b");
  const auto w = WeightVector::uniform(8);
  for (const double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    // Random partition into <= 3 clusters, canonicalized by first appearance.
    std::vector<int> a(8);
    std::map<int, int> remap;
    for (std::size_t i = 0; i < 8; ++i) {
      const int raw = static_cast<int>(rng() % 3);
      if (remap.find(raw) == remap.end()) remap[raw] = static_cast<int>(remap.size()) + 1;
      a[i] = remap[raw];
    }
    const int k = static_cast<int>(remap.size());
    const Partition p = make_partition(a, k);

    // Path 1: inertia on the matrix whose squared entries are the mixture.
    DissimilarityMatrix mixed_sq(8, "mixed");
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 8; ++j) {
        mixed_sq.at(i, j) = (1 - alpha) * d0(i, j) * d0(i, j) + alpha * d1(i, j) * d1(i, j);
      }
    }
    const double path1 = geoclust::within_inertia_presquared(p, mixed_sq, w);
    // Path 2: the same mixture of per-matrix inertias.
    const double path2 = (1 - alpha) * geoclust::within_inertia(p, d0, w) +
                         alpha * geoclust::within_inertia(p, d1, w);
    CHECK(std::abs(path1 - path2) <= 1e-12);
  }
}

TEST_CASE("explained share boundaries and oracle check") {
  const auto d = geoclust::random_matrix(3, 89, "m");
  const auto w = WeightVector::uniform(3);
  CHECK(geoclust::explained_q(make_partition({1, 1, 1}, 1), d, w) == 0.0);
  CHECK(geoclust::explained_q(make_partition({1, 2, 3}, 3), d, w) == 1.0);

  const auto p = make_partition({1, 1, 2}, 2);
  const double direct =
      1.0 - testsupport::direct_within(p.assignment, d, w) /
                testsupport::direct_within(std::vector<int>{1, 1, 1}, d, w);
  CHECK(geoclust::explained_q(p, d, w) == doctest::Approx(direct).epsilon(1e-13));

  // Zero total inertia is degenerate.
  DissimilarityMatrix zeros(3, "z");
  CHECK_THROWS_AS(geoclust::explained_q(p, zeros, w), DegenerateDataError);
}

TEST_CASE("normalized share") {
  CHECK(geoclust::normalized_q(0.5, 0.5) == 1.0);
  CHECK(geoclust::normalized_q(0.3, 0.6) == doctest::Approx(0.5));
  CHECK_THROWS_AS(geoclust::normalized_q(0.3, 0.0), DegenerateDataError);
}

TEST_CASE("q_bar boundaries and identical-matrix symmetry") {
  const auto d = geoclust::random_matrix(6, 97, "m");
  const auto w = WeightVector::uniform(6);
  const std::vector<DissimilarityMatrix> two{d, d};
  CHECK(geoclust::q_bar(make_partition({1, 1, 1, 1, 1, 1}, 1), two, w) == 0.0);
  CHECK(geoclust::q_bar(make_partition({1, 2, 3, 4, 5, 6}, 6), two, w) == 1.0);

  const auto p = make_partition({1, 1, 2, 2, 3, 3}, 3);
  CHECK(geoclust::q_bar(p, two, w) ==
        doctest::Approx(geoclust::explained_q(p, d, w)).epsilon(1e-13));
}

TEST_CASE("the three algebraic forms of q_bar agree") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 6;
    std::vector<DissimilarityMatrix> mats;
    for (int p = 0; p < 3; ++p) {
      mats.push_back(geoclust::random_matrix(n, 1000 + 10 * trial + p, "m" + std::to_string(p)));
    }
    const auto w = WeightVector::uniform(n);
    const auto tree = geoclust::ward_tree(mats[0], w);
    const int k = 2 + static_cast<int>(rng() % 4);
    const auto part = geoclust::cut(tree, k);
    const auto forms = geoclust::q_bar_forms(part, mats, w);
    CHECK(std::abs(forms.weighted_q - forms.gain) <= 1e-12);
    CHECK(std::abs(forms.gain - forms.within) <= 1e-12);
    CHECK(std::abs(forms.weighted_q - forms.within) <= 1e-12);
  }
}

TEST_CASE("silhouette") {
  // Two tight pairs far apart.
  const auto d = geoclust::validate_matrix({{0, 0.01, 1, 1},
                                            {0.01, 0, 1, 1},
                                            {1, 1, 0, 0.01},
                                            {1, 1, 0.01, 0}},
                                           "pairs");
  const auto p = make_partition({1, 1, 2, 2}, 2);
  CHECK(geoclust::silhouette(p, d) >= 0.9);

  // k = n-1 on a uniform matrix scores <= 0 (the split pair is as far from
  // its own cluster as from everything else).
  const auto u = geoclust::validate_matrix(
      {{0, 1, 1, 1}, {1, 0, 1, 1}, {1, 1, 0, 1}, {1, 1, 1, 0}}, "uniform");
  CHECK(geoclust::silhouette(make_partition({1, 1, 2, 3}, 3), u) <= 0.0);

  // Bounds on k.
  CHECK_THROWS_AS(geoclust::silhouette(make_partition({1, 1, 1, 1}, 1), u), ValidationError);
  CHECK_THROWS_AS(geoclust::silhouette(make_partition({1, 2, 3, 4}, 4), u), ValidationError);
}

TEST_CASE("silhouette stays in [-1, 1] on random partitions") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + rng() % 8;
    const auto d = geoclust::random_matrix(n, 2000 + trial, "m");
    std::vector<int> a(n);
    const int kk = 2 + static_cast<int>(rng() % (n - 2));
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = 1 + static_cast<int>(i % kk);
    }
    const double s = geoclust::silhouette(make_partition(a, kk), d);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("gain curve") {
  std::vector<geoclust::MetricsRecord> records(3);
  records[0].k = 1;
  records[0].q_bar = 0.0;
  records[1].k = 2;
  records[1].q_bar = 0.4;
  records[2].k = 3;
  records[2].q_bar = 0.6;
  const auto gains = geoclust::gain_curve(records);
  REQUIRE(gains.size() == 2);
  CHECK(gains[0].first == 2);
  CHECK(gains[0].second == doctest::Approx(0.4));
  CHECK(gains[1].first == 3);
  CHECK(gains[1].second == doctest::Approx(0.2).epsilon(1e-12));

  // Constant q_bar -> zero gains.
  for (auto& r : records) r.q_bar = 0.5;
  for (const auto& [k, g] : geoclust::gain_curve(records)) {
    CHECK(g == 0.0);
    CHECK(k >= 2);
  }

  std::vector<geoclust::MetricsRecord> one(1);
  one[0].k = 1;
  CHECK_THROWS_AS(geoclust::gain_curve(one), ValidationError);

  records[2].k = 5;  // non-consecutive
  CHECK_THROWS_AS(geoclust::gain_curve(records), ValidationError);
}
