#include <cmath>
#include <random>

#include "doctest.h"
#include "geoclust/distances.hpp"
#include "geoclust/errors.hpp"
#include "geoclust/selection.hpp"
#include "geoclust/synthetic.hpp"
#include "support/oracles.hpp"

using geoclust::DegenerateDataError;
using geoclust::DissimilarityMatrix;
using geoclust::KRule;
using geoclust::Mode;
using geoclust::SelectionConfig;
using geoclust::SelectionReport;
using geoclust::ValidationError;
using geoclust::WeightVector;

namespace {
SelectionConfig config(int k_max, double delta_alpha, KRule rule = KRule::kAdvisory,
                       int fixed_k = 0) {
  SelectionConfig cfg;
  cfg.k_max = k_max;
  cfg.delta_alpha = delta_alpha;
  cfg.k_rule = rule;
  cfg.fixed_k = fixed_k;
  cfg.threads = 1;
  return cfg;
}
}  // namespace

TEST_CASE("simplex grid enumerations") {
  const auto g2 = geoclust::simplex_grid(2, 0.5);
  REQUIRE(g2.size() == 3);
  CHECK(g2[0] == std::vector<double>{1.0, 0.0});
  CHECK(g2[1] == std::vector<double>{0.5, 0.5});
  CHECK(g2[2] == std::vector<double>{0.0, 1.0});

  const auto g4 = geoclust::simplex_grid(4, 0.05);
  CHECK(g4.size() == 1771);  // C(23, 3)
  bool has_equal = false;
  for (const auto& v : g4) {
    if (v == std::vector<double>{0.25, 0.25, 0.25, 0.25}) has_equal = true;
    double sum = 0.0;
    for (double x : v) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  CHECK(has_equal);

  // Vertices carry exact 0/1 components.
  CHECK(g4.front() == std::vector<double>{1.0, 0.0, 0.0, 0.0});
  CHECK(g4.back() == std::vector<double>{0.0, 0.0, 0.0, 1.0});

  const auto g3 = geoclust::simplex_grid(3, 0.2);
  CHECK(g3.size() == 21);  // C(7, 2)

  CHECK_THROWS_AS(geoclust::simplex_grid(1, 0.5), ValidationError);
  CHECK_THROWS_AS(geoclust::simplex_grid(2, 0.3), ValidationError);
  CHECK_THROWS_AS(geoclust::simplex_grid(2, 0.0), ValidationError);
}

TEST_CASE("config validation") {
  auto cfg = config(20, 0.3);
  CHECK_THROWS_AS(cfg.validate(30), ValidationError);  // 1/0.3 not integral
  cfg = config(1, 0.1);
  CHECK_THROWS_AS(cfg.validate(30), ValidationError);  // k_max < 2
  cfg = config(31, 0.1);
  CHECK_THROWS_AS(cfg.validate(30), ValidationError);  // k_max > n
  cfg = config(10, 0.1, KRule::kFixed, 11);
  CHECK_THROWS_AS(cfg.validate(30), ValidationError);  // fixed k > k_max
  cfg = config(10, 0.1, KRule::kFixed, 5);
  CHECK_NOTHROW(cfg.validate(30));
}

TEST_CASE("identical matrices: q_bar constant in alpha, first grid index wins") {
  const auto d = geoclust::random_matrix(12, 107, "m");
  const auto w = WeightVector::uniform(12);
  const auto report = geoclust::select_spatial(d, d, w, config(6, 0.25));
  for (int k = 1; k <= 6; ++k) {
    CHECK(report.best_index[k - 1] == 0);
    const double q0 = report.records[k - 1][0].q_bar;
    for (const auto& rec : report.records[k - 1]) {
      CHECK(rec.q_bar == doctest::Approx(q0).epsilon(1e-12));
    }
  }
}

TEST_CASE("vertex weightings reproduce single-matrix trees and unit normalized shares") {
  const auto ds = geoclust::random_dataset(18, 211);
  const auto d0 = geoclust::normalize_max(geoclust::feature_distance(ds));
  const auto d1 = geoclust::normalize_max(geoclust::geodetic_distance(ds));
  const auto w = ds.weights;
  const int k_max = 10;
  const auto report = geoclust::select_spatial(d0, d1, w, config(k_max, 0.5));
  REQUIRE(report.grid.size() == 3);

  const auto tree0 = geoclust::ward_tree(d0, w);
  const auto tree1 = geoclust::ward_tree(d1, w);
  for (int k = 1; k <= k_max; ++k) {
    const auto p0 = geoclust::partition_at({d0, d1}, w, {1.0, 0.0}, k);
    const auto p1 = geoclust::partition_at({d0, d1}, w, {0.0, 1.0}, k);
    CHECK(p0.assignment == geoclust::cut(tree0, k).assignment);
    CHECK(p1.assignment == geoclust::cut(tree1, k).assignment);
    if (k >= 2) {
      // Normalized share at the matrix's own vertex is exactly 1.
      CHECK(report.records[k - 1].front().per_matrix[0].q_normalized == 1.0);
      CHECK(report.records[k - 1].back().per_matrix[1].q_normalized == 1.0);
    } else {
      CHECK(std::isnan(report.records[k - 1].front().per_matrix[0].q_normalized));
    }
  }
}

TEST_CASE("two-matrix spatiotemporal run equals the spatial run") {
  const auto d0 = geoclust::random_matrix(14, 113, "a");
  const auto d1 = geoclust::random_matrix(14, 127, "b");
  const auto w = WeightVector::uniform(14);
  const auto cfg = config(7, 0.25);
  const auto spatial = geoclust::select_spatial(d0, d1, w, cfg);
  auto cfg2 = cfg;
  cfg2.mode = Mode::kSpatiotemporal;
  const auto multi = geoclust::select_spatiotemporal({d0, d1}, w, cfg2);
  REQUIRE(spatial.grid == multi.grid);
  for (int k = 1; k <= 7; ++k) {
    CHECK(spatial.best_index[k - 1] == multi.best_index[k - 1]);
    for (std::size_t g = 0; g < spatial.grid.size(); ++g) {
      CHECK(spatial.records[k - 1][g].q_bar == multi.records[k - 1][g].q_bar);
      CHECK(spatial.records[k - 1][g].per_matrix[0].w_within ==
            multi.records[k - 1][g].per_matrix[0].w_within);
    }
  }
}

TEST_CASE("per-k argmax certificate holds over the stored grid") {
  const auto d0 = geoclust::random_matrix(15, 131, "a");
  const auto d1 = geoclust::random_matrix(15, 137, "b");
  const auto report =
      geoclust::select_spatial(d0, d1, WeightVector::uniform(15), config(8, 0.125));
  CHECK(report.grid.size() == 9);
  for (int k = 1; k <= 8; ++k) {
    const double best = report.records[k - 1][report.best_index[k - 1]].q_bar;
    for (const auto& rec : report.records[k - 1]) CHECK(best >= rec.q_bar - 1e-15);
    // Tie rule: no strictly earlier grid point within 1e-12 of the optimum.
    for (int g = 0; g < report.best_index[k - 1]; ++g) {
      CHECK(report.records[k - 1][g].q_bar < best - 1e-12);
    }
  }
}

TEST_CASE("planted two-group instance: interior weightings recover the groups") {
  const std::size_t n = 24;
  const auto d0 = geoclust::normalize_max(geoclust::planted_matrix(n, 139, "a"));
  const auto d1 = geoclust::normalize_max(geoclust::planted_matrix(n, 149, "b"));
  const auto w = WeightVector::uniform(n);
  const auto report = geoclust::select_spatial(d0, d1, w, config(8, 0.1));
  const auto truth = geoclust::planted_groups(n);
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    const auto part = geoclust::partition_at({d0, d1}, w, report.grid[g], 2);
    CHECK(testsupport::adjusted_rand(part.assignment, truth) == 1.0);
  }
  // And the explained share at k = 2 is already large.
  CHECK(report.records[1][report.best_index[1]].q_bar > 0.9);
}

TEST_CASE("structure in one of three matrices sets the pooled optimum") {
  const std::size_t n = 30;
  std::vector<DissimilarityMatrix> mats;
  mats.push_back(geoclust::random_matrix(n, 151, "noise0"));
  mats.push_back(geoclust::normalize_max(geoclust::planted_matrix(n, 157, "structured")));
  mats.push_back(geoclust::random_matrix(n, 163, "noise2"));
  const auto w = WeightVector::uniform(n);
  auto cfg = config(6, 0.1);
  cfg.mode = Mode::kSpatiotemporal;
  const auto report = geoclust::select_spatiotemporal(mats, w, cfg);
  const auto truth = geoclust::planted_groups(n);

  // The best weighting at k = 2 recovers the planted split (ties go to the
  // earliest grid point, so the winner need not sit near the structured
  // matrix's vertex -- only its partition matters).
  const auto& best = report.grid[report.best_index[1]];
  const auto part = geoclust::partition_at(mats, w, best, 2);
  CHECK(testsupport::adjusted_rand(part.assignment, truth) == 1.0);

  // The structured matrix's vertex achieves the same split and its pooled
  // score matches the reported optimum, so no weighting beats it by more
  // than the tie tolerance.
  const auto vertex_part = geoclust::partition_at(mats, w, {0.0, 1.0, 0.0}, 2);
  CHECK(testsupport::adjusted_rand(vertex_part.assignment, truth) == 1.0);
  std::size_t vertex_g = report.grid.size();
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    if (report.grid[g][1] == 1.0) vertex_g = g;
  }
  REQUIRE(vertex_g < report.grid.size());
  const double best_q = report.records[1][report.best_index[1]].q_bar;
  CHECK(std::abs(report.records[1][vertex_g].q_bar - best_q) <= 1e-9);
  // The structured matrix is essentially fully explained at its vertex.
  CHECK(report.records[1][vertex_g].per_matrix[1].q > 0.99);
}

TEST_CASE("balance criterion: identical matrices give zero gap at the first grid point") {
  const auto d = geoclust::random_matrix(10, 167, "m");
  const auto w = WeightVector::uniform(10);
  const auto report = geoclust::select_chavent_baseline(d, d, w, config(5, 0.25));
  CHECK(report.criterion == "chavent_balance");
  REQUIRE(!report.baseline.empty());
  for (const auto& e : report.baseline) {
    CHECK(e.abs_gap == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.grid_index == 0);
    CHECK(report.best_index[e.k - 1] == 0);
  }
}

TEST_CASE("balance criterion never beats the maximizing criterion") {
  const auto d0 = geoclust::random_matrix(13, 173, "a");
  const auto d1 = geoclust::random_matrix(13, 179, "b");
  const auto w = WeightVector::uniform(13);
  const auto maxi = geoclust::select_spatial(d0, d1, w, config(6, 0.125));
  REQUIRE(!maxi.baseline.empty());
  bool strictly_lower_somewhere = false;
  for (const auto& e : maxi.baseline) {
    const double best = maxi.records[e.k - 1][maxi.best_index[e.k - 1]].q_bar;
    const double at_balance = maxi.records[e.k - 1][e.grid_index].q_bar;
    CHECK(best >= at_balance);
    if (best > at_balance + 1e-12) strictly_lower_somewhere = true;
  }
  // On generic data the two criteria do not coincide everywhere.
  CHECK(strictly_lower_somewhere);
}

TEST_CASE("choose_k rules") {
  SelectionReport report;
  report.k_max = 5;
  report.gain = {{2, 0.5}, {3, 0.3}, {4, 0.01}, {5, 0.005}};
  report.silhouette_curve = {{2, 0.6}, {3, 0.7}, {4, 0.75}, {5, 0.2}};

  CHECK_FALSE(geoclust::choose_k(report, KRule::kAdvisory, 0, 0.02).has_value());
  CHECK(geoclust::choose_k(report, KRule::kFixed, 4, 0.02) == 4);
  CHECK_THROWS_AS(geoclust::choose_k(report, KRule::kFixed, 6, 0.02), ValidationError);
  // Largest k whose gain clears the threshold.
  CHECK(geoclust::choose_k(report, KRule::kAuto, 0, 0.02) == 3);
  // Nothing above threshold: fall back to the best-silhouette k (!= 3 here,
  // which proves the fallback path was taken).
  CHECK(geoclust::choose_k(report, KRule::kAuto, 0, 0.9) == 4);
}

TEST_CASE("zero total inertia in a component matrix is rejected by name") {
  // normalize_max already rejects an all-zero matrix, so reach the selection
  // check directly with a hand-built zero matrix whose normalized flag is set.
  const auto d1 = geoclust::random_matrix(6, 181, "b");
  DissimilarityMatrix zeros(6, "a");
  zeros.set_normalized(true);
  const auto w = WeightVector::uniform(6);
  try {
    geoclust::select_spatial(zeros, d1, w, config(3, 0.5));
    FAIL("expected DegenerateDataError");
  } catch (const DegenerateDataError& e) {
    CHECK(std::string(e.what()).find("'a'") != std::string::npos);
  }
}

TEST_CASE("reports are deterministic across thread counts") {
  const auto d0 = geoclust::random_matrix(16, 191, "a");
  const auto d1 = geoclust::random_matrix(16, 193, "b");
  const auto w = WeightVector::uniform(16);
  auto cfg1 = config(8, 0.1);
  auto cfg4 = cfg1;
  cfg4.threads = 4;
  const auto r1 = geoclust::select_spatial(d0, d1, w, cfg1);
  const auto r4 = geoclust::select_spatial(d0, d1, w, cfg4);
  REQUIRE(r1.grid == r4.grid);
  CHECK(r1.best_index == r4.best_index);
  // Bitwise identical, not merely close. NaN slots must match as NaN.
  auto same = [](double a, double b) {
    return (std::isnan(a) && std::isnan(b)) || a == b;
  };
  for (int k = 1; k <= 8; ++k) {
    for (std::size_t g = 0; g < r1.grid.size(); ++g) {
      CHECK(same(r1.records[k - 1][g].q_bar, r4.records[k - 1][g].q_bar));
      CHECK(same(r1.records[k - 1][g].silhouette, r4.records[k - 1][g].silhouette));
      for (std::size_t p = 0; p < 2; ++p) {
        CHECK(same(r1.records[k - 1][g].per_matrix[p].w_within,
                   r4.records[k - 1][g].per_matrix[p].w_within));
      }
    }
  }
}

TEST_CASE("each matrix explains itself fully as k approaches n") {
  const auto d0 = geoclust::random_matrix(9, 197, "a");
  const auto d1 = geoclust::random_matrix(9, 199, "b");
  const auto w = WeightVector::uniform(9);
  const auto report = geoclust::select_spatial(d0, d1, w, config(9, 0.5));
  for (const auto& rec : report.records[8]) {  // k = n = 9
    CHECK(rec.q_bar == 1.0);
    for (const auto& pm : rec.per_matrix) {
      CHECK(pm.q == 1.0);
      CHECK(pm.w_within == 0.0);
    }
  }
  for (const auto& rec : report.records[0]) {  // k = 1
    CHECK(rec.q_bar == 0.0);
    for (const auto& pm : rec.per_matrix) CHECK(pm.q == 0.0);
  }
}
