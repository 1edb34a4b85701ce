#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "geoclust/dissimilarity.hpp"
#include "geoclust/types.hpp"
#include "geoclust/ward.hpp"

namespace geoclust {

// Pseudo-inertia of one cluster: the full double sum over ordered pairs
//   sum_{i in C} sum_{j in C} w_i w_j / (2 sum_{i in C} w_i) * d_ij^2.
// `cluster` holds entity indices; empty clusters are an error.
double pseudo_inertia(const std::vector<std::size_t>& cluster, const DissimilarityMatrix& d,
                      const WeightVector& w);

// Same, but the matrix entries are already squared. Inertia is linear in this
// squared-entry matrix, which is the level where mixing is exactly linear.
double pseudo_inertia_presquared(const std::vector<std::size_t>& cluster,
                                 const DissimilarityMatrix& s, const WeightVector& w);

// Sum of cluster pseudo-inertias over the partition.
double within_inertia(const Partition& p, const DissimilarityMatrix& d,
                      const WeightVector& w);
double within_inertia_presquared(const Partition& p, const DissimilarityMatrix& s,
                                 const WeightVector& w);

// Share of total pseudo-inertia explained: 1 - W(P)/W(P_1). Errors when the
// total inertia is zero (constant data).
double explained_q(const Partition& p, const DissimilarityMatrix& d, const WeightVector& w);

// Ratio of an explained share to its single-matrix baseline (the same K built
// from that matrix alone). Errors on a zero baseline.
double normalized_q(double q_mixed, double q_baseline);

// The weighted average explained share has three algebraically equal forms;
// all are computed so tests (and debug builds) can assert they agree.
struct QBarForms {
  double weighted_q = 0.0;  // sum_p Q_p W_p(P_1)  / sum_p W_p(P_1)
  double gain = 0.0;        // sum_p [W_p(P_1) - W_p(P)] / sum_p W_p(P_1)
  double within = 0.0;      // 1 - sum_p W_p(P) / sum_p W_p(P_1)
};
QBarForms q_bar_forms(const Partition& p, const std::vector<DissimilarityMatrix>& matrices,
                      const WeightVector& w);

// Weighted average explained share across matrices (the selection objective).
// Depends on the partition and matrices only. Errors on degenerate totals.
double q_bar(const Partition& p, const std::vector<DissimilarityMatrix>& matrices,
             const WeightVector& w);

// Mean silhouette (b - a) / max(a, b) over entities, on the given matrix:
// a = mean dissimilarity to own cluster (excluding self), b = smallest mean
// dissimilarity to another cluster; singletons score 0. Requires
// 2 <= k <= n-1.
double silhouette(const Partition& p, const DissimilarityMatrix& d);

// Everything reported for one (k, weighting) grid point.
struct MetricsRecord {
  struct PerMatrix {
    std::string label;
    double w_total = 0.0;
    double w_within = 0.0;
    double q = 0.0;
    // Ratio to the single-matrix baseline at the same k; NaN when the
    // baseline is undefined (k = 1).
    double q_normalized = std::numeric_limits<double>::quiet_NaN();
  };
  int k = 0;
  std::vector<double> weighting;
  std::vector<PerMatrix> per_matrix;
  double q_bar = 0.0;
  // NaN outside 2 <= k <= n-1, where the index is undefined.
  double silhouette = std::numeric_limits<double>::quiet_NaN();
};

// First differences of q_bar across consecutive k (each record already at its
// own optimal weighting). Returns (k, q_bar(k) - q_bar(k-1)) for k >= 2.
// Errors on fewer than 2 records or non-consecutive k.
std::vector<std::pair<int, double>> gain_curve(const std::vector<MetricsRecord>& records);

}  // namespace geoclust
