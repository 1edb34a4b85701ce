#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "geoclust/dissimilarity.hpp"
#include "geoclust/types.hpp"

namespace geoclust {

// One agglomeration step. Node ids: leaves are 0..n-1, the cluster created by
// merge t is node n+t. left < right always; height is the pseudo-inertia
// increase of this merge (raw, not cumulative); merged_weight is the sum of
// the children's weights.
struct MergeRecord {
  int left = 0;
  int right = 0;
  double height = 0.0;
  double merged_weight = 0.0;
};

// Full agglomeration history: n-1 merges, cuttable at any K.
struct MergeTree {
  std::vector<MergeRecord> merges;
  WeightVector leaf_weights;

  std::size_t n_leaves() const { return leaf_weights.size(); }
};

// Assignment of entities to clusters 1..k, labels canonicalized by first
// appearance in entity order. `weighting` records the mixing vector of the
// combined matrix the tree was built on (empty when not applicable).
struct Partition {
  std::vector<int> assignment;
  int k = 0;
  std::vector<double> weighting;
};

// Greedy Ward-like agglomeration on an arbitrary dissimilarity matrix with
// positive entity weights: at each step merges the pair of clusters whose
// union minimizes the increase in pseudo within-cluster inertia (computed on
// squared dissimilarities via the weighted Lance-Williams recurrence). Ties
// within 1e-12 of the global minimum go to the lexicographically smallest
// (min node id, max node id) pair. Throws ValidationError for n < 2 or a
// weight/matrix size mismatch.
MergeTree ward_tree(const DissimilarityMatrix& d, const WeightVector& w);

// Partition induced by undoing the last k-1 merges. 1 <= k <= n.
Partition cut(const MergeTree& tree, int k);

// Partitions for every k in 1..k_max from one pass over the merges; entry
// [k-1] equals cut(tree, k).assignment. Requires 1 <= k_max <= n.
std::vector<std::vector<int>> cut_all(const MergeTree& tree, int k_max);

// The merge sequence as (surviving slot, absorbed slot) pairs in the engine's
// internal slot convention (a cluster lives in the smallest leaf slot it
// contains). Lets per-matrix metrics replay the exact same agglomeration.
std::vector<std::pair<int, int>> merge_slots(const MergeTree& tree);

// Flat CSV export of the merge records (left, right, height, merged_weight).
void write_merge_tree_csv(const std::string& path, const MergeTree& tree,
                          const std::string& manifest_digest);

}  // namespace geoclust
