#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geoclust/dissimilarity.hpp"
#include "geoclust/metrics.hpp"
#include "geoclust/types.hpp"
#include "geoclust/ward.hpp"

namespace geoclust {

enum class Mode { kSpatial, kSpatiotemporal };
enum class KRule { kAdvisory, kFixed, kAuto };

std::string mode_name(Mode m);
std::string k_rule_name(KRule r);

struct SelectionConfig {
  int k_max = 20;
  double delta_alpha = 0.1;
  Mode mode = Mode::kSpatial;
  KRule k_rule = KRule::kAdvisory;
  int fixed_k = 0;                // meaningful when k_rule == kFixed
  double gain_threshold = 0.02;   // engine default for the auto rule
  int threads = 1;

  // Grid constraint (1/delta_alpha integral within 1e-9), k-range checks.
  // `n` is the entity count the run will cluster.
  void validate(std::size_t n) const;
};

// All weight vectors of length p with entries that are nonnegative multiples
// of delta_alpha summing to 1, in descending lexicographic order:
// (1,0,...,0) first, (0,...,0,1) last. For p = 2 this is the ascending scalar
// grid of the two-matrix algorithm (the scalar is the last component).
std::vector<std::vector<double>> simplex_grid(int p, double delta_alpha);

struct SelectionReport {
  std::string criterion;  // "q_bar_max" or "chavent_balance"
  Mode mode = Mode::kSpatial;
  int n = 0;
  int k_max = 0;
  double delta_alpha = 0.0;
  KRule k_rule = KRule::kAdvisory;
  int fixed_k = 0;
  double gain_threshold = 0.02;
  std::vector<std::string> labels;           // matrix labels, grid component order
  std::vector<double> weights;               // entity weights echo
  std::vector<double> total_inertia;         // per matrix, direct double-sum audit
  std::vector<std::vector<double>> grid;     // evaluated weightings, grid order
  // records[k-1][g]: metrics for cut at k of the tree built at grid[g]
  std::vector<std::vector<MetricsRecord>> records;
  std::vector<int> best_index;               // [k-1] -> grid index of the per-k optimum
  std::vector<std::pair<int, double>> gain;  // (k, q_bar step) for k = 2..k_max
  std::vector<std::pair<int, double>> silhouette_curve;  // (k, value at best weighting)
  std::optional<int> chosen_k;

  // Balance-criterion comparison (two-matrix runs): per k >= 2 the weighting
  // minimizing |Qnorm_first - Qnorm_second| and the achieved gap.
  struct BaselineEntry {
    int k = 0;
    int grid_index = 0;
    double abs_gap = 0.0;
  };
  std::vector<BaselineEntry> baseline;

  const MetricsRecord& best_record(int k) const { return records[k - 1][best_index[k - 1]]; }
};

// Two-matrix grid search (feature + spatial): for every k in 1..k_max and
// every grid weighting, builds the combined matrix, runs the Ward tree, cuts
// it, fills a MetricsRecord, and selects per k the weighting maximizing the
// weighted average explained share (ties: first grid index within 1e-12).
SelectionReport select_spatial(const DissimilarityMatrix& d0, const DissimilarityMatrix& d1,
                               const WeightVector& w, const SelectionConfig& config);

// Same flow over the full weight simplex for P >= 2 matrices. With P = 2 the
// result matches select_spatial partition for partition.
SelectionReport select_spatiotemporal(const std::vector<DissimilarityMatrix>& matrices,
                                      const WeightVector& w, const SelectionConfig& config);

// Same grid, but per k the weighting is chosen to minimize the absolute gap
// between the two normalized explained shares (the balance criterion the
// weighted-average criterion is compared against). Errors when a baseline
// explained share is zero, naming the matrix.
SelectionReport select_chavent_baseline(const DissimilarityMatrix& d0,
                                        const DissimilarityMatrix& d1, const WeightVector& w,
                                        const SelectionConfig& config);

// Applies the k rule to a finished report: advisory -> nullopt (curves only),
// fixed -> k (error if k > k_max), auto -> largest k with gain >=
// gain_threshold, falling back to the best-silhouette k when none qualifies.
std::optional<int> choose_k(const SelectionReport& report, KRule rule, int fixed_k,
                            double gain_threshold);

// Rebuilds the partition for one weighting and k (combine + tree + cut);
// used to materialize assignments for a chosen k.
Partition partition_at(const std::vector<DissimilarityMatrix>& matrices,
                       const WeightVector& w, const std::vector<double>& weighting, int k);

}  // namespace geoclust
