#include "geoclust/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoclust/errors.hpp"
#include "geoclust/parallel.hpp"

namespace geoclust {

namespace {
constexpr double kTieTol = 1e-12;
constexpr double kGridTol = 1e-9;
}  // namespace

std::string mode_name(Mode m) {
  return m == Mode::kSpatial ? "spatial" : "spatiotemporal";
}

std::string k_rule_name(KRule r) {
  switch (r) {
    case KRule::kAdvisory: return "advisory";
    case KRule::kFixed: return "fixed";
    case KRule::kAuto: return "auto";
  }
  return "advisory";
}

void SelectionConfig::validate(std::size_t n) const {
  if (!(delta_alpha > 0.0) || delta_alpha > 1.0) {
    throw ValidationError("delta-alpha must lie in (0, 1]");
  }
  const double steps = 1.0 / delta_alpha;
  if (std::abs(steps - std::round(steps)) > kGridTol) {
    throw ValidationError("1/delta-alpha must be an integer (grid must land exactly on 0 and "
                          "1); got delta-alpha=" + std::to_string(delta_alpha));
  }
  if (k_max < 2) {
    throw ValidationError("k-max must be >= 2");
  }
  if (n > 0 && static_cast<std::size_t>(k_max) > n) {
    throw ValidationError("k-max=" + std::to_string(k_max) + " exceeds the entity count " +
                          std::to_string(n));
  }
  if (k_rule == KRule::kFixed) {
    if (fixed_k < 1) {
      throw ValidationError("fixed k must be >= 1");
    }
    if (fixed_k > k_max) {
      throw ValidationError("fixed k=" + std::to_string(fixed_k) + " exceeds k-max=" +
                            std::to_string(k_max));
    }
  }
  if (!(gain_threshold >= 0.0)) {
    throw ValidationError("gain threshold must be >= 0");
  }
}

std::vector<std::vector<double>> simplex_grid(int p, double delta_alpha) {
  if (p < 2) {
    throw ValidationError("simplex grid needs p >= 2");
  }
  if (!(delta_alpha > 0.0) || delta_alpha > 1.0) {
    throw ValidationError("delta-alpha must lie in (0, 1]");
  }
  const double steps = 1.0 / delta_alpha;
  if (std::abs(steps - std::round(steps)) > kGridTol) {
    throw ValidationError("1/delta-alpha must be an integer; got delta-alpha=" +
                          std::to_string(delta_alpha));
  }
  const int m = static_cast<int>(std::round(steps));

  std::vector<std::vector<double>> grid;
  std::vector<int> counts(static_cast<std::size_t>(p), 0);
  // Descending lexicographic enumeration of compositions of m into p parts.
  auto emit = [&]() {
    std::vector<double> v(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) {
      v[i] = counts[i] == m ? 1.0 : static_cast<double>(counts[i]) / static_cast<double>(m);
    }
    grid.push_back(std::move(v));
  };
  auto recurse = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == p - 1) {
      counts[pos] = remaining;
      emit();
      return;
    }
    for (int c = remaining; c >= 0; --c) {
      counts[pos] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  recurse(recurse, 0, m);
  return grid;
}

namespace {

// Replays a merge-slot sequence with Lance-Williams updates over a
// squared-entry matrix, returning the inertia increment of each merge. This
// reproduces, for each component matrix, exactly the per-step increase the
// tree would report had it been built on that matrix's merges.
std::vector<double> replay_increments(const std::vector<double>& squared, std::size_t n,
                                      const WeightVector& w,
                                      const std::vector<std::pair<int, int>>& slots) {
  std::vector<double> delta(n * n, 0.0);
  std::vector<double> mass(w.values());
  std::vector<char> active(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = mass[i] * mass[j] / (mass[i] + mass[j]) * squared[i * n + j];
      delta[i * n + j] = v;
      delta[j * n + i] = v;
    }
  }
  std::vector<double> inc;
  inc.reserve(slots.size());
  for (const auto& [a_int, b_int] : slots) {
    const std::size_t a = static_cast<std::size_t>(a_int);
    const std::size_t b = static_cast<std::size_t>(b_int);
    const double dab = delta[a * n + b];
    inc.push_back(dab);
    const double ma = mass[a], mb = mass[b];
    active[b] = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == a) continue;
      const double v = ((ma + mass[c]) * delta[a * n + c] + (mb + mass[c]) * delta[b * n + c] -
                        mass[c] * dab) /
                       (ma + mb + mass[c]);
      delta[a * n + c] = v;
      delta[c * n + a] = v;
    }
    mass[a] = ma + mb;
  }
  return inc;
}

// Silhouette over precomputed labels on the combined matrix; NaN when k is
// outside [2, n-1].
double silhouette_or_nan(const std::vector<int>& labels, int k, const DissimilarityMatrix& d) {
  const std::size_t n = d.size();
  if (k < 2 || static_cast<std::size_t>(k) > n - 1) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  Partition p;
  p.k = k;
  p.assignment = labels;
  return silhouette(p, d);
}

struct GridPointData {
  std::vector<std::vector<double>> w_within;  // [P][k_max]
  std::vector<double> totals;                 // [P]
  std::vector<double> q_bar;                  // [k_max]
  std::vector<double> silhouette;             // [k_max]
};

SelectionReport run_grid(const std::vector<DissimilarityMatrix>& matrices,
                         const WeightVector& w, const SelectionConfig& config, Mode mode) {
  const std::size_t P = matrices.size();
  if (P < 2) {
    throw ValidationError("selection needs at least 2 matrices");
  }
  const std::size_t n = matrices[0].size();
  for (const auto& m : matrices) {
    if (m.size() != n) {
      throw ValidationError("selection: matrix '" + m.label() + "' has size " +
                            std::to_string(m.size()) + ", expected " + std::to_string(n));
    }
    if (!m.normalized()) {
      throw ValidationError("selection: matrix '" + m.label() + "' is not normalized");
    }
  }
  if (w.size() != n) {
    throw ValidationError("selection: weight vector does not match the matrices");
  }
  config.validate(n);
  const int k_max = config.k_max;

  SelectionReport rep;
  rep.criterion = "q_bar_max";
  rep.mode = mode;
  rep.n = static_cast<int>(n);
  rep.k_max = k_max;
  rep.delta_alpha = config.delta_alpha;
  rep.k_rule = config.k_rule;
  rep.fixed_k = config.fixed_k;
  rep.gain_threshold = config.gain_threshold;
  for (const auto& m : matrices) rep.labels.push_back(m.label());
  rep.weights = w.values();
  rep.grid = simplex_grid(static_cast<int>(P), config.delta_alpha);

  // Audit totals: direct definition-level double sum per matrix, so the
  // replayed prefix sums below have an independent reference.
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (const auto& m : matrices) {
    rep.total_inertia.push_back(pseudo_inertia(all, m, w));
  }

  // Squared-entry copies shared read-only across grid tasks.
  std::vector<std::vector<double>> squared(P);
  for (std::size_t p = 0; p < P; ++p) {
    squared[p].resize(n * n);
    const auto& src = matrices[p].data();
    for (std::size_t i = 0; i < src.size(); ++i) squared[p][i] = src[i] * src[i];
  }

  const std::size_t G = rep.grid.size();
  std::vector<GridPointData> results(G);

  parallel_for(G, config.threads, [&](std::size_t g) {
    const DissimilarityMatrix combined = combine(matrices, rep.grid[g]);
    const MergeTree tree = ward_tree(combined, w);
    const auto slots = merge_slots(tree);
    const auto labels_per_k = cut_all(tree, k_max);

    GridPointData& out = results[g];
    out.w_within.assign(P, std::vector<double>(k_max, 0.0));
    out.totals.assign(P, 0.0);
    out.q_bar.assign(k_max, 0.0);
    out.silhouette.assign(k_max, std::numeric_limits<double>::quiet_NaN());

    // Per-matrix within-inertia for every k from one replay: increments are
    // prefix-summed so W(P_k) = sum of the first n-k increments.
    std::vector<std::vector<double>> prefix(P);
    for (std::size_t p = 0; p < P; ++p) {
      const auto inc = replay_increments(squared[p], n, w, slots);
      prefix[p].assign(inc.size() + 1, 0.0);
      for (std::size_t t = 0; t < inc.size(); ++t) {
        prefix[p][t + 1] = prefix[p][t] + inc[t];
      }
      out.totals[p] = prefix[p][inc.size()];
      if (!(out.totals[p] > 0.0)) {
        throw DegenerateDataError("matrix '" + matrices[p].label() +
                                  "': zero total inertia in selection");
      }
      for (int k = 1; k <= k_max; ++k) {
        out.w_within[p][k - 1] = prefix[p][n - static_cast<std::size_t>(k)];
      }
    }
    double total_sum = 0.0;
    for (std::size_t p = 0; p < P; ++p) total_sum += out.totals[p];
    for (int k = 1; k <= k_max; ++k) {
      double within_sum = 0.0;
      for (std::size_t p = 0; p < P; ++p) within_sum += out.w_within[p][k - 1];
      out.q_bar[k - 1] = 1.0 - within_sum / total_sum;
      out.silhouette[k - 1] = silhouette_or_nan(labels_per_k[k - 1], k, combined);
    }
  });

  // Assemble records.
  rep.records.assign(k_max, std::vector<MetricsRecord>(G));
  for (std::size_t g = 0; g < G; ++g) {
    const GridPointData& r = results[g];
    for (int k = 1; k <= k_max; ++k) {
      MetricsRecord& rec = rep.records[k - 1][g];
      rec.k = k;
      rec.weighting = rep.grid[g];
      rec.q_bar = r.q_bar[k - 1];
      rec.silhouette = r.silhouette[k - 1];
      rec.per_matrix.resize(P);
      for (std::size_t p = 0; p < P; ++p) {
        auto& pm = rec.per_matrix[p];
        pm.label = rep.labels[p];
        pm.w_total = r.totals[p];
        pm.w_within = r.w_within[p][k - 1];
        pm.q = 1.0 - pm.w_within / pm.w_total;
      }
    }
  }

  // Normalized shares against the per-matrix vertex baselines (same k).
  std::vector<std::size_t> vertex(P, G);
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t p = 0; p < P; ++p) {
      if (rep.grid[g][p] == 1.0) vertex[p] = g;
    }
  }
  for (std::size_t p = 0; p < P; ++p) {
    if (vertex[p] == G) {
      throw InternalError("selection grid is missing a vertex weighting");
    }
  }
  for (int k = 2; k <= k_max; ++k) {
    for (std::size_t p = 0; p < P; ++p) {
      const double base = rep.records[k - 1][vertex[p]].per_matrix[p].q;
      for (std::size_t g = 0; g < G; ++g) {
        auto& pm = rep.records[k - 1][g].per_matrix[p];
        pm.q_normalized = base > 0.0 ? pm.q / base
                                     : std::numeric_limits<double>::quiet_NaN();
      }
    }
  }

  // Per-k argmax with ties to the first grid index within tolerance.
  rep.best_index.assign(k_max, 0);
  for (int k = 1; k <= k_max; ++k) {
    double vmax = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < G; ++g) {
      vmax = std::max(vmax, rep.records[k - 1][g].q_bar);
    }
    for (std::size_t g = 0; g < G; ++g) {
      if (rep.records[k - 1][g].q_bar >= vmax - kTieTol) {
        rep.best_index[k - 1] = static_cast<int>(g);
        break;
      }
    }
  }

  // Diagnostic curves at the per-k optimum.
  for (int k = 2; k <= k_max; ++k) {
    rep.gain.emplace_back(k, rep.best_record(k).q_bar - rep.best_record(k - 1).q_bar);
    rep.silhouette_curve.emplace_back(k, rep.best_record(k).silhouette);
  }

  rep.chosen_k = choose_k(rep, config.k_rule, config.fixed_k, config.gain_threshold);
  return rep;
}

// Balance-criterion selection from an already-computed grid: per k minimize
// |Qnorm_0 - Qnorm_1|. Throws when a vertex baseline share is zero.
std::vector<SelectionReport::BaselineEntry> chavent_entries(const SelectionReport& rep) {
  if (rep.labels.size() != 2) {
    throw ValidationError("the balance criterion is defined for exactly 2 matrices");
  }
  std::vector<SelectionReport::BaselineEntry> out;
  const std::size_t G = rep.grid.size();
  for (int k = 2; k <= rep.k_max; ++k) {
    double vmin = std::numeric_limits<double>::infinity();
    std::vector<double> gap(G, 0.0);
    for (std::size_t g = 0; g < G; ++g) {
      const auto& rec = rep.records[k - 1][g];
      for (std::size_t p = 0; p < 2; ++p) {
        if (std::isnan(rec.per_matrix[p].q_normalized)) {
          throw DegenerateDataError("matrix '" + rep.labels[p] +
                                    "': zero baseline explained share at k=" +
                                    std::to_string(k) +
                                    ", balance criterion undefined");
        }
      }
      gap[g] = std::abs(rec.per_matrix[0].q_normalized - rec.per_matrix[1].q_normalized);
      vmin = std::min(vmin, gap[g]);
    }
    SelectionReport::BaselineEntry e;
    e.k = k;
    for (std::size_t g = 0; g < G; ++g) {
      if (gap[g] <= vmin + kTieTol) {
        e.grid_index = static_cast<int>(g);
        e.abs_gap = gap[g];
        break;
      }
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace

SelectionReport select_spatial(const DissimilarityMatrix& d0, const DissimilarityMatrix& d1,
                               const WeightVector& w, const SelectionConfig& config) {
  SelectionReport rep = run_grid({d0, d1}, w, config, Mode::kSpatial);
  rep.baseline = chavent_entries(rep);
  return rep;
}

SelectionReport select_spatiotemporal(const std::vector<DissimilarityMatrix>& matrices,
                                      const WeightVector& w, const SelectionConfig& config) {
  SelectionReport rep = run_grid(matrices, w, config, Mode::kSpatiotemporal);
  if (matrices.size() == 2) {
    rep.baseline = chavent_entries(rep);
  }
  return rep;
}

SelectionReport select_chavent_baseline(const DissimilarityMatrix& d0,
                                        const DissimilarityMatrix& d1, const WeightVector& w,
                                        const SelectionConfig& config) {
  SelectionReport rep = run_grid({d0, d1}, w, config, Mode::kSpatial);
  rep.criterion = "chavent_balance";
  rep.baseline = chavent_entries(rep);
  // Re-point the per-k selection at the balance optimum; k=1 stays at the
  // first grid point (all weightings coincide there).
  for (const auto& e : rep.baseline) {
    rep.best_index[e.k - 1] = e.grid_index;
  }
  rep.gain.clear();
  rep.silhouette_curve.clear();
  for (int k = 2; k <= rep.k_max; ++k) {
    rep.gain.emplace_back(k, rep.best_record(k).q_bar - rep.best_record(k - 1).q_bar);
    rep.silhouette_curve.emplace_back(k, rep.best_record(k).silhouette);
  }
  rep.chosen_k = choose_k(rep, config.k_rule, config.fixed_k, config.gain_threshold);
  return rep;
}

std::optional<int> choose_k(const SelectionReport& report, KRule rule, int fixed_k,
                            double gain_threshold) {
  if (rule == KRule::kAdvisory) {
    return std::nullopt;
  }
  if (rule == KRule::kFixed) {
    if (fixed_k < 1 || fixed_k > report.k_max) {
      throw ValidationError("fixed k=" + std::to_string(fixed_k) + " outside [1, k-max=" +
                            std::to_string(report.k_max) + "]");
    }
    return fixed_k;
  }
  // auto: largest k whose q_bar step clears the threshold...
  int chosen = 0;
  for (const auto& [k, g] : report.gain) {
    if (g >= gain_threshold) chosen = std::max(chosen, k);
  }
  if (chosen == 0) {
    // ...falling back to the best silhouette when no step qualifies.
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [k, s] : report.silhouette_curve) {
      if (!std::isnan(s) && s > best) {
        best = s;
        chosen = k;
      }
    }
    if (chosen == 0) chosen = 2;  // no usable silhouette either (tiny n)
  }
  return chosen;
}

Partition partition_at(const std::vector<DissimilarityMatrix>& matrices,
                       const WeightVector& w, const std::vector<double>& weighting, int k) {
  const DissimilarityMatrix combined = combine(matrices, weighting);
  const MergeTree tree = ward_tree(combined, w);
  Partition p = cut(tree, k);
  p.weighting = weighting;
  return p;
}

}  // namespace geoclust
