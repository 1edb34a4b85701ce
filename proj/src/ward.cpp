#include "geoclust/ward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "geoclust/csv.hpp"
#include "geoclust/errors.hpp"

namespace geoclust {

namespace {
constexpr double kTieTol = 1e-12;

// Within-tolerance negatives are Lance-Williams rounding noise; anything
// larger means the update recurrence was fed an invalid state.
double checked_height(double v) {
  if (v < 0.0) {
    if (v < -kTieTol) {
      throw InternalError("ward: negative inertia increment " + format_double(v));
    }
    return 0.0;
  }
  return v;
}

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) { parent[find(b)] = find(a); }
};

std::vector<int> canonical_labels(DisjointSet& ds, std::size_t n, int expected_k) {
  std::vector<int> root_label(n, 0);
  std::vector<int> labels(n);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int r = ds.find(static_cast<int>(i));
    if (root_label[r] == 0) root_label[r] = ++next;
    labels[i] = root_label[r];
  }
  if (next != expected_k) {
    throw InternalError("ward cut: produced " + std::to_string(next) + " clusters, expected " +
                        std::to_string(expected_k));
  }
  return labels;
}
}  // namespace

MergeTree ward_tree(const DissimilarityMatrix& d, const WeightVector& w) {
  const std::size_t n = d.size();
  if (n < 2) {
    throw ValidationError("ward: needs at least 2 entities");
  }
  if (w.size() != n) {
    throw ValidationError("ward: weight vector length " + std::to_string(w.size()) +
                          " does not match matrix size " + std::to_string(n));
  }

  // delta(i, j): inertia increase of merging the clusters currently living in
  // slots i and j. Initially w_i w_j / (w_i + w_j) * d_ij^2 for singletons.
  std::vector<double> delta(n * n, 0.0);
  std::vector<double> mass(w.values());
  std::vector<int> node(n);
  std::iota(node.begin(), node.end(), 0);
  std::vector<char> active(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dij = d(i, j);
      const double v = mass[i] * mass[j] / (mass[i] + mass[j]) * dij * dij;
      delta[i * n + j] = v;
      delta[j * n + i] = v;
    }
  }

  // Cached per-row minimum over active partners, to avoid a full O(n^2) scan
  // per step. rowarg is the partner slot attaining rowmin.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> rowmin(n, kInf);
  std::vector<int> rowarg(n, -1);
  auto recompute_row = [&](std::size_t i) {
    double best = kInf;
    int arg = -1;
    const double* row = delta.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!active[j] || j == i) continue;
      if (row[j] < best) {
        best = row[j];
        arg = static_cast<int>(j);
      }
    }
    rowmin[i] = best;
    rowarg[i] = arg;
  };
  for (std::size_t i = 0; i < n; ++i) recompute_row(i);

  MergeTree tree;
  tree.leaf_weights = w;
  tree.merges.reserve(n - 1);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    double vmin = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (active[i] && rowmin[i] < vmin) vmin = rowmin[i];
    }
    const double band = vmin + kTieTol;

    // All pairs within the tie band of the global minimum compete on the
    // lexicographic (min node id, max node id) key.
    int best_a = -1, best_b = -1;
    long long best_lo = -1, best_hi = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i] || rowmin[i] > band) continue;
      const double* row = delta.data() + i * n;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j] || row[j] > band) continue;
        const long long lo = std::min(node[i], node[j]);
        const long long hi = std::max(node[i], node[j]);
        if (best_a < 0 || lo < best_lo || (lo == best_lo && hi < best_hi)) {
          best_a = static_cast<int>(i);
          best_b = static_cast<int>(j);
          best_lo = lo;
          best_hi = hi;
        }
      }
    }
    if (best_a < 0) {
      throw InternalError("ward: no candidate pair found");
    }

    const std::size_t a = static_cast<std::size_t>(best_a);  // survives (a < b)
    const std::size_t b = static_cast<std::size_t>(best_b);
    const double dab = delta[a * n + b];
    const double ma = mass[a], mb = mass[b];

    MergeRecord rec;
    rec.left = static_cast<int>(best_lo);
    rec.right = static_cast<int>(best_hi);
    rec.height = checked_height(dab);
    rec.merged_weight = ma + mb;
    tree.merges.push_back(rec);

    active[b] = 0;
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == a) continue;
      const double mc = mass[c];
      const double v = ((ma + mc) * delta[a * n + c] + (mb + mc) * delta[b * n + c] -
                        mc * dab) /
                       (ma + mb + mc);
      delta[a * n + c] = v;
      delta[c * n + a] = v;
    }
    mass[a] = ma + mb;
    node[a] = static_cast<int>(n + step);

    recompute_row(a);
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == a) continue;
      if (rowarg[c] == static_cast<int>(a) || rowarg[c] == static_cast<int>(b)) {
        // cached minimum referenced a row that changed or died
        recompute_row(c);
      } else if (delta[c * n + a] < rowmin[c]) {
        rowmin[c] = delta[c * n + a];
        rowarg[c] = static_cast<int>(a);
      }
    }
  }
  return tree;
}

Partition cut(const MergeTree& tree, int k) {
  const std::size_t n = tree.n_leaves();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw ValidationError("cut: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) +
                          "]");
  }
  DisjointSet ds(n);
  // repr[node] = a leaf inside that node's cluster
  std::vector<int> repr(2 * n - 1, -1);
  for (std::size_t i = 0; i < n; ++i) repr[i] = static_cast<int>(i);
  const std::size_t apply = n - static_cast<std::size_t>(k);
  for (std::size_t t = 0; t < apply; ++t) {
    const MergeRecord& m = tree.merges[t];
    ds.unite(repr[m.left], repr[m.right]);
    repr[n + t] = repr[m.left];
  }
  Partition p;
  p.k = k;
  p.assignment = canonical_labels(ds, n, k);
  return p;
}

std::vector<std::vector<int>> cut_all(const MergeTree& tree, int k_max) {
  const std::size_t n = tree.n_leaves();
  if (k_max < 1 || static_cast<std::size_t>(k_max) > n) {
    throw ValidationError("cut_all: k_max=" + std::to_string(k_max) + " outside [1, " +
                          std::to_string(n) + "]");
  }
  std::vector<std::vector<int>> out(static_cast<std::size_t>(k_max));
  DisjointSet ds(n);
  std::vector<int> repr(2 * n - 1, -1);
  for (std::size_t i = 0; i < n; ++i) repr[i] = static_cast<int>(i);
  if (static_cast<std::size_t>(k_max) == n) {
    out[k_max - 1] = canonical_labels(ds, n, k_max);
  }
  for (std::size_t t = 0; t < tree.merges.size(); ++t) {
    const MergeRecord& m = tree.merges[t];
    ds.unite(repr[m.left], repr[m.right]);
    repr[n + t] = repr[m.left];
    const std::size_t k = n - t - 1;  // clusters after this merge
    if (k >= 1 && k <= static_cast<std::size_t>(k_max)) {
      out[k - 1] = canonical_labels(ds, n, static_cast<int>(k));
    }
  }
  return out;
}

std::vector<std::pair<int, int>> merge_slots(const MergeTree& tree) {
  const std::size_t n = tree.n_leaves();
  std::vector<int> slot(2 * n - 1, -1);
  for (std::size_t i = 0; i < n; ++i) slot[i] = static_cast<int>(i);
  std::vector<std::pair<int, int>> out;
  out.reserve(tree.merges.size());
  for (std::size_t t = 0; t < tree.merges.size(); ++t) {
    const MergeRecord& m = tree.merges[t];
    const int sa = slot[m.left];
    const int sb = slot[m.right];
    if (sa < 0 || sb < 0 || sa == sb) {
      throw InternalError("merge_slots: malformed tree at merge " + std::to_string(t));
    }
    const int lo = std::min(sa, sb);
    const int hi = std::max(sa, sb);
    out.emplace_back(lo, hi);
    slot[n + t] = lo;
  }
  return out;
}

void write_merge_tree_csv(const std::string& path, const MergeTree& tree,
                          const std::string& manifest_digest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write file: " + path);
  }
  out << "# manifest=" << manifest_digest << "\n";
  out << "left,right,height,merged_weight\n";
  for (const MergeRecord& m : tree.merges) {
    out << m.left << "," << m.right << "," << format_double(m.height) << ","
        << format_double(m.merged_weight) << "\n";
  }
}

}  // namespace geoclust
