#include "geoclust/metrics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "geoclust/errors.hpp"

namespace geoclust {

namespace {
// Clusters of a partition as index lists, in label order 1..k.
std::vector<std::vector<std::size_t>> clusters_of(const Partition& p) {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(p.k));
  for (std::size_t i = 0; i < p.assignment.size(); ++i) {
    const int label = p.assignment[i];
    if (label < 1 || label > p.k) {
      throw ValidationError("partition: label " + std::to_string(label) + " outside 1.." +
                            std::to_string(p.k));
    }
    out[label - 1].push_back(i);
  }
  for (std::size_t c = 0; c < out.size(); ++c) {
    if (out[c].empty()) {
      throw ValidationError("partition: cluster " + std::to_string(c + 1) + " is empty");
    }
  }
  return out;
}

double inertia_sum(const std::vector<std::size_t>& cluster, const DissimilarityMatrix& m,
                   const WeightVector& w, bool square_entries) {
  if (cluster.empty()) {
    throw ValidationError("pseudo-inertia of an empty cluster");
  }
  const std::size_t n = m.size();
  double weight_sum = 0.0;
  for (std::size_t i : cluster) {
    if (i >= n || i >= w.size()) {
      throw ValidationError("pseudo-inertia: index " + std::to_string(i) + " out of range");
    }
    weight_sum += w[i];
  }
  double acc = 0.0;
  for (std::size_t i : cluster) {
    double row = 0.0;
    for (std::size_t j : cluster) {
      const double v = m(i, j);
      row += w[j] * (square_entries ? v * v : v);
    }
    acc += w[i] * row;
  }
  return acc / (2.0 * weight_sum);
}
}  // namespace

double pseudo_inertia(const std::vector<std::size_t>& cluster, const DissimilarityMatrix& d,
                      const WeightVector& w) {
  return inertia_sum(cluster, d, w, /*square_entries=*/true);
}

double pseudo_inertia_presquared(const std::vector<std::size_t>& cluster,
                                 const DissimilarityMatrix& s, const WeightVector& w) {
  return inertia_sum(cluster, s, w, /*square_entries=*/false);
}

namespace {
double within_sum(const Partition& p, const DissimilarityMatrix& m, const WeightVector& w,
                  bool square_entries) {
  if (p.assignment.size() != m.size()) {
    throw ValidationError("within-inertia: partition covers " +
                          std::to_string(p.assignment.size()) + " entities, matrix has " +
                          std::to_string(m.size()));
  }
  double acc = 0.0;
  for (const auto& cluster : clusters_of(p)) {
    acc += inertia_sum(cluster, m, w, square_entries);
  }
  return acc;
}
}  // namespace

double within_inertia(const Partition& p, const DissimilarityMatrix& d,
                      const WeightVector& w) {
  return within_sum(p, d, w, true);
}

double within_inertia_presquared(const Partition& p, const DissimilarityMatrix& s,
                                 const WeightVector& w) {
  return within_sum(p, s, w, false);
}

namespace {
double total_inertia(const DissimilarityMatrix& d, const WeightVector& w) {
  std::vector<std::size_t> all(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) all[i] = i;
  return pseudo_inertia(all, d, w);
}
}  // namespace

double explained_q(const Partition& p, const DissimilarityMatrix& d, const WeightVector& w) {
  const double total = total_inertia(d, w);
  if (total <= 0.0) {
    throw DegenerateDataError("matrix '" + d.label() +
                              "': zero total inertia, explained share undefined");
  }
  return 1.0 - within_inertia(p, d, w) / total;
}

double normalized_q(double q_mixed, double q_baseline) {
  if (!(q_baseline > 0.0)) {
    throw DegenerateDataError("normalized explained share: zero baseline");
  }
  return q_mixed / q_baseline;
}

QBarForms q_bar_forms(const Partition& p, const std::vector<DissimilarityMatrix>& matrices,
                      const WeightVector& w) {
  if (matrices.empty()) {
    throw ValidationError("q_bar: no matrices");
  }
  const std::size_t n = matrices[0].size();
  double total_sum = 0.0, within_total = 0.0, weighted_q_num = 0.0, gain_num = 0.0;
  for (const DissimilarityMatrix& d : matrices) {
    if (d.size() != n) {
      throw ValidationError("q_bar: matrix '" + d.label() + "' size mismatch");
    }
    const double total = total_inertia(d, w);
    if (total <= 0.0) {
      throw DegenerateDataError("matrix '" + d.label() +
                                "': zero total inertia, weighted average undefined");
    }
    const double within = within_inertia(p, d, w);
    total_sum += total;
    within_total += within;
    weighted_q_num += (1.0 - within / total) * total;
    gain_num += total - within;
  }
  QBarForms f;
  f.weighted_q = weighted_q_num / total_sum;
  f.gain = gain_num / total_sum;
  f.within = 1.0 - within_total / total_sum;
  return f;
}

double q_bar(const Partition& p, const std::vector<DissimilarityMatrix>& matrices,
             const WeightVector& w) {
  const QBarForms f = q_bar_forms(p, matrices, w);
  assert(std::abs(f.weighted_q - f.within) <= 1e-12 &&
         std::abs(f.gain - f.within) <= 1e-12);
  return f.within;
}

double silhouette(const Partition& p, const DissimilarityMatrix& d) {
  const std::size_t n = d.size();
  const int k = p.k;
  if (k < 2 || static_cast<std::size_t>(k) > n - 1) {
    throw ValidationError("silhouette: k=" + std::to_string(k) + " outside [2, " +
                          std::to_string(n - 1) + "]");
  }
  if (p.assignment.size() != n) {
    throw ValidationError("silhouette: partition does not cover the matrix");
  }
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int label : p.assignment) {
    if (label < 1 || label > k) {
      throw ValidationError("silhouette: label outside 1..k");
    }
    ++sizes[label - 1];
  }
  double acc = 0.0;
  std::vector<double> sum_to(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = static_cast<std::size_t>(p.assignment[i] - 1);
    if (sizes[own] == 1) continue;  // singleton scores 0
    std::fill(sum_to.begin(), sum_to.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      sum_to[p.assignment[j] - 1] += d(i, j);
    }
    const double a = sum_to[own] / static_cast<double>(sizes[own] - 1);  // d(i,i)=0
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
      if (c == own) continue;
      b = std::min(b, sum_to[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    acc += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return acc / static_cast<double>(n);
}

std::vector<std::pair<int, double>> gain_curve(const std::vector<MetricsRecord>& records) {
  if (records.size() < 2) {
    throw ValidationError("gain curve needs at least 2 records");
  }
  std::vector<std::pair<int, double>> out;
  out.reserve(records.size() - 1);
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].k != records[i - 1].k + 1) {
      throw ValidationError("gain curve needs consecutive k, got " +
                            std::to_string(records[i - 1].k) + " then " +
                            std::to_string(records[i].k));
    }
    out.emplace_back(records[i].k, records[i].q_bar - records[i - 1].q_bar);
  }
  return out;
}

}  // namespace geoclust
