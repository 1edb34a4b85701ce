#include "geoclust/distances.hpp"

#include <algorithm>
#include <cmath>

#include "geoclust/errors.hpp"
#include "geoclust/parallel.hpp"

namespace geoclust {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

// Runs fn over the strict upper triangle of an n x n matrix, one task per
// row, and mirrors results; each (i, j) computation must be pure.
template <typename Fn>
DissimilarityMatrix upper_triangle(std::size_t n, const std::string& label, int threads,
                                   Fn&& fn) {
  DissimilarityMatrix m(n, label);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = fn(i, j);
      m.at(i, j) = d;
      m.at(j, i) = d;
    }
  });
  return m;
}
}  // namespace

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  const double phi1 = lat1 * kDegToRad;
  const double phi2 = lat2 * kDegToRad;
  const double dphi = (lat2 - lat1) * kDegToRad;
  const double dlambda = (lon2 - lon1) * kDegToRad;
  const double s = std::sin(dphi / 2.0);
  const double t = std::sin(dlambda / 2.0);
  const double h = s * s + std::cos(phi1) * std::cos(phi2) * t * t;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

DissimilarityMatrix feature_distance(const Dataset& dataset, int threads) {
  const std::size_t n = dataset.size();
  if (n < 2) {
    throw ValidationError("feature distance needs at least 2 entities");
  }
  const std::size_t dim = dataset.entities[0].features.size();
  if (dim == 0) {
    throw ValidationError("feature distance needs at least one feature column");
  }
  for (const Entity& e : dataset.entities) {
    if (e.features.size() != dim) {
      throw ValidationError("entity " + e.id + ": feature vector length " +
                            std::to_string(e.features.size()) + " differs from " +
                            std::to_string(dim));
    }
    for (double f : e.features) {
      if (!std::isfinite(f)) {
        throw ValidationError("entity " + e.id + ": non-finite feature value");
      }
    }
  }
  return upper_triangle(n, "feature", threads, [&](std::size_t i, std::size_t j) {
    const auto& a = dataset.entities[i].features;
    const auto& b = dataset.entities[j].features;
    double sum = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double d = a[k] - b[k];
      sum += d * d;
    }
    return std::sqrt(sum);
  });
}

DissimilarityMatrix geodetic_distance(const Dataset& dataset, int threads) {
  const std::size_t n = dataset.size();
  if (n < 2) {
    throw ValidationError("geodetic distance needs at least 2 entities");
  }
  for (const Entity& e : dataset.entities) e.validate();
  return upper_triangle(n, "spatial", threads, [&](std::size_t i, std::size_t j) {
    const Entity& a = dataset.entities[i];
    const Entity& b = dataset.entities[j];
    return haversine_km(a.lat, a.lon, b.lat, b.lon);
  });
}

double dtw(const TimeSeries& x, const TimeSeries& y) {
  const std::size_t nx = x.values.size();
  const std::size_t ny = y.values.size();
  if (nx == 0 || ny == 0) {
    throw ValidationError("dtw: empty series");
  }
  // One rolling row of the accumulated-cost table.
  std::vector<double> prev(ny), cur(ny);
  prev[0] = std::abs(x.values[0] - y.values[0]);
  for (std::size_t r = 1; r < ny; ++r) {
    prev[r] = std::abs(x.values[0] - y.values[r]) + prev[r - 1];
  }
  for (std::size_t s = 1; s < nx; ++s) {
    cur[0] = std::abs(x.values[s] - y.values[0]) + prev[0];
    for (std::size_t r = 1; r < ny; ++r) {
      const double best = std::min(prev[r - 1], std::min(prev[r], cur[r - 1]));
      cur[r] = std::abs(x.values[s] - y.values[r]) + best;
    }
    std::swap(prev, cur);
  }
  return prev[ny - 1];
}

namespace {
bool stamps_overlap(const TimeSeries& a, const TimeSeries& b) {
  // stamps are strictly increasing; walk both in step
  std::size_t i = 0, j = 0;
  while (i < a.stamps.size() && j < b.stamps.size()) {
    if (a.stamps[i] == b.stamps[j]) return true;
    if (a.stamps[i] < b.stamps[j]) ++i;
    else ++j;
  }
  return false;
}
}  // namespace

DissimilarityMatrix dtw_matrix(const Dataset& dataset, const std::string& variable,
                               int threads) {
  const std::size_t n = dataset.size();
  if (n < 2) {
    throw ValidationError("dtw matrix needs at least 2 entities");
  }
  std::vector<const TimeSeries*> series(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Entity& e = dataset.entities[i];
    auto it = e.series.find(variable);
    if (it == e.series.end()) {
      throw ValidationError("entity " + e.id + ": no series for variable '" + variable +
                            "' (apply the minimum-observations filter first)");
    }
    it->second.validate("entity " + e.id + ", variable " + variable);
    series[i] = &it->second;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!stamps_overlap(*series[i], *series[j])) {
        throw DegenerateDataError(
            "variable '" + variable + "': series of entities '" + dataset.entities[i].id +
            "' and '" + dataset.entities[j].id +
            "' share no time stamp; apply the minimum-observations filter");
      }
    }
  }
  return upper_triangle(n, "dtw:" + variable, threads,
                        [&](std::size_t i, std::size_t j) { return dtw(*series[i], *series[j]); });
}

}  // namespace geoclust
