#include "geoclust/synthetic.hpp"

#include <cstdio>
#include <random>

namespace geoclust {

namespace {
std::string padded_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, i);
  return buf;
}
}  // namespace

std::vector<int> planted_groups(std::size_t n) {
  std::vector<int> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<int>(i % 2);
  return g;
}

Dataset planted_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> feature_jitter(-0.002, 0.002);
  std::uniform_real_distribution<double> coord_jitter(-0.005, 0.005);
  std::uniform_real_distribution<double> series_jitter(-0.0005, 0.0005);

  Dataset ds;
  ds.feature_columns = {"f1", "f2"};
  ds.metadata_columns = {"group"};
  for (std::size_t i = 0; i < n; ++i) {
    const int g = static_cast<int>(i % 2);
    Entity e;
    e.id = padded_id("e", i);
    e.lat = (g == 0 ? 45.0 : 52.0) + coord_jitter(rng);
    e.lon = (g == 0 ? 5.0 : 12.0) + coord_jitter(rng);
    const double center = (g == 0 ? 0.0 : 1.0);
    e.features = {center + feature_jitter(rng), center + feature_jitter(rng)};
    TimeSeries ts;
    const double level = (g == 0 ? 1.0 : 5.0);
    for (int year = 2013; year <= 2023; ++year) {
      ts.stamps.push_back(year);
      ts.values.push_back(level + 0.3 * (year - 2013) + series_jitter(rng));
    }
    e.series["output"] = std::move(ts);
    e.metadata = {g == 0 ? "g0" : "g1"};
    ds.entities.push_back(std::move(e));
  }
  ds.weights = WeightVector::uniform(n);
  ds.validate();
  return ds;
}

DissimilarityMatrix planted_matrix(std::size_t n, std::uint64_t seed, const std::string& label) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> within(0.001, 0.01);
  std::uniform_real_distribution<double> between(1.0, 1.3);
  DissimilarityMatrix m(n, label);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = (i % 2 == j % 2) ? within(rng) : between(rng);
      m.at(i, j) = d;
      m.at(j, i) = d;
    }
  }
  validate_matrix_inplace(m);
  return m;
}

DissimilarityMatrix noise_matrix(std::size_t n, std::uint64_t seed, double lo, double hi,
                                 const std::string& label) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> entry(lo, hi);
  DissimilarityMatrix m(n, label);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = entry(rng);
      m.at(i, j) = d;
      m.at(j, i) = d;
    }
  }
  validate_matrix_inplace(m);
  return m;
}

DissimilarityMatrix random_matrix(std::size_t n, std::uint64_t seed, const std::string& label) {
  return normalize_max(noise_matrix(n, seed, 0.05, 1.0, label));
}

Dataset random_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> lat(40.0, 55.0);
  std::uniform_real_distribution<double> lon(-5.0, 15.0);
  std::uniform_real_distribution<double> feature(0.0, 1.0);
  std::uniform_real_distribution<double> level(0.0, 5.0);
  std::uniform_real_distribution<double> step(-0.3, 0.3);

  Dataset ds;
  ds.feature_columns = {"f1", "f2", "f3"};
  ds.metadata_columns = {"tag"};
  for (std::size_t i = 0; i < n; ++i) {
    Entity e;
    e.id = padded_id("r", i);
    e.lat = lat(rng);
    e.lon = lon(rng);
    e.features = {feature(rng), feature(rng), feature(rng)};
    for (const char* variable : {"v1", "v2", "v3"}) {
      const int len = 4 + static_cast<int>(rng() % 8);  // 4..11 years
      TimeSeries ts;
      double value = level(rng);
      for (int year = 2023 - len + 1; year <= 2023; ++year) {
        ts.stamps.push_back(year);
        ts.values.push_back(value);
        value += step(rng);
      }
      e.series[variable] = std::move(ts);
    }
    e.metadata = {std::string("t") + std::to_string(i % 3)};
    ds.entities.push_back(std::move(e));
  }
  ds.weights = WeightVector::uniform(n);
  ds.validate();
  return ds;
}

}  // namespace geoclust
