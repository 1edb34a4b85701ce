#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace geoclust {

// One observed time series: integer (year) stamps, strictly increasing, one
// finite value per stamp. Stamps and values always have equal length >= 1.
struct TimeSeries {
  std::vector<int> stamps;
  std::vector<double> values;

  std::size_t size() const { return stamps.size(); }

  // Throws ValidationError if the invariants do not hold. `context` prefixes
  // the error message (e.g. "entity F001, variable output").
  void validate(const std::string& context) const;
};

// One georeferenced observation unit.
struct Entity {
  std::string id;
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]
  std::vector<double> features;
  std::map<std::string, TimeSeries> series;   // keyed by variable name
  std::vector<std::string> metadata;          // pass-through columns, aligned
                                              // with Dataset::metadata_columns

  void validate() const;  // id nonempty, lat/lon bounds, features finite
};

// Positive per-entity weights. Defaults to uniform 1/n; never renormalized.
class WeightVector {
 public:
  WeightVector() = default;
  static WeightVector uniform(std::size_t n);
  static WeightVector from_values(std::vector<double> values);  // validates

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  const std::vector<double>& values() const { return w_; }
  bool is_uniform() const { return uniform_; }

 private:
  std::vector<double> w_;
  bool uniform_ = false;
};

// Entities plus the column schema they were built from. Feature columns hold
// numbers for every entity; metadata columns are carried through untouched.
struct Dataset {
  std::vector<Entity> entities;
  std::vector<std::string> feature_columns;
  std::vector<std::string> metadata_columns;
  WeightVector weights;  // same length as entities

  std::size_t size() const { return entities.size(); }

  // Checks id uniqueness, per-entity invariants, weight alignment and the
  // column schema alignment. Throws ValidationError.
  void validate() const;

  // Variable names appearing in at least one entity's series, sorted.
  std::vector<std::string> series_variables() const;
};

struct FilterResult {
  Dataset dataset;
  std::size_t removed = 0;
};

// Keeps only entities whose series for *every* listed variable has at least
// `min_observations` points (entities lacking the variable are dropped).
// Throws ValidationError if a listed variable is absent from every entity or
// min_observations < 1; throws DegenerateDataError if nothing survives.
FilterResult filter_min_observations(const Dataset& dataset,
                                     const std::vector<std::string>& variables,
                                     std::size_t min_observations);

}  // namespace geoclust
