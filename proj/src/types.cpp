#include "geoclust/types.hpp"

#include <cmath>
#include <set>
#include <unordered_set>

#include "geoclust/errors.hpp"

namespace geoclust {

void TimeSeries::validate(const std::string& context) const {
  if (stamps.empty()) {
    throw ValidationError(context + ": time series is empty");
  }
  if (stamps.size() != values.size()) {
    throw ValidationError(context + ": stamps and values differ in length (" +
                          std::to_string(stamps.size()) + " vs " +
                          std::to_string(values.size()) + ")");
  }
  for (std::size_t t = 1; t < stamps.size(); ++t) {
    if (stamps[t] <= stamps[t - 1]) {
      throw ValidationError(context + ": stamps not strictly increasing at position " +
                            std::to_string(t) + " (" + std::to_string(stamps[t - 1]) +
                            " then " + std::to_string(stamps[t]) + ")");
    }
  }
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (!std::isfinite(values[t])) {
      throw ValidationError(context + ": non-finite value at stamp " +
                            std::to_string(stamps[t]));
    }
  }
}

void Entity::validate() const {
  if (id.empty()) {
    throw ValidationError("entity with empty id");
  }
  if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0) {
    throw ValidationError("entity " + id + ": lat out of range [-90, 90]");
  }
  if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0) {
    throw ValidationError("entity " + id + ": lon out of range [-180, 180]");
  }
  for (double f : features) {
    if (!std::isfinite(f)) {
      throw ValidationError("entity " + id + ": non-finite feature value");
    }
  }
  for (const auto& [name, ts] : series) {
    ts.validate("entity " + id + ", variable " + name);
  }
}

WeightVector WeightVector::uniform(std::size_t n) {
  WeightVector w;
  w.w_.assign(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
  w.uniform_ = true;
  return w;
}

WeightVector WeightVector::from_values(std::vector<double> values) {
  if (values.empty()) {
    throw ValidationError("weights: need at least one value");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] <= 0.0) {
      throw ValidationError("weight at position " + std::to_string(i) +
                            " must be a positive finite number");
    }
  }
  WeightVector w;
  w.w_ = std::move(values);
  w.uniform_ = false;
  return w;
}

void Dataset::validate() const {
  std::unordered_set<std::string> seen;
  seen.reserve(entities.size());
  for (const Entity& e : entities) {
    e.validate();
    if (!seen.insert(e.id).second) {
      throw ValidationError("duplicate entity id: " + e.id);
    }
    if (e.features.size() != feature_columns.size()) {
      throw ValidationError("entity " + e.id + ": has " + std::to_string(e.features.size()) +
                            " feature values but the dataset declares " +
                            std::to_string(feature_columns.size()) + " feature columns");
    }
    if (e.metadata.size() != metadata_columns.size()) {
      throw ValidationError("entity " + e.id + ": metadata values misaligned with columns");
    }
  }
  if (weights.size() != entities.size()) {
    throw ValidationError("weight vector length " + std::to_string(weights.size()) +
                          " does not match entity count " + std::to_string(entities.size()));
  }
}

std::vector<std::string> Dataset::series_variables() const {
  std::set<std::string> names;
  for (const Entity& e : entities) {
    for (const auto& [name, ts] : e.series) {
      (void)ts;
      names.insert(name);
    }
  }
  return {names.begin(), names.end()};
}

FilterResult filter_min_observations(const Dataset& dataset,
                                     const std::vector<std::string>& variables,
                                     std::size_t min_observations) {
  if (min_observations < 1) {
    throw ValidationError("minimum observation count must be >= 1");
  }
  for (const std::string& v : variables) {
    bool present = false;
    for (const Entity& e : dataset.entities) {
      if (e.series.count(v)) {
        present = true;
        break;
      }
    }
    if (!present) {
      throw ValidationError("variable '" + v + "' has no series in any entity");
    }
  }

  FilterResult out;
  out.dataset.feature_columns = dataset.feature_columns;
  out.dataset.metadata_columns = dataset.metadata_columns;
  std::vector<double> kept_weights;
  for (std::size_t i = 0; i < dataset.entities.size(); ++i) {
    const Entity& e = dataset.entities[i];
    bool keep = true;
    for (const std::string& v : variables) {
      auto it = e.series.find(v);
      if (it == e.series.end() || it->second.size() < min_observations) {
        keep = false;
        break;
      }
    }
    if (keep) {
      out.dataset.entities.push_back(e);
      kept_weights.push_back(dataset.weights[i]);
    }
  }
  out.removed = dataset.entities.size() - out.dataset.entities.size();
  if (out.dataset.entities.empty()) {
    throw DegenerateDataError("minimum-observation filter removed every entity (min " +
                              std::to_string(min_observations) + " points)");
  }
  out.dataset.weights = dataset.weights.is_uniform()
                            ? WeightVector::uniform(out.dataset.entities.size())
                            : WeightVector::from_values(std::move(kept_weights));
  return out;
}

}  // namespace geoclust
