#pragma once

#include <string>
#include <vector>

#include "geoclust/selection.hpp"
#include "geoclust/types.hpp"
#include "geoclust/ward.hpp"

namespace geoclust {

// Selection-report JSON: the full grid of metrics plus curves, machine
// precision (shortest round-trip doubles; NaN serialized as null).
// `manifest_digest` is the digest of the run that produced the data.
void write_report_json(const std::string& path, const SelectionReport& report,
                       const std::string& manifest_digest);

struct LoadedReport {
  SelectionReport report;
  std::string manifest_digest;  // digest of the producing run, as stored
};

// Parses and validates a stored report. Throws ValidationError on a parse
// failure or schema mismatch.
LoadedReport read_report_json(const std::string& path);

// Plot-ready per-k curves at the per-k optimal weighting: one row per k with
// the weighting components, per-matrix explained shares, the weighted
// average, silhouette and gain. Curve files embed the digest of the run that
// produced the *data*, so regenerating them from a stored report reproduces
// the original files byte for byte.
void write_curves_csv(const std::string& path, const SelectionReport& report,
                      const std::string& manifest_digest);
void write_curves_json(const std::string& path, const SelectionReport& report,
                       const std::string& manifest_digest);

// id,cluster plus any metadata pass-through columns, dataset order.
void write_assignments_csv(const std::string& path, const Dataset& dataset,
                           const Partition& partition, const std::string& manifest_digest);

// GeoJSON FeatureCollection of entity points with {id, cluster} properties.
void write_geojson(const std::string& path, const Dataset& dataset,
                   const Partition& partition, const std::string& manifest_digest);

// Per-cluster, per-variable, per-year mean and quartiles of the observed
// series values (the data behind cluster-profile fan charts).
void write_series_summary_csv(const std::string& path, const Dataset& dataset,
                              const Partition& partition,
                              const std::vector<std::string>& variables,
                              const std::string& manifest_digest);

}  // namespace geoclust
