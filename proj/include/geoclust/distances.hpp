#pragma once

#include <string>

#include "geoclust/dissimilarity.hpp"
#include "geoclust/types.hpp"

namespace geoclust {

// IUGG mean Earth radius, fixed for reproducibility.
inline constexpr double kEarthRadiusKm = 6371.0088;

// Great-circle (haversine) distance in kilometers between two points given
// in degrees. Symmetric, zero for coincident points, bounded by pi * R.
double haversine_km(double lat1, double lon1, double lat2, double lon2);

// Pairwise Euclidean distance of the entities' static feature vectors.
// Requires equal feature lengths >= 1 and finite values. Un-normalized.
DissimilarityMatrix feature_distance(const Dataset& dataset, int threads = 1);

// Pairwise haversine distance of the entities' coordinates, in km.
// Un-normalized.
DissimilarityMatrix geodetic_distance(const Dataset& dataset, int threads = 1);

// Dynamic time warping with point cost |x_s - y_r|, unconstrained, over the
// observed value sequences (missing years are compressed away). Symmetric;
// zero when x == y. Throws ValidationError on an empty series.
double dtw(const TimeSeries& x, const TimeSeries& y);

// Pairwise DTW over one variable's series. Every entity must carry the
// variable; every pair must share at least one time stamp (otherwise a
// DegenerateDataError names the pair — apply filter_min_observations first).
// Un-normalized.
DissimilarityMatrix dtw_matrix(const Dataset& dataset, const std::string& variable,
                               int threads = 1);

}  // namespace geoclust
