#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gamette/numkit/hcluster.hpp"
#include "gamette/numkit/matrix.hpp"

namespace gamette::numkit {

/// Sum of squared Euclidean distances from each point to its cluster centroid.
double within_cluster_ss(const Matrix& points, std::span<const int> labels);

/// Mean silhouette width over all points; singleton members score 0 and a
/// single cluster scores 0.
double mean_silhouette(const CondensedDistances& distances, std::span<const int> labels);

CondensedDistances euclidean_distances(const Matrix& points);

struct QualityCurves {
  std::vector<std::size_t> ks;
  std::vector<double> wss;
  std::vector<double> silhouette;
};

/// WSS on `points`, silhouette on `distances`, one entry per labeling.
QualityCurves cluster_quality(const Matrix& points, const CondensedDistances& distances,
                              std::span<const std::size_t> ks,
                              const std::vector<std::vector<int>>& labels_per_k);

}  // namespace gamette::numkit
