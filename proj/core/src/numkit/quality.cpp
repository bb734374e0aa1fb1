#include "gamette/numkit/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gamette/error.hpp"

namespace gamette::numkit {

namespace {

int cluster_count(std::span<const int> labels) {
  int k = 0;
  for (int l : labels) {
    if (l < 0) throw validation_error("cluster labels must be >= 0");
    k = std::max(k, l + 1);
  }
  return k;
}

}  // namespace

double within_cluster_ss(const Matrix& points, std::span<const int> labels) {
  if (labels.size() != points.rows()) throw validation_error("within_cluster_ss: label count mismatch");
  const int k = cluster_count(labels);
  const std::size_t d = points.cols();
  std::vector<double> centroid(static_cast<std::size_t>(k) * d, 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const auto c = static_cast<std::size_t>(labels[r]);
    ++count[c];
    for (std::size_t j = 0; j < d; ++j) centroid[c * d + j] += points(r, j);
  }
  for (std::size_t c = 0; c < count.size(); ++c)
    for (std::size_t j = 0; j < d; ++j)
      if (count[c] > 0) centroid[c * d + j] /= static_cast<double>(count[c]);
  double wss = 0.0;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    const auto c = static_cast<std::size_t>(labels[r]);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = points(r, j) - centroid[c * d + j];
      wss += diff * diff;
    }
  }
  return wss;
}

double mean_silhouette(const CondensedDistances& distances, std::span<const int> labels) {
  const std::size_t n = distances.size();
  if (labels.size() != n) throw validation_error("mean_silhouette: label count mismatch");
  if (n == 0) return 0.0;
  const auto k = static_cast<std::size_t>(cluster_count(labels));
  if (k < 2) return 0.0;

  std::vector<std::size_t> count(k, 0);
  for (int l : labels) ++count[static_cast<std::size_t>(l)];

  double total = 0.0;
  std::vector<double> sum_to(k);
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(labels[i]);
    if (count[own] < 2) continue;
    std::fill(sum_to.begin(), sum_to.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum_to[static_cast<std::size_t>(labels[j])] += distances(i, j);
    }
    const double a = sum_to[own] / static_cast<double>(count[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c != own && count[c] > 0) b = std::min(b, sum_to[c] / static_cast<double>(count[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

CondensedDistances euclidean_distances(const Matrix& points) {
  const std::size_t n = points.rows();
  CondensedDistances d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto pi = points.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto pj = points.row(j);
      double s = 0.0;
      for (std::size_t c = 0; c < points.cols(); ++c) s += (pi[c] - pj[c]) * (pi[c] - pj[c]);
      d.at(i, j) = std::sqrt(s);
    }
  }
  return d;
}

QualityCurves cluster_quality(const Matrix& points, const CondensedDistances& distances,
                              std::span<const std::size_t> ks,
                              const std::vector<std::vector<int>>& labels_per_k) {
  if (ks.size() != labels_per_k.size()) throw validation_error("cluster_quality: ks/labels mismatch");
  QualityCurves q;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    q.ks.push_back(ks[i]);
    q.wss.push_back(within_cluster_ss(points, labels_per_k[i]));
    q.silhouette.push_back(mean_silhouette(distances, labels_per_k[i]));
  }
  return q;
}

}  // namespace gamette::numkit
