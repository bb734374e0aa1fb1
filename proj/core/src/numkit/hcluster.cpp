#include "gamette/numkit/hcluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gamette/error.hpp"

namespace gamette::numkit {

std::string_view to_string(Linkage l) {
  switch (l) {
    case Linkage::Ward: return "ward";
    case Linkage::Average: return "average";
    case Linkage::Complete: return "complete";
  }
  return "?";
}

ClusterTree::ClusterTree(std::size_t leaves, Linkage linkage, std::vector<Merge> merges)
    : leaves_(leaves), linkage_(linkage), merges_(std::move(merges)) {
  if (leaves_ > 0 && merges_.size() != leaves_ - 1)
    throw validation_error("ClusterTree: expected n-1 merges");
}

std::vector<int> ClusterTree::cut(std::size_t k) const {
  if (k == 0) throw validation_error("cut: k must be >= 1");
  if (k > leaves_) throw validation_error("cut: k larger than the number of points");

  std::vector<std::size_t> parent(leaves_ + merges_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t s = 0; s < leaves_ - k; ++s) {
    const std::size_t id = leaves_ + s;
    parent[find(merges_[s].left)] = id;
    parent[find(merges_[s].right)] = id;
  }
  std::vector<int> labels(leaves_, -1);
  std::vector<int> root_label(parent.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < leaves_; ++i) {
    const std::size_t r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    labels[i] = root_label[r];
  }
  return labels;
}

ClusterTree hcluster(CondensedDistances d, Linkage linkage) {
  const std::size_t n = d.size();
  if (n == 0) throw validation_error("hcluster: no points");
  std::vector<Merge> merges;
  merges.reserve(n - 1);
  if (n == 1) return ClusterTree(1, linkage, std::move(merges));

  // Ward runs the recurrence on squared distances.
  if (linkage == Linkage::Ward) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d.at(i, j) = d(i, j) * d(i, j);
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> cluster_id(n);
  std::iota(cluster_id.begin(), cluster_id.end(), 0);
  // nn[i] is the nearest active slot j > i (lowest j on ties).
  std::vector<std::size_t> nn(n, kNone);
  std::vector<double> nn_dist(n, kInf);

  auto rescan = [&](std::size_t i) {
    nn[i] = kNone;
    nn_dist[i] = kInf;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (active[j] && d(i, j) < nn_dist[i]) {
        nn_dist[i] = d(i, j);
        nn[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i + 1 < n; ++i) rescan(i);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t i = kNone;
    for (std::size_t k = 0; k < n; ++k) {
      if (active[k] && nn[k] != kNone && (i == kNone || nn_dist[k] < nn_dist[i])) i = k;
    }
    const std::size_t j = nn[i];
    const double dij = nn_dist[i];
    const double ni = static_cast<double>(size[i]);
    const double nj = static_cast<double>(size[j]);

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == i || k == j) continue;
      const double dki = d(k, i);
      const double dkj = d(k, j);
      double updated = 0.0;
      switch (linkage) {
        case Linkage::Ward: {
          const double nk = static_cast<double>(size[k]);
          updated = ((ni + nk) * dki + (nj + nk) * dkj - nk * dij) / (ni + nj + nk);
          break;
        }
        case Linkage::Average: updated = (ni * dki + nj * dkj) / (ni + nj); break;
        case Linkage::Complete: updated = std::max(dki, dkj); break;
      }
      d.at(k, i) = updated;
    }

    const double height = linkage == Linkage::Ward ? std::sqrt(std::max(0.0, dij)) : dij;
    merges.push_back({std::min(cluster_id[i], cluster_id[j]), std::max(cluster_id[i], cluster_id[j]),
                      height, size[i] + size[j]});
    active[j] = false;
    size[i] += size[j];
    cluster_id[i] = n + step;

    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k]) continue;
      if (k == i || nn[k] == i || nn[k] == j) {
        rescan(k);
      } else if (k < i && d(k, i) < nn_dist[k]) {
        nn_dist[k] = d(k, i);
        nn[k] = i;
      } else if (k < i && d(k, i) == nn_dist[k] && i < nn[k]) {
        nn[k] = i;
      }
    }
    nn[j] = kNone;
    nn_dist[j] = kInf;
  }
  return ClusterTree(n, linkage, std::move(merges));
}

ClusterTree hcluster_points(const Matrix& points, Linkage linkage) {
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
  return hcluster(std::move(d), linkage);
}

ClusterTree hcluster_matrix(const Matrix& distances, Linkage linkage) {
  const std::size_t n = distances.rows();
  if (distances.cols() != n) throw validation_error("hcluster: distance matrix not square");
  CondensedDistances d(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (distances(i, i) != 0.0) throw validation_error("hcluster: nonzero diagonal");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = distances(i, j);
      if (!(v >= 0.0) || v != distances(j, i))
        throw validation_error("hcluster: distances must be symmetric and nonnegative");
      d.at(i, j) = v;
    }
  }
  return hcluster(std::move(d), linkage);
}

}  // namespace gamette::numkit
