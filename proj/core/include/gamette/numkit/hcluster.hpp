#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gamette/numkit/matrix.hpp"

namespace gamette::numkit {

enum class Linkage : std::uint8_t { Ward, Average, Complete };
std::string_view to_string(Linkage l);

/// One agglomeration step. Leaves are 0..n-1; the cluster created by step s
/// has id n+s.
struct Merge {
  std::size_t left = 0;
  std::size_t right = 0;
  double height = 0.0;
  std::size_t size = 0;
};

class ClusterTree {
 public:
  ClusterTree(std::size_t leaves, Linkage linkage, std::vector<Merge> merges);

  std::size_t leaf_count() const { return leaves_; }
  Linkage linkage() const { return linkage_; }
  const std::vector<Merge>& merges() const { return merges_; }

  /// Flat labels with exactly k clusters, numbered by first member index.
  std::vector<int> cut(std::size_t k) const;

 private:
  std::size_t leaves_;
  Linkage linkage_;
  std::vector<Merge> merges_;
};

/// Symmetric distance storage keeping only the strict upper triangle.
class CondensedDistances {
 public:
  explicit CondensedDistances(std::size_t n) : n_(n), d_(n < 2 ? 0 : n * (n - 1) / 2, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[index(i, j)]; }
  double& at(std::size_t i, std::size_t j) { return d_[index(i, j)]; }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * n_ - i * (i + 1) / 2 + (j - i - 1);
  }
  std::size_t n_;
  std::vector<double> d_;
};

/// Agglomerative clustering with Lance-Williams updates. The closest pair is
/// merged each step; ties go to the lowest (i, j) slot pair, where a merged
/// cluster keeps the lower slot. Ward expects Euclidean distances and reports
/// heights on the Euclidean scale.
ClusterTree hcluster(CondensedDistances distances, Linkage linkage);
ClusterTree hcluster_points(const Matrix& points, Linkage linkage);
ClusterTree hcluster_matrix(const Matrix& distances, Linkage linkage);

}  // namespace gamette::numkit
