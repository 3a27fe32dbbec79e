#pragma once

#include <cstdint>
#include <vector>

#include "pnss/sphere.hpp"

namespace pnss {

/// Symmetric n x n matrix with zero diagonal and non-negative entries,
/// stored in condensed (upper triangle, row-major) form.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n = 0) : n_(n), data_(n * (n > 0 ? n - 1 : 0) / 2, 0.0) {}

  /// Validates symmetry (1e-12), zero diagonal and non-negativity.
  static DistanceMatrix from_dense(const Matrix& m);

  std::size_t size() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return 0.0;
    return data_[index(i, j)];
  }
  void set(std::size_t i, std::size_t j, double v);

  Matrix dense() const;
  const std::vector<double>& condensed() const noexcept { return data_; }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
  }
  std::size_t n_;
  std::vector<double> data_;
};

/// Pairwise great-circle distances of the columns of a unit-vector matrix.
DistanceMatrix great_circle_distance_matrix(const Matrix& points, unsigned threads = 1);
DistanceMatrix great_circle_distance_matrix(const std::vector<SpherePoint>& points, unsigned threads = 1);

/// Pairwise Euclidean distances of the rows of `rows`.
DistanceMatrix euclidean_distance_matrix(const Matrix& rows, unsigned threads = 1);

enum class WardVariant {
  WardD,   ///< Lance-Williams Ward update on unsquared distances
  WardD2,  ///< same update on squared distances, heights reported as roots
};

/// Merge record in the usual agglomeration convention: ids < n are
/// observations, id n + s is the cluster formed at step s.
struct Merge {
  std::size_t left;
  std::size_t right;
  double height;
  std::size_t size;
};

struct Dendrogram {
  std::size_t observations = 0;
  std::vector<Merge> merges;  ///< n - 1 records in agglomeration order
};

Dendrogram ward_linkage(const DistanceMatrix& d, WardVariant variant = WardVariant::WardD);

/// Labels 1..K after applying the first n - K merges, numbered by the order
/// in which each cluster's first member appears.
std::vector<int> cut_tree(const Dendrogram& tree, std::size_t k);

/// ward_linkage followed by cut_tree.
std::vector<int> ward_cluster(const DistanceMatrix& d, std::size_t k,
                              WardVariant variant = WardVariant::WardD);

}  // namespace pnss
