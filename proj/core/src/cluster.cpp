#include "pnss/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pnss/parallel.hpp"

namespace pnss {

namespace {

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  std::vector<std::size_t> parent;
};

}  // namespace

DistanceMatrix DistanceMatrix::from_dense(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("distance matrix must be square");
  const auto n = static_cast<std::size_t>(m.rows());
  DistanceMatrix d(n);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 0.0) throw DomainError("distance matrix diagonal must be zero");
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-12) throw DomainError("distance matrix is not symmetric");
      d.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), m(i, j));
    }
  }
  return d;
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double v) {
  if (i == j) throw DomainError("cannot set a diagonal distance");
  if (!(v >= 0.0)) throw DomainError("distances must be non-negative");
  data_[index(i, j)] = v;
}

Matrix DistanceMatrix::dense() const {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = (*this)(i, j);
  return m;
}

DistanceMatrix great_circle_distance_matrix(const Matrix& points, unsigned threads) {
  const auto n = static_cast<std::size_t>(points.cols());
  DistanceMatrix d(n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j)
      d.set(i, j, spherical_distance(Vector(points.col(static_cast<Eigen::Index>(i))),
                                     Vector(points.col(static_cast<Eigen::Index>(j)))));
  });
  return d;
}

DistanceMatrix great_circle_distance_matrix(const std::vector<SpherePoint>& points, unsigned threads) {
  if (points.empty()) return DistanceMatrix(0);
  Matrix m(points.front().ambient(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].ambient() != m.rows())
      throw DimensionError("great_circle_distance_matrix: points differ in dimension");
    m.col(static_cast<Eigen::Index>(j)) = points[j].coords();
  }
  return great_circle_distance_matrix(m, threads);
}

DistanceMatrix euclidean_distance_matrix(const Matrix& rows, unsigned threads) {
  const auto n = static_cast<std::size_t>(rows.rows());
  DistanceMatrix d(n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j)
      d.set(i, j, (rows.row(static_cast<Eigen::Index>(i)) - rows.row(static_cast<Eigen::Index>(j))).norm());
  });
  return d;
}

Dendrogram ward_linkage(const DistanceMatrix& input, WardVariant variant) {
  const std::size_t n = input.size();
  Dendrogram tree;
  tree.observations = n;
  if (n < 2) return tree;

  // Working dissimilarities; slot s always contains observation s, so a slot
  // index doubles as a representative member of its cluster.
  std::vector<double> dist = input.condensed();
  if (variant == WardVariant::WardD2)
    for (double& v : dist) v *= v;
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    if (i > j) std::swap(i, j);
    return dist[i * (2 * n - i - 1) / 2 + (j - i - 1)];
  };

  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), 0);
  std::vector<std::size_t> chain;
  chain.reserve(n);

  struct RawMerge {
    std::size_t a, b;
    double height;
  };
  std::vector<RawMerge> raw;
  raw.reserve(n - 1);

  while (active.size() > 1) {
    if (chain.empty()) chain.push_back(active.front());
    std::size_t a = 0, b = 0;
    while (true) {
      a = chain.back();
      const bool has_prev = chain.size() >= 2;
      std::size_t best = has_prev ? chain[chain.size() - 2] : n;
      double best_d = has_prev ? at(a, best) : std::numeric_limits<double>::infinity();
      for (std::size_t c : active) {
        if (c == a) continue;
        const double dc = at(a, c);
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      if (has_prev && best == chain[chain.size() - 2]) {
        b = best;
        break;
      }
      chain.push_back(best);
    }
    chain.pop_back();
    chain.pop_back();

    const std::size_t lo = std::min(a, b);
    const std::size_t hi = std::max(a, b);
    const double dab = at(lo, hi);
    raw.push_back({lo, hi, dab});

    const double na = static_cast<double>(size[lo]);
    const double nb = static_cast<double>(size[hi]);
    for (std::size_t c : active) {
      if (c == lo || c == hi) continue;
      const double nc = static_cast<double>(size[c]);
      const double total = na + nb + nc;
      at(lo, c) = ((na + nc) * at(lo, c) + (nb + nc) * at(hi, c) - nc * dab) / total;
    }
    size[lo] += size[hi];
    active.erase(std::find(active.begin(), active.end(), hi));
  }

  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawMerge& x, const RawMerge& y) { return x.height < y.height; });

  UnionFind uf(n);
  std::vector<std::size_t> node(n);
  std::iota(node.begin(), node.end(), 0);
  std::vector<std::size_t> members(n, 1);
  for (std::size_t s = 0; s < raw.size(); ++s) {
    const std::size_t ra = uf.find(raw[s].a);
    const std::size_t rb = uf.find(raw[s].b);
    const std::size_t ia = node[ra], ib = node[rb];
    const std::size_t merged = members[ra] + members[rb];
    const double h = variant == WardVariant::WardD2 ? std::sqrt(std::max(0.0, raw[s].height)) : raw[s].height;
    tree.merges.push_back(Merge{std::min(ia, ib), std::max(ia, ib), h, merged});
    uf.parent[rb] = ra;
    members[ra] = merged;
    node[ra] = n + s;
  }
  return tree;
}

std::vector<int> cut_tree(const Dendrogram& tree, std::size_t k) {
  const std::size_t n = tree.observations;
  if (k < 1 || k > n)
    throw RangeError("cluster count " + std::to_string(k) + " outside 1.." + std::to_string(n));
  UnionFind uf(2 * n);
  for (std::size_t s = 0; s + k < n; ++s) {
    uf.parent[uf.find(tree.merges[s].left)] = n + s;
    uf.parent[uf.find(tree.merges[s].right)] = n + s;
  }
  std::vector<int> labels(n, 0);
  std::vector<int> label_of_root(2 * n, 0);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = uf.find(i);
    if (label_of_root[r] == 0) label_of_root[r] = ++next;
    labels[i] = label_of_root[r];
  }
  return labels;
}

std::vector<int> ward_cluster(const DistanceMatrix& d, std::size_t k, WardVariant variant) {
  if (k < 1 || k > d.size())
    throw RangeError("cluster count " + std::to_string(k) + " outside 1.." + std::to_string(d.size()));
  return cut_tree(ward_linkage(d, variant), k);
}

}  // namespace pnss
