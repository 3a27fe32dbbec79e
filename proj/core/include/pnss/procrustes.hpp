#pragma once

#include <Eigen/Dense>
#include <vector>

#include "pnss/error.hpp"
#include "pnss/sphere.hpp"

namespace pnss {

/// k x m landmark matrix, k > m >= 2.
class Configuration {
 public:
  explicit Configuration(Matrix points);

  const Matrix& points() const noexcept { return points_; }
  Eigen::Index landmarks() const noexcept { return points_.rows(); }
  Eigen::Index dims() const noexcept { return points_.cols(); }

 private:
  Matrix points_;
};

/// Unit Frobenius-norm (k-1) x m matrix: a point on the pre-shape sphere.
class PreShape {
 public:
  /// Checks unit norm to 1e-10 and rescales to exact unit norm.
  explicit PreShape(Matrix m);

  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index rows() const noexcept { return m_.rows(); }
  Eigen::Index cols() const noexcept { return m_.cols(); }

  /// Column-stacked coordinates as a point of S^{m(k-1)-1}.
  Vector vec() const { return Eigen::Map<const Vector>(m_.data(), m_.size()); }

 private:
  Matrix m_;
};

/// Frobenius inner product tr(a^T b).
inline double frobenius_inner(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

struct ProcrustesFit {
  PreShape fitted;  ///< S_X = X R_X
  Matrix rotation;  ///< R_X in SO(m)
  double distance;  ///< rho(reference, S_X) in [0, pi/2]
  bool unique;      ///< false near the cut locus or for singular shapes
};

struct GpaOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
  unsigned threads = 1;
};

struct GPAResult {
  PreShape mean;
  std::vector<ProcrustesFit> fits;
  int iterations = 0;
  double objective = 0.0;               ///< sum_i sin^2 rho(mean, S_i)
  std::vector<double> objective_trace;  ///< objective after every iteration
  std::size_t non_unique_fits = 0;
};

/// GPA ran out of iterations; carries the last iterate.
class GpaConvergenceError : public ConvergenceError {
 public:
  GpaConvergenceError(const std::string& what, GPAResult last)
      : ConvergenceError(what), last_(std::move(last)) {}
  const GPAResult& last_iterate() const noexcept { return last_; }

 private:
  GPAResult last_;
};

/// (k-1) x k Helmert submatrix: orthonormal rows orthogonal to the ones vector.
Matrix helmert_submatrix(Eigen::Index k);

PreShape to_preshape(const Configuration& c);

/// Centered k x m configuration of unit size with the given pre-shape.
Configuration from_preshape(const PreShape& x);

ProcrustesFit opa_fit(const PreShape& x, const PreShape& reference);

GPAResult gpa(const std::vector<Configuration>& configs, const GpaOptions& options = {});
GPAResult gpa(const std::vector<PreShape>& preshapes, const GpaOptions& options = {});

/// T = S - <mean, S> mean for a Procrustes fit S to mean.
Matrix tangent_project(const PreShape& fit, const PreShape& mean);

double riemannian_shape_distance(const Configuration& a, const Configuration& b);

/// Normalized X0 E_{j1 j2} for 1 <= j1 < j2 <= m, spanning the vertical space at X0.
std::vector<PreShape> vertical_basis(const PreShape& x0);

/// Dimension m(k-1) - m(m-1)/2 - 1 of shape space for k landmarks in R^m.
inline Eigen::Index shape_space_dimension(Eigen::Index k, Eigen::Index m) {
  return m * (k - 1) - m * (m - 1) / 2 - 1;
}

}  // namespace pnss
