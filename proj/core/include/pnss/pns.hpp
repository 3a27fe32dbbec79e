#pragma once

#include <cstdint>
#include <vector>

#include "pnss/sphere.hpp"

namespace pnss {

/// Optimizer settings for the subsphere fit (Levenberg-Marquardt on the axis).
struct SubsphereFitOptions {
  double initial_damping = 1e-3;
  double step_tolerance = 1e-10;
  int max_iterations = 500;
  int restarts = 3;
  std::uint64_t seed = 0x5eed;
};

struct SubsphereFit {
  Subsphere subsphere;
  std::vector<double> residuals;  ///< rho(x_i, axis) - radius
  double objective;               ///< sum of squared residuals
  int iterations;
};

/// Points on S^i as the columns of an (i+1) x n matrix.
SubsphereFit fit_subsphere(const Matrix& points, const SubsphereFitOptions& options = {});
SubsphereFit fit_subsphere(const std::vector<SpherePoint>& points,
                           const SubsphereFitOptions& options = {});

/// Sum of squared signed residuals for a given axis, radius chosen optimally
/// (mean distance). Exposed for oracles and diagnostics.
double subsphere_objective(const Matrix& points, const Vector& axis);

/// One backward step of the nested-sphere decomposition.
struct PNSLevel {
  SpherePoint axis;              ///< on the current sphere S^i
  double radius;                 ///< (0, pi/2]
  Matrix rotation_to_pole;       ///< (i+1) x (i+1)
  double scale_in;               ///< product of sin(radius) of earlier levels
  std::vector<double> residuals; ///< scale_in * (rho(p_j, axis) - radius)
};

struct PNSModel {
  std::vector<PNSLevel> levels;  ///< S^d first, S^2 last
  double final_mean_angle = 0.0;
  double final_scale = 1.0;
  Matrix coordinates;            ///< d x n, row 0 = E(0), row j = E(j)

  Eigen::Index sphere_dim() const noexcept { return coordinates.rows(); }
  double cut_point() const noexcept { return kPi * final_scale; }
};

struct PnsOptions {
  SubsphereFitOptions subsphere;
  unsigned threads = 1;
};

/// Backward decomposition of points on S^d (columns of a (d+1) x n matrix).
PNSModel pns_decompose(const Matrix& points, const PnsOptions& options = {});

/// Percent of the total sum of squares carried by each coordinate row.
std::vector<double> variance_by_component(const PNSModel& model);

/// PNS coordinates of a new point under a fitted model.
Vector pns_project(const PNSModel& model, const Vector& x);

/// Inverse of the decomposition. E(0) is circular and wrapped into range.
SpherePoint pns_reconstruct(const PNSModel& model, const Vector& coords);

}  // namespace pnss
