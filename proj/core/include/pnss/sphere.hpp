#pragma once

#include <Eigen/Dense>
#include <numbers>
#include <vector>

#include "pnss/error.hpp"

namespace pnss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

/// Distance from pi below which a pair counts as antipodal.
inline constexpr double kAntipodalTolerance = 1e-9;

/// Unit vector in R^{d+1}, i.e. a point of S^d with d >= 1.
class SpherePoint {
 public:
  /// Wraps coordinates that are already unit norm (checked to 1e-10).
  explicit SpherePoint(Vector coords);

  /// Scales an arbitrary nonzero vector onto the sphere.
  static SpherePoint normalized(const Vector& v);

  /// The pole (0, ..., 0, 1) of S^d.
  static SpherePoint pole(Eigen::Index d);

  const Vector& coords() const noexcept { return coords_; }
  Eigen::Index dim() const noexcept { return coords_.size() - 1; }
  Eigen::Index ambient() const noexcept { return coords_.size(); }
  double operator[](Eigen::Index i) const { return coords_[i]; }

  SpherePoint antipode() const { return SpherePoint(-coords_, Unchecked{}); }

 private:
  struct Unchecked {};
  SpherePoint(Vector coords, Unchecked) : coords_(std::move(coords)) {}
  Vector coords_;
};

/// Tangent vector at `base`; vec is orthogonal to base.
struct TangentVector {
  TangentVector(SpherePoint base, Vector vec);

  /// Projects an arbitrary ambient vector onto the tangent space at base.
  static TangentVector project(const SpherePoint& base, const Vector& v);

  SpherePoint base;
  Vector vec;
};

/// A(v, r) = { x : rho(v, x) = r } with 0 < r <= pi/2.
struct Subsphere {
  Subsphere(SpherePoint axis, double radius);

  SpherePoint axis;
  double radius;
};

double spherical_distance(const SpherePoint& x, const SpherePoint& y);

/// Same as spherical_distance on raw unit vectors, no dimension checks.
double spherical_distance(const Vector& x, const Vector& y);

SpherePoint exp_map(const TangentVector& t);
TangentVector log_map(const SpherePoint& base, const SpherePoint& x);

/// Closest point of the subsphere to x, along the geodesic through the axis.
SpherePoint project_to_subsphere(const SpherePoint& x, const Subsphere& s);

/// Rotation R with R * v = (0, ..., 0, 1) and det R = +1.
Matrix rotate_axis_to_pole(const SpherePoint& v);

struct CircularMean {
  double mean;                     ///< in (-pi, pi]
  std::vector<double> deviations;  ///< signed, in (-pi, pi]
  double objective;                ///< sum of squared deviations
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Exact minimizer of sum_i d(theta_i, mu)^2 on the circle.
CircularMean frechet_mean_circle(const std::vector<double>& angles);

}  // namespace pnss
