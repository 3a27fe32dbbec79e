#include "pnss/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace pnss {

namespace {

constexpr double kUnitTolerance = 1e-10;

void require_same_dim(const Vector& x, const Vector& y, const char* what) {
  if (x.size() != y.size())
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
}

}  // namespace

SpherePoint::SpherePoint(Vector coords) : coords_(std::move(coords)) {
  if (coords_.size() < 2) throw DimensionError("sphere point needs at least 2 coordinates");
  const double n = coords_.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kUnitTolerance)
    throw DomainError("sphere point is not unit norm (norm " + std::to_string(n) + ")");
}

SpherePoint SpherePoint::normalized(const Vector& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero vector");
  return SpherePoint(v / n);
}

SpherePoint SpherePoint::pole(Eigen::Index d) {
  Vector e = Vector::Zero(d + 1);
  e[d] = 1.0;
  return SpherePoint(std::move(e));
}

TangentVector::TangentVector(SpherePoint b, Vector v) : base(std::move(b)), vec(std::move(v)) {
  require_same_dim(base.coords(), vec, "tangent vector");
  const double tol = 1e-10 * std::max(1.0, vec.norm());
  if (std::abs(base.coords().dot(vec)) > tol)
    throw DomainError("tangent vector is not orthogonal to its base point");
}

TangentVector TangentVector::project(const SpherePoint& base, const Vector& v) {
  require_same_dim(base.coords(), v, "tangent projection");
  Vector t = v - base.coords().dot(v) * base.coords();
  return TangentVector(base, std::move(t));
}

Subsphere::Subsphere(SpherePoint a, double r) : axis(std::move(a)), radius(r) {
  if (!(r > 0.0) || r > kPi / 2)
    throw RangeError("subsphere radius must lie in (0, pi/2], got " + std::to_string(r));
}

double spherical_distance(const Vector& x, const Vector& y) {
  // 2 atan2(|x - y|, |x + y|) equals arccos<x, y> for unit vectors and keeps
  // full precision near 0 and pi.
  return 2.0 * std::atan2((x - y).norm(), (x + y).norm());
}

double spherical_distance(const SpherePoint& x, const SpherePoint& y) {
  require_same_dim(x.coords(), y.coords(), "spherical_distance");
  return spherical_distance(x.coords(), y.coords());
}

SpherePoint exp_map(const TangentVector& t) {
  const double len = t.vec.norm();
  if (len == 0.0) return t.base;
  Vector out = std::cos(len) * t.base.coords() + (std::sin(len) / len) * t.vec;
  return SpherePoint::normalized(out);
}

TangentVector log_map(const SpherePoint& base, const SpherePoint& x) {
  const double dist = spherical_distance(base, x);
  if (dist >= kPi - kAntipodalTolerance)
    throw AntipodalError("log map undefined at the antipode of the base point");
  Vector u = x.coords() - base.coords().dot(x.coords()) * base.coords();
  const double un = u.norm();
  if (un == 0.0 || dist == 0.0) return TangentVector(base, Vector::Zero(base.ambient()));
  return TangentVector(base, (dist / un) * u);
}

SpherePoint project_to_subsphere(const SpherePoint& x, const Subsphere& s) {
  require_same_dim(x.coords(), s.axis.coords(), "project_to_subsphere");
  const Vector& v = s.axis.coords();
  Vector u = x.coords() - v.dot(x.coords()) * v;
  const double un = u.norm();
  if (un < 1e-14)
    throw ProjectionUndefined("point coincides with the subsphere axis or its antipode");
  Vector p = std::cos(s.radius) * v + (std::sin(s.radius) / un) * u;
  return SpherePoint::normalized(p);
}

Matrix rotate_axis_to_pole(const SpherePoint& v) {
  const Eigen::Index n = v.ambient();
  const Eigen::Index last = n - 1;
  Matrix rot = Matrix::Identity(n, n);

  // v = cos(a) * pole + sin(a) * w with w orthogonal to the pole.
  Vector w = v.coords();
  const double c = w[last];
  w[last] = 0.0;
  const double s = w.norm();
  if (s == 0.0) {
    if (c > 0.0) return rot;
    // Antipodal axis: half turn in the plane of e_0 and the pole.
    rot(0, 0) = -1.0;
    rot(last, last) = -1.0;
    return rot;
  }
  w /= s;
  // Rotation by -a in span{w, pole}; the identity elsewhere.
  Vector e = Vector::Zero(n);
  e[last] = 1.0;
  rot += s * (e * w.transpose() - w * e.transpose()) +
         (c - 1.0) * (e * e.transpose() + w * w.transpose());
  return rot;
}

double wrap_angle(double a) {
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r < 0) r += 2.0 * kPi;
  r -= kPi;
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

namespace {

double circular_objective(const std::vector<double>& angles, double mu) {
  double f = 0.0;
  for (double t : angles) {
    const double d = wrap_angle(t - mu);
    f += d * d;
  }
  return f;
}

}  // namespace

CircularMean frechet_mean_circle(const std::vector<double>& angles) {
  if (angles.empty()) throw DomainError("circular mean of an empty sample");
  const std::size_t n = angles.size();
  const double two_pi = 2.0 * kPi;

  std::vector<double> theta(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = std::fmod(angles[i], two_pi);
    if (t < 0) t += two_pi;
    if (t >= two_pi) t -= two_pi;
    theta[i] = t;
  }
  std::sort(theta.begin(), theta.end());

  // Prefix sums allow each candidate to be scored in O(log n).
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + theta[i];
    s2[i + 1] = s2[i] + theta[i] * theta[i];
  }
  const double base = s1[n] / static_cast<double>(n);

  auto fast_objective = [&](double mu) {
    // Angles above mu + pi wrap down by 2 pi; angles at or below mu - pi wrap up.
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(theta.begin(), theta.end(), mu + kPi) - theta.begin());
    const auto lo = static_cast<std::size_t>(
        std::upper_bound(theta.begin(), theta.end(), mu - kPi) - theta.begin());
    const double nn = static_cast<double>(n);
    double f = s2[n] - 2.0 * mu * s1[n] + nn * mu * mu;
    const double n_hi = static_cast<double>(n - hi);
    const double sum_hi = s1[n] - s1[hi];
    f += -4.0 * kPi * (sum_hi - n_hi * mu) + 4.0 * kPi * kPi * n_hi;
    const double n_lo = static_cast<double>(lo);
    const double sum_lo = s1[lo];
    f += 4.0 * kPi * (sum_lo - n_lo * mu) + 4.0 * kPi * kPi * n_lo;
    return f;
  };

  std::vector<std::pair<double, double>> scored;  // (objective, candidate)
  scored.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    double mu = std::fmod(base + two_pi * static_cast<double>(k) / static_cast<double>(n), two_pi);
    if (mu < 0) mu += two_pi;
    scored.emplace_back(fast_objective(mu), mu);
  }
  // Rescore the leading candidates exactly; prefix sums lose a few digits.
  std::sort(scored.begin(), scored.end());
  const std::size_t keep = std::min<std::size_t>(n, 8);
  for (std::size_t i = 0; i < keep; ++i) scored[i].first = circular_objective(theta, scored[i].second);
  std::sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep));

  if (keep > 1 && scored[1].first - scored[0].first < 1e-9)
    throw NonUniqueMeanError(wrap_angle(scored[0].second), wrap_angle(scored[1].second));

  CircularMean out;
  out.mean = wrap_angle(scored[0].second);
  out.deviations.resize(n);
  out.objective = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.deviations[i] = wrap_angle(angles[i] - out.mean);
    out.objective += out.deviations[i] * out.deviations[i];
  }
  return out;
}

}  // namespace pnss
