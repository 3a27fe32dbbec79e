#include "pnss/pns.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pnss/parallel.hpp"

namespace pnss {

namespace {

/// Distances from the pole of points already rotated so the axis is the pole.
Vector pole_distances(const Matrix& rotated) {
  const Eigen::Index last = rotated.rows() - 1;
  Vector rho(rotated.cols());
  for (Eigen::Index j = 0; j < rotated.cols(); ++j)
    rho[j] = std::atan2(rotated.col(j).head(last).norm(), rotated(last, j));
  return rho;
}

double centered_sum_squares(const Vector& rho) {
  return (rho.array() - rho.mean()).square().sum();
}

struct LmOutcome {
  Vector axis;
  double objective;
  int iterations;
  bool converged;
};

// Relative objective decrease below which an accepted step counts as converged.
constexpr double kFlatObjective = 1e-12;

LmOutcome levenberg_marquardt(const Matrix& points, Vector axis, const SubsphereFitOptions& opt) {
  const Eigen::Index dim = points.rows() - 1;  // tangent dimension
  const Eigen::Index n = points.cols();
  axis.normalize();
  double damping = opt.initial_damping;
  double f = subsphere_objective(points, axis);

  for (int it = 0; it < opt.max_iterations; ++it) {
    const Matrix rot = rotate_axis_to_pole(SpherePoint::normalized(axis));
    const Matrix y = rot * points;
    const Vector rho = pole_distances(y);
    const Vector resid = rho.array() - rho.mean();

    // d rho_j / d delta = -y_tan / |y_tan|; the radius is eliminated, so the
    // Jacobian of the centered residual is the centered gradient.
    Matrix jac(n, dim);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double s = y.col(j).head(dim).norm();
      if (s > 1e-15)
        jac.row(j) = -y.col(j).head(dim).transpose() / s;
      else
        jac.row(j).setZero();
    }
    jac.rowwise() -= jac.colwise().mean();
    const Matrix jtj = jac.transpose() * jac;
    const Vector grad = jac.transpose() * resid;

    bool accepted = false;
    bool flat = false;
    double step_norm = 0.0;
    while (damping < 1e12) {
      Matrix lhs = jtj;
      lhs.diagonal().array() += damping;
      Vector delta = -lhs.ldlt().solve(grad);
      step_norm = delta.norm();
      if (step_norm > kPi / 2) {
        delta *= (kPi / 2) / step_norm;
        step_norm = kPi / 2;
      }
      Vector local(dim + 1);
      if (step_norm > 0) {
        local.head(dim) = (std::sin(step_norm) / step_norm) * delta;
      } else {
        local.head(dim).setZero();
      }
      local[dim] = std::cos(step_norm);
      Vector candidate = rot.transpose() * local;
      candidate.normalize();
      const double fc = subsphere_objective(points, candidate);
      if (fc < f) {
        axis = candidate;
        flat = f - fc <= kFlatObjective * f;
        f = fc;
        damping = std::max(damping / 10.0, 1e-15);
        accepted = true;
        break;
      }
      if (step_norm < opt.step_tolerance) break;
      damping *= 10.0;
    }
    if (!accepted || step_norm < opt.step_tolerance || flat) return {axis, f, it + 1, true};
  }
  return {axis, f, opt.max_iterations, false};
}

Vector random_axis(std::mt19937_64& rng, Eigen::Index size) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = normal(rng);
  return v.normalized();
}

}  // namespace

double subsphere_objective(const Matrix& points, const Vector& axis) {
  Vector rho(points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) rho[j] = spherical_distance(points.col(j), axis);
  return centered_sum_squares(rho);
}

SubsphereFit fit_subsphere(const std::vector<SpherePoint>& points, const SubsphereFitOptions& options) {
  if (points.empty()) throw UnderdeterminedError("subsphere fit needs points");
  Matrix m(points.front().ambient(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (points[j].ambient() != m.rows()) throw DimensionError("subsphere fit: mixed dimensions");
    m.col(static_cast<Eigen::Index>(j)) = points[j].coords();
  }
  return fit_subsphere(m, options);
}

SubsphereFit fit_subsphere(const Matrix& points, const SubsphereFitOptions& options) {
  const Eigen::Index sphere = points.rows() - 1;
  const Eigen::Index n = points.cols();
  if (sphere < 1) throw DimensionError("subsphere fit needs points on S^i with i >= 1");
  if (n < sphere + 2)
    throw UnderdeterminedError("subsphere fit on S^" + std::to_string(sphere) + " needs at least " +
                               std::to_string(sphere + 2) + " points, got " + std::to_string(n));

  std::vector<Vector> starts;
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(points * points.transpose());
    starts.push_back(eig.eigenvectors().col(0));
    const Vector mean = points.rowwise().mean();
    if (mean.norm() > 1e-12) starts.push_back(mean.normalized());
  }

  auto run = [&](const std::vector<Vector>& inits, LmOutcome& best, bool& have, bool& any_converged) {
    for (const auto& v0 : inits) {
      LmOutcome out = levenberg_marquardt(points, v0, options);
      any_converged = any_converged || out.converged;
      if (!have || out.objective < best.objective) {
        best = out;
        have = true;
      }
    }
  };

  LmOutcome best{Vector(), 0.0, 0, false};
  bool have = false;
  bool converged = false;
  run(starts, best, have, converged);
  if (!converged) {
    std::mt19937_64 rng(options.seed);
    std::vector<Vector> extra;
    for (int r = 0; r < options.restarts; ++r) extra.push_back(random_axis(rng, points.rows()));
    run(extra, best, have, converged);
  }
  if (!converged) throw ConvergenceError("subsphere fit did not converge after restarts");

  Vector axis = best.axis.normalized();
  Vector rho(n);
  for (Eigen::Index j = 0; j < n; ++j) rho[j] = spherical_distance(points.col(j), axis);
  double radius = rho.mean();
  if (radius > kPi / 2) {
    // The antipodal axis describes the same subsphere with radius pi - r.
    axis = -axis;
    rho = kPi - rho.array();
    radius = kPi - radius;
  }
  radius = std::clamp(radius, 1e-12, kPi / 2);

  SubsphereFit fit{Subsphere(SpherePoint::normalized(axis), radius), {}, 0.0, best.iterations};
  fit.residuals.resize(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const double e = rho[j] - radius;
    fit.residuals[static_cast<std::size_t>(j)] = e;
    fit.objective += e * e;
  }
  return fit;
}

PNSModel pns_decompose(const Matrix& points, const PnsOptions& options) {
  const Eigen::Index d = points.rows() - 1;
  const Eigen::Index n = points.cols();
  if (d < 1) throw DimensionError("PNS needs points on S^d with d >= 1");
  if (n < 4) throw UnderdeterminedError("PNS needs at least 4 points");
  for (Eigen::Index j = 0; j < n; ++j)
    if (std::abs(points.col(j).norm() - 1.0) > 1e-10)
      throw DomainError("PNS input column " + std::to_string(j) + " is not a unit vector");

  PNSModel model;
  model.coordinates = Matrix::Zero(d, n);
  Matrix current = points;
  double scale = 1.0;

  for (Eigen::Index sphere = d; sphere >= 2; --sphere) {
    const SubsphereFit fit = fit_subsphere(current, options.subsphere);
    const Matrix rot = rotate_axis_to_pole(fit.subsphere.axis);
    const Eigen::Index row = sphere - 1;

    PNSLevel level{fit.subsphere.axis, fit.subsphere.radius, rot, scale, {}};
    level.residuals.resize(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      level.residuals[static_cast<std::size_t>(j)] = scale * fit.residuals[static_cast<std::size_t>(j)];
      model.coordinates(row, j) = level.residuals[static_cast<std::size_t>(j)];
    }

    // Projecting along the geodesic from the axis keeps the tangent direction,
    // so the rescaled projection is the normalized tangent part after rotation.
    Matrix next(sphere, n);
    parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t jj) {
      const auto j = static_cast<Eigen::Index>(jj);
      const Vector y = rot * current.col(j);
      const double s = y.head(sphere).norm();
      if (s < 1e-14)
        throw ProjectionUndefined("point " + std::to_string(j) + " lies on a fitted subsphere axis");
      next.col(j) = y.head(sphere) / s;
    });
    current = std::move(next);
    scale *= std::sin(fit.subsphere.radius);
    model.levels.push_back(std::move(level));
  }

  std::vector<double> angles(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) angles[static_cast<std::size_t>(j)] = std::atan2(current(1, j), current(0, j));
  const CircularMean circ = frechet_mean_circle(angles);
  model.final_mean_angle = circ.mean;
  model.final_scale = scale;
  for (Eigen::Index j = 0; j < n; ++j)
    model.coordinates(0, j) = scale * circ.deviations[static_cast<std::size_t>(j)];
  return model;
}

std::vector<double> variance_by_component(const PNSModel& model) {
  const double total = model.coordinates.squaredNorm();
  if (!(total > 0.0)) throw DegenerateVarianceError("PNS coordinates carry no variance");
  std::vector<double> out(static_cast<std::size_t>(model.coordinates.rows()));
  for (Eigen::Index r = 0; r < model.coordinates.rows(); ++r)
    out[static_cast<std::size_t>(r)] = 100.0 * model.coordinates.row(r).squaredNorm() / total;
  return out;
}

Vector pns_project(const PNSModel& model, const Vector& x) {
  const Eigen::Index d = model.sphere_dim();
  if (x.size() != d + 1)
    throw DimensionError("pns_project: point has " + std::to_string(x.size()) +
                         " coordinates, model expects " + std::to_string(d + 1));
  Vector coords(d);
  Vector cur = x.normalized();
  for (std::size_t l = 0; l < model.levels.size(); ++l) {
    const PNSLevel& level = model.levels[l];
    const Eigen::Index sphere = cur.size() - 1;
    const Vector y = level.rotation_to_pole * cur;
    const double s = y.head(sphere).norm();
    if (s < 1e-14) throw ProjectionUndefined("point lies on a fitted subsphere axis");
    coords[sphere - 1] = level.scale_in * (std::atan2(s, y[sphere]) - level.radius);
    cur = y.head(sphere) / s;
  }
  coords[0] = model.final_scale * wrap_angle(std::atan2(cur[1], cur[0]) - model.final_mean_angle);
  return coords;
}

SpherePoint pns_reconstruct(const PNSModel& model, const Vector& coords) {
  const Eigen::Index d = model.sphere_dim();
  if (coords.size() != d)
    throw DimensionError("pns_reconstruct: expected " + std::to_string(d) + " coordinates, got " +
                         std::to_string(coords.size()));
  if (!coords.allFinite()) throw RangeError("pns_reconstruct: non-finite coordinate");

  const double theta = model.final_mean_angle + coords[0] / model.final_scale;
  Vector cur(2);
  cur << std::cos(theta), std::sin(theta);
  for (auto it = model.levels.rbegin(); it != model.levels.rend(); ++it) {
    const Eigen::Index sphere = cur.size();  // lifting S^{sphere-1} onto S^sphere
    const double angle = it->radius + coords[sphere - 1] / it->scale_in;
    if (angle < -1e-12 || angle > kPi + 1e-12)
      throw RangeError("pns_reconstruct: coordinate " + std::to_string(sphere) +
                       " places the point beyond the subsphere axis");
    Vector z(sphere + 1);
    z.head(sphere) = std::sin(angle) * cur;
    z[sphere] = std::cos(angle);
    cur = it->rotation_to_pole.transpose() * z;
  }
  return SpherePoint::normalized(cur);
}

}  // namespace pnss
