#include "pnss/procrustes.hpp"

#include <cmath>
#include <string>

#include "pnss/parallel.hpp"

namespace pnss {

namespace {

constexpr double kPreShapeTolerance = 1e-10;
constexpr double kSymmetryTolerance = 1e-8;

void require_same_shape(const PreShape& a, const PreShape& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(what) + ": pre-shapes differ in size (" +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
}

double sum_sin_squared(const std::vector<ProcrustesFit>& fits) {
  double f = 0.0;
  for (const auto& fit : fits) {
    const double s = std::sin(fit.distance);
    f += s * s;
  }
  return f;
}

/// Unit vector maximizing sum_i <mu, S_i>^2, signed towards the fits' sum.
Vector dominant_direction(const std::vector<ProcrustesFit>& fits) {
  const auto n = static_cast<Eigen::Index>(fits.size());
  const Eigen::Index dim = fits.front().fitted.matrix().size();
  Matrix stacked(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) stacked.col(i) = fits[static_cast<std::size_t>(i)].fitted.vec();

  Vector mu;
  if (dim <= n) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(stacked * stacked.transpose());
    mu = eig.eigenvectors().col(dim - 1);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(stacked.transpose() * stacked);
    mu = stacked * eig.eigenvectors().col(n - 1);
  }
  mu.normalize();
  if (mu.dot(stacked.rowwise().sum()) < 0) mu = -mu;
  return mu;
}

PreShape unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  return PreShape(Eigen::Map<const Matrix>(v.data(), rows, cols));
}

}  // namespace

Configuration::Configuration(Matrix points) : points_(std::move(points)) {
  const auto k = points_.rows();
  const auto m = points_.cols();
  if (m < 2 || k <= m)
    throw DimensionError("configuration needs k > m >= 2 (got k=" + std::to_string(k) +
                         ", m=" + std::to_string(m) + ")");
  if (!points_.allFinite()) throw DomainError("configuration has non-finite coordinates");
}

PreShape::PreShape(Matrix m) : m_(std::move(m)) {
  const double n = m_.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > kPreShapeTolerance)
    throw DomainError("pre-shape is not unit norm (norm " + std::to_string(n) + ")");
  m_ /= n;
}

Matrix helmert_submatrix(Eigen::Index k) {
  Matrix h = Matrix::Zero(k - 1, k);
  for (Eigen::Index j = 1; j < k; ++j) {
    const double jj = static_cast<double>(j);
    const double denom = std::sqrt(jj * (jj + 1.0));
    h.row(j - 1).head(j).setConstant(-1.0 / denom);
    h(j - 1, j) = jj / denom;
  }
  return h;
}

PreShape to_preshape(const Configuration& c) {
  Matrix z = helmert_submatrix(c.landmarks()) * c.points();
  const double size = z.norm();
  if (size < 1e-12) throw DegenerateConfigError("configuration has zero centered size");
  z /= size;
  return PreShape(std::move(z));
}

Configuration from_preshape(const PreShape& x) {
  return Configuration(helmert_submatrix(x.rows() + 1).transpose() * x.matrix());
}

ProcrustesFit opa_fit(const PreShape& x, const PreShape& reference) {
  require_same_shape(x, reference, "opa_fit");
  const Eigen::Index m = x.cols();
  const Matrix a = x.matrix().transpose() * reference.matrix();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();

  Vector signs = Vector::Ones(m);
  if ((u * v.transpose()).determinant() < 0) signs[m - 1] = -1.0;
  Matrix rotation = u * signs.asDiagonal() * v.transpose();

  const Vector sv = svd.singularValues();
  const Vector lambda = sv.cwiseProduct(signs);

  Eigen::JacobiSVD<Matrix> xsvd(x.matrix());
  const Vector xs = xsvd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < xs.size(); ++i)
    if (xs[i] > 1e-12 * std::max(1.0, xs[0])) ++rank;

  Matrix fitted = x.matrix() * rotation;
  fitted /= fitted.norm();
  PreShape s(std::move(fitted));
  const double dist = std::min(kPi / 2, spherical_distance(s.vec(), reference.vec()));
  const bool unique = !(lambda[m - 2] + lambda[m - 1] < 1e-9 || rank < m - 1);
  return ProcrustesFit{std::move(s), std::move(rotation), dist, unique};
}

GPAResult gpa(const std::vector<Configuration>& configs, const GpaOptions& options) {
  std::vector<PreShape> pre;
  pre.reserve(configs.size());
  for (const auto& c : configs) pre.push_back(to_preshape(c));
  return gpa(pre, options);
}

GPAResult gpa(const std::vector<PreShape>& preshapes, const GpaOptions& options) {
  if (preshapes.size() < 2) throw DomainError("gpa needs at least two configurations");
  for (const auto& p : preshapes) require_same_shape(p, preshapes.front(), "gpa");
  const Eigen::Index rows = preshapes.front().rows();
  const Eigen::Index cols = preshapes.front().cols();

  auto fit_all = [&](const PreShape& mean) {
    std::vector<ProcrustesFit> fits(preshapes.size(),
                                    ProcrustesFit{mean, Matrix(), 0.0, true});
    parallel_for(preshapes.size(), options.threads,
                 [&](std::size_t i) { fits[i] = opa_fit(preshapes[i], mean); });
    return fits;
  };

  GPAResult result{preshapes.front(), fit_all(preshapes.front()), 0, 0.0, {}, 0};
  result.objective = sum_sin_squared(result.fits);

  bool converged = result.objective == 0.0;
  while (!converged && result.iterations < options.max_iterations) {
    PreShape next = unvec(dominant_direction(result.fits), rows, cols);
    const double moved = spherical_distance(next.vec(), result.mean.vec());
    auto fits = fit_all(next);
    const double obj = sum_sin_squared(fits);
    const double prev = result.objective;

    result.mean = std::move(next);
    result.fits = std::move(fits);
    result.objective = obj;
    result.objective_trace.push_back(obj);
    ++result.iterations;

    const double rel = std::abs(prev - obj) / std::max(prev, 1e-300);
    converged = rel < options.relative_tolerance || obj == 0.0 || moved < 1e-14;
  }
  for (const auto& f : result.fits)
    if (!f.unique) ++result.non_unique_fits;
  if (!converged)
    throw GpaConvergenceError("gpa did not converge in " + std::to_string(options.max_iterations) +
                                  " iterations",
                              std::move(result));
  return result;
}

Matrix tangent_project(const PreShape& fit, const PreShape& mean) {
  require_same_shape(fit, mean, "tangent_project");
  const Matrix cross = mean.matrix().transpose() * fit.matrix();
  if ((cross - cross.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance)
    throw NotProcrustesAlignedError("fit is not Procrustes-aligned to the mean");
  return fit.matrix() - frobenius_inner(mean.matrix(), fit.matrix()) * mean.matrix();
}

double riemannian_shape_distance(const Configuration& a, const Configuration& b) {
  return opa_fit(to_preshape(a), to_preshape(b)).distance;
}

std::vector<PreShape> vertical_basis(const PreShape& x0) {
  const Eigen::Index m = x0.cols();
  Eigen::JacobiSVD<Matrix> svd(x0.matrix());
  const Vector s = svd.singularValues();
  if (s[m - 1] <= 1e-12 * std::max(1.0, s[0]))
    throw RankError("vertical basis needs a pre-shape of full column rank");
  std::vector<PreShape> basis;
  basis.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Eigen::Index j1 = 0; j1 < m; ++j1) {
    for (Eigen::Index j2 = j1 + 1; j2 < m; ++j2) {
      Matrix e = Matrix::Zero(m, m);
      e(j1, j2) = 1.0;
      e(j2, j1) = -1.0;
      Matrix b = x0.matrix() * e;
      b /= b.norm();
      basis.emplace_back(std::move(b));
    }
  }
  return basis;
}

}  // namespace pnss
