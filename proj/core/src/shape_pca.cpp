#include "pnss/shape_pca.hpp"

#include <cmath>
#include <numeric>

namespace pnss {

namespace {

constexpr double kRankThreshold = 1e-12;

void fix_sign(Vector& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v[idx] < 0) v = -v;
}

}  // namespace

ShapePCAModel fit_shape_pca(const GPAResult& gpa) {
  const auto n = static_cast<Eigen::Index>(gpa.fits.size());
  if (n < 2) throw DomainError("shape PCA needs at least two observations");
  const Eigen::Index rows = gpa.mean.rows();
  const Eigen::Index cols = gpa.mean.cols();
  const Eigen::Index dim = rows * cols;

  Matrix tangents(n, dim);  // row i = vec(T_i)
  std::vector<double> norms(static_cast<std::size_t>(n)), dists(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& fit = gpa.fits[static_cast<std::size_t>(i)];
    Matrix t = tangent_project(fit.fitted, gpa.mean);
    tangents.row(i) = Eigen::Map<const Vector>(t.data(), dim).transpose();
    norms[static_cast<std::size_t>(i)] = t.norm();
    dists[static_cast<std::size_t>(i)] = fit.distance;
  }
  const Vector tbar = tangents.colwise().mean().transpose();
  Matrix centered = tangents.rowwise() - tbar.transpose();
  const double nn = static_cast<double>(n);
  const double total = centered.squaredNorm() / nn;
  if (!(total > 1e-30)) throw DegenerateVarianceError("all tangent coordinates are identical");

  Vector values;
  Matrix vectors;  // dim x r, columns in descending eigenvalue order
  if (dim <= n) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig((centered.transpose() * centered) / nn);
    values = eig.eigenvalues().reverse();
    vectors = eig.eigenvectors().rowwise().reverse();
  } else {
    // Gram route: cov v = lambda v  <=>  (Y Y^T / n) u = lambda u, v = Y^T u / sqrt(n lambda).
    Eigen::SelfAdjointEigenSolver<Matrix> eig((centered * centered.transpose()) / nn);
    values = eig.eigenvalues().reverse();
    const Matrix u = eig.eigenvectors().rowwise().reverse();
    vectors = centered.transpose() * u;
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
      const double len = vectors.col(j).norm();
      if (len > 0) vectors.col(j) /= len;
    }
  }

  const double top = values[0];
  Eigen::Index q = 0;
  while (q < values.size() && values[q] > kRankThreshold * top) ++q;

  ShapePCAModel model{gpa.mean, {}, {}, Matrix(n, q), Matrix(n, q),
                      Eigen::Map<const Matrix>(tbar.data(), rows, cols),
                      std::move(norms), std::move(dists), total};
  model.eigenvectors.reserve(static_cast<std::size_t>(q));
  for (Eigen::Index j = 0; j < q; ++j) {
    Vector v = vectors.col(j);
    fix_sign(v);
    model.scores.col(j) = tangents * v;
    model.centered_scores.col(j) = centered * v;
    model.eigenvectors.emplace_back(Eigen::Map<const Matrix>(v.data(), rows, cols));
    model.eigenvalues.push_back(std::max(0.0, values[j]));
  }
  return model;
}

std::vector<double> explained_variance(std::span<const double> eigenvalues) {
  const double sum = std::accumulate(eigenvalues.begin(), eigenvalues.end(), 0.0);
  std::vector<double> out;
  out.reserve(eigenvalues.size());
  for (double v : eigenvalues) out.push_back(sum > 0 ? 100.0 * v / sum : 0.0);
  return out;
}

std::vector<double> explained_variance(const ShapePCAModel& model) {
  return explained_variance(model.eigenvalues);
}

std::vector<double> cumulative_variance(std::span<const double> eigenvalues) {
  auto out = explained_variance(eigenvalues);
  std::partial_sum(out.begin(), out.end(), out.begin());
  return out;
}

std::vector<double> cumulative_variance(const ShapePCAModel& model) {
  return cumulative_variance(model.eigenvalues);
}

}  // namespace pnss
