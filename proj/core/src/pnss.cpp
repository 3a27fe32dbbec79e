#include "pnss/pnss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pnss {

Eigen::Index max_pnss_components(Eigen::Index k, Eigen::Index m) {
  return shape_space_dimension(k, m) - 1;
}

void check_pnss_components(Eigen::Index p, Eigen::Index k, Eigen::Index m) {
  const Eigen::Index bound = shape_space_dimension(k, m);
  if (p < 2 || p >= bound)
    throw RangeError("p = " + std::to_string(p) + " must satisfy 2 <= p < m(k-1) - m(m-1)/2 - 1 = " +
                     std::to_string(bound) + " (k=" + std::to_string(k) + ", m=" + std::to_string(m) + ")");
}

Eigen::Index choose_components(const ShapePCAModel& pca, double threshold) {
  const auto cum = cumulative_variance(pca);
  Eigen::Index p = static_cast<Eigen::Index>(cum.size());
  for (std::size_t j = 0; j < cum.size(); ++j) {
    if (cum[j] >= 100.0 * threshold - 1e-12) {
      p = static_cast<Eigen::Index>(j + 1);
      break;
    }
  }
  const Eigen::Index bound = max_pnss_components(pca.mean.rows() + 1, pca.mean.cols());
  return std::max<Eigen::Index>(2, std::min(p, bound));
}

Matrix rescaled_scores(const ShapePCAModel& pca, Eigen::Index p) {
  if (p < 1 || p > static_cast<Eigen::Index>(pca.components()))
    throw RankError("requested " + std::to_string(p) + " components but only " +
                    std::to_string(pca.components()) + " eigenvalues are strictly positive");
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(pca.eigenvalues[static_cast<std::size_t>(j)] > 0.0))
      throw RankError("eigenvalue " + std::to_string(j + 1) + " is not strictly positive");

  const auto n = static_cast<Eigen::Index>(pca.observations());
  Matrix lambda(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double tn = pca.tangent_norms[static_cast<std::size_t>(i)];
    if (tn == 0.0) {
      lambda.row(i).setZero();
    } else {
      lambda.row(i) = (pca.fit_distances[static_cast<std::size_t>(i)] / tn) * pca.scores.row(i).head(p);
    }
  }
  return lambda;
}

Vector embed_scores(const Vector& lambda) {
  Vector g = Vector::Zero(lambda.size() + 1);
  const double u = lambda.norm();
  if (u == 0.0) {
    g[0] = 1.0;
    return g;
  }
  g[0] = std::cos(u);
  g.tail(lambda.size()) = (std::sin(u) / u) * lambda;
  return g;
}

Matrix embed_on_sphere(const GPAResult& fits, const ShapePCAModel& pca, Eigen::Index p) {
  check_pnss_components(p, fits.mean.rows() + 1, fits.mean.cols());
  if (fits.fits.size() != pca.observations())
    throw DimensionError("embed_on_sphere: GPA and PCA observation counts differ");
  const Matrix lambda = rescaled_scores(pca, p);
  Matrix out(p + 1, lambda.rows());
  for (Eigen::Index i = 0; i < lambda.rows(); ++i) out.col(i) = embed_scores(lambda.row(i).transpose());
  return out;
}

Vector sphere_to_pc_scores(const Vector& g) {
  if (g.size() < 2) throw DimensionError("sphere_to_pc_scores needs at least 2 coordinates");
  if (!(g[0] > -1.0 + 1e-9)) throw AntipodalError("sphere_to_pc_scores: point is antipodal to the mean");
  const Vector tail = g.tail(g.size() - 1);
  const double sin_s = tail.norm();
  // atan2 form of acos(G_1) keeps precision near the mean.
  const double s = std::atan2(sin_s, g[0]);
  if (sin_s == 0.0) return Vector::Zero(tail.size());
  return (s / sin_s) * tail;
}

PreShape preshape_from_pc_scores(const ShapePCAModel& pca, const Vector& lambda) {
  if (lambda.size() > static_cast<Eigen::Index>(pca.components()))
    throw DimensionError("more scores than principal components");
  Matrix u = Matrix::Zero(pca.mean.rows(), pca.mean.cols());
  for (Eigen::Index j = 0; j < lambda.size(); ++j) u += lambda[j] * pca.eigenvectors[static_cast<std::size_t>(j)];
  const double len = u.norm();
  if (len == 0.0) return pca.mean;
  Matrix x = std::cos(len) * pca.mean.matrix() + (std::sin(len) / len) * u;
  x /= x.norm();
  return PreShape(std::move(x));
}

PNSSModel fit_pnss(const std::vector<Configuration>& configs, const PnssOptions& options) {
  if (configs.empty()) throw DomainError("fit_pnss: no configurations");
  const Eigen::Index k = configs.front().landmarks();
  const Eigen::Index m = configs.front().dims();
  if (options.p) check_pnss_components(*options.p, k, m);

  GPAResult g = gpa(configs, options.gpa);
  ShapePCAModel pca = fit_shape_pca(g);
  const Eigen::Index p = options.p ? *options.p : choose_components(pca, options.variance_threshold);
  check_pnss_components(p, k, m);
  const auto n = static_cast<Eigen::Index>(configs.size());
  if (n < p + 2)
    throw UnderdeterminedError("fit_pnss needs at least p + 2 = " + std::to_string(p + 2) +
                               " configurations, got " + std::to_string(n));

  Matrix embedded = embed_on_sphere(g, pca, p);
  PNSModel pns = pns_decompose(embedded, options.pns);
  return PNSSModel{std::move(g), std::move(pca), p, std::move(embedded), std::move(pns)};
}

Vector pnss_project(const PNSSModel& model, const Configuration& config) {
  const PreShape x = to_preshape(config);
  const ProcrustesFit fit = opa_fit(x, model.pca.mean);
  const Matrix t = tangent_project(fit.fitted, model.pca.mean);
  const double tn = t.norm();
  Vector lambda = Vector::Zero(model.p);
  if (tn > 0.0) {
    for (Eigen::Index j = 0; j < model.p; ++j)
      lambda[j] = frobenius_inner(t, model.pca.eigenvectors[static_cast<std::size_t>(j)]);
    lambda *= fit.distance / tn;
  }
  return pns_project(model.pns, embed_scores(lambda));
}

Configuration pnss_configuration(const PNSSModel& model, const Vector& coords) {
  const SpherePoint g = pns_reconstruct(model.pns, coords);
  return from_preshape(preshape_from_pc_scores(model.pca, sphere_to_pc_scores(g.coords())));
}

Configuration pnss_mean_shape(const PNSSModel& model) {
  return pnss_configuration(model, Vector::Zero(model.pns.sphere_dim()));
}

double component_sd(const PNSSModel& model, Eigen::Index j) {
  const Matrix& sc = model.scores();
  if (j < 1 || j > sc.rows())
    throw RangeError("component " + std::to_string(j) + " outside 1.." + std::to_string(sc.rows()));
  const auto row = sc.row(j - 1);
  const double n = static_cast<double>(row.size());
  if (row.size() < 2) return 0.0;
  const double mean = row.mean();
  return std::sqrt((row.array() - mean).square().sum() / (n - 1.0));
}

PrincipalArc principal_arc(const PNSSModel& model, Eigen::Index j, double c, int samples) {
  if (j < 1 || j > model.p) throw RangeError("arc component must lie in 1..p");
  if (samples < 3 || samples % 2 == 0) throw RangeError("arc sample count must be odd and >= 3");
  PrincipalArc arc;
  arc.component = j;
  arc.c = c;
  arc.s = component_sd(model, j);
  const double half = c * arc.s;
  if (j == 1 && std::abs(half) >= model.cut_point())
    throw RangeError("arc half-width " + std::to_string(std::abs(half)) +
                     " reaches the circular cut point " + std::to_string(model.cut_point()));

  arc.offsets.resize(static_cast<std::size_t>(samples));
  const int mid = (samples - 1) / 2;
  for (int s = 0; s < samples; ++s)
    arc.offsets[static_cast<std::size_t>(s)] = half * static_cast<double>(s - mid) / static_cast<double>(mid);

  arc.configurations.reserve(arc.offsets.size());
  for (double offset : arc.offsets) {
    Vector coords = Vector::Zero(model.pns.sphere_dim());
    coords[j - 1] = offset;
    arc.configurations.push_back(pnss_configuration(model, coords));
  }
  return arc;
}

}  // namespace pnss
