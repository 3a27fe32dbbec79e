#pragma once

#include <optional>
#include <vector>

#include "pnss/pns.hpp"
#include "pnss/procrustes.hpp"
#include "pnss/shape_pca.hpp"

namespace pnss {

/// Nested-sphere analysis of Procrustes fits, carried out on the sphere
/// spanned by the mean and the first p principal directions.
struct PNSSModel {
  GPAResult gpa;
  ShapePCAModel pca;
  Eigen::Index p = 0;
  Matrix embedded;  ///< (p+1) x n, basis (mean, V_1, ..., V_p)
  PNSModel pns;

  double cut_point() const noexcept { return pns.cut_point(); }
  const Matrix& scores() const noexcept { return pns.coordinates; }
};

struct PnssOptions {
  /// Retained components; empty selects the smallest p reaching
  /// `variance_threshold` of the PCA variance (at least 2).
  std::optional<Eigen::Index> p;
  double variance_threshold = 0.90;
  GpaOptions gpa;
  PnsOptions pns;
};

/// Largest admissible p for k landmarks in R^m (exclusive bound minus one).
Eigen::Index max_pnss_components(Eigen::Index k, Eigen::Index m);

/// Throws RangeError unless 2 <= p < m(k-1) - m(m-1)/2 - 1.
void check_pnss_components(Eigen::Index p, Eigen::Index k, Eigen::Index m);

/// Smallest p with cumulative variance >= threshold, clamped to [2, bound].
Eigen::Index choose_components(const ShapePCAModel& pca, double threshold);

/// lambda_ij = rho(mean, S_i) / ||T_i|| * <T_i, V_j>, j = 1..p.
Matrix rescaled_scores(const ShapePCAModel& pca, Eigen::Index p);

/// Points on S^p: (cos|U_i|, sin|U_i|/|U_i| * lambda_i).
Matrix embed_on_sphere(const GPAResult& fits, const ShapePCAModel& pca, Eigen::Index p);

/// Single observation form of the embedding.
Vector embed_scores(const Vector& lambda);

/// Inverse of the embedding: (s / sin s) (G_2, ..., G_{p+1}), s = acos G_1.
Vector sphere_to_pc_scores(const Vector& g);

/// Pre-shape exp_mean(sum_j lambda_j V_j).
PreShape preshape_from_pc_scores(const ShapePCAModel& pca, const Vector& lambda);

PNSSModel fit_pnss(const std::vector<Configuration>& configs, const PnssOptions& options = {});

/// PNSS coordinates of a configuration under a fitted model.
Vector pnss_project(const PNSSModel& model, const Configuration& config);

/// Landmark configuration for a point given in PNSS coordinates.
Configuration pnss_configuration(const PNSSModel& model, const Vector& coords);

Configuration pnss_mean_shape(const PNSSModel& model);

struct PrincipalArc {
  Eigen::Index component = 0;  ///< 1-based
  double c = 1.0;
  double s = 0.0;              ///< standard deviation of the component scores
  std::vector<double> offsets;
  std::vector<Configuration> configurations;
};

/// Sample standard deviation (divisor n - 1) of PNSS component j (1-based).
double component_sd(const PNSSModel& model, Eigen::Index j);

PrincipalArc principal_arc(const PNSSModel& model, Eigen::Index j, double c, int samples);

}  // namespace pnss
