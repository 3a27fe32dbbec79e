#pragma once

#include <span>
#include <vector>

#include "pnss/procrustes.hpp"

namespace pnss {

/// Tangent-space PCA at the Procrustes mean.
///
/// Eigenvectors are stored as (k-1) x m matrices V_j (column-stacking is the
/// vec convention). `scores` holds <T_i, V_j> for the uncentered tangent
/// coordinates T_i; `centered_scores` holds <T_i - mean(T), V_j>.
struct ShapePCAModel {
  PreShape mean;
  std::vector<Matrix> eigenvectors;
  std::vector<double> eigenvalues;  ///< retained, descending, > 0
  Matrix scores;                    ///< n x q
  Matrix centered_scores;           ///< n x q
  Matrix tangent_mean;              ///< mean(T_i), (k-1) x m
  std::vector<double> tangent_norms;
  std::vector<double> fit_distances;
  double total_variance = 0.0;      ///< (1/n) sum ||T_i - mean(T)||^2

  std::size_t components() const noexcept { return eigenvalues.size(); }
  std::size_t observations() const noexcept { return tangent_norms.size(); }
};

ShapePCAModel fit_shape_pca(const GPAResult& gpa);

/// Individual percentages 100 * lambda_j / sum(lambda).
std::vector<double> explained_variance(std::span<const double> eigenvalues);
std::vector<double> explained_variance(const ShapePCAModel& model);

/// Running sums of explained_variance; the last entry is 100.
std::vector<double> cumulative_variance(std::span<const double> eigenvalues);
std::vector<double> cumulative_variance(const ShapePCAModel& model);

}  // namespace pnss
