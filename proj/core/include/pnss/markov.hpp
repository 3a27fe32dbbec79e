#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pnss/cluster.hpp"

namespace pnss {

/// Labels in 1..K for one run, in time order.
struct StateSequence {
  StateSequence(std::string run_id, std::vector<int> labels, int states);

  std::string run_id;
  std::vector<int> labels;
  int states;
};

using CountMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// Row-stochastic K x K matrix with the counts it came from. Rows never visited
/// are set to the unit self-transition and flagged unsupported.
struct TransitionMatrix {
  Matrix probs;
  CountMatrix counts;
  std::vector<bool> row_support;

  int states() const noexcept { return static_cast<int>(probs.rows()); }

  /// Builds probabilities from counts using the unvisited-row policy.
  static TransitionMatrix from_counts(CountMatrix counts);
  /// Wraps a given stochastic matrix (rows checked to sum to 1 within tol).
  static TransitionMatrix from_probabilities(Matrix probs, double tolerance = 1e-12);
};

struct EquilibriumDistribution {
  Vector probs;
  long iterations = 0;
};

TransitionMatrix estimate_transition_matrix(const StateSequence& seq);

enum class PoolingMode {
  Counts,   ///< sum counts across runs, then normalize
  Average,  ///< average the per-run probability matrices
};

TransitionMatrix pool_transition_matrix(const std::vector<StateSequence>& seqs,
                                        PoolingMode mode = PoolingMode::Counts);

/// (1/sqrt 2) * || sqrt(A) - sqrt(B) ||_F.
double hellinger_distance(const TransitionMatrix& a, const TransitionMatrix& b);
double hellinger_distance(const Matrix& a, const Matrix& b);

/// Number of closed communicating classes of the positive-entry graph.
int closed_class_count(const Matrix& probs);

/// Limit of the power iteration pi <- P^T pi from the uniform vector.
EquilibriumDistribution equilibrium(const TransitionMatrix& p);
EquilibriumDistribution equilibrium(const Matrix& probs);

struct TemporalClustering {
  std::vector<int> labels;  ///< one per matrix, 1..K_tc
  Dendrogram tree;
  std::vector<TransitionMatrix> pooled;                        ///< per temporal cluster
  std::vector<std::optional<EquilibriumDistribution>> equilibria;  ///< empty when not unique
};

/// Ward clustering of runs under the Hellinger metric plus per-group pooling.
TemporalClustering temporal_cluster(const std::vector<TransitionMatrix>& mats, std::size_t k_tc,
                                    WardVariant variant = WardVariant::WardD);

/// Row t: distribution of the last state over runs in temporal cluster t+1.
Matrix final_location_probabilities(const std::vector<StateSequence>& seqs,
                                    const std::vector<int>& tc_labels);

}  // namespace pnss
