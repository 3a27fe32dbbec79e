#include "pnss/markov.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pnss {

StateSequence::StateSequence(std::string id, std::vector<int> l, int k)
    : run_id(std::move(id)), labels(std::move(l)), states(k) {
  if (states < 1) throw RangeError("state count must be positive");
  if (labels.size() < 2) throw DomainError("state sequence '" + run_id + "' needs at least 2 labels");
  for (int s : labels)
    if (s < 1 || s > states)
      throw RangeError("state label " + std::to_string(s) + " outside 1.." + std::to_string(states) +
                       " in run '" + run_id + "'");
}

TransitionMatrix TransitionMatrix::from_counts(CountMatrix counts) {
  const Eigen::Index k = counts.rows();
  if (counts.cols() != k) throw DimensionError("count matrix must be square");
  TransitionMatrix t{Matrix::Zero(k, k), std::move(counts), std::vector<bool>(static_cast<std::size_t>(k))};
  for (Eigen::Index a = 0; a < k; ++a) {
    const long long total = t.counts.row(a).sum();
    if (total == 0) {
      t.probs(a, a) = 1.0;
      t.row_support[static_cast<std::size_t>(a)] = false;
    } else {
      for (Eigen::Index b = 0; b < k; ++b)
        t.probs(a, b) = static_cast<double>(t.counts(a, b)) / static_cast<double>(total);
      t.row_support[static_cast<std::size_t>(a)] = true;
    }
  }
  return t;
}

TransitionMatrix TransitionMatrix::from_probabilities(Matrix probs, double tolerance) {
  const Eigen::Index k = probs.rows();
  if (probs.cols() != k) throw DimensionError("transition matrix must be square");
  for (Eigen::Index a = 0; a < k; ++a) {
    if ((probs.row(a).array() < 0.0).any() || (probs.row(a).array() > 1.0).any())
      throw DomainError("transition probabilities must lie in [0, 1]");
    if (std::abs(probs.row(a).sum() - 1.0) > tolerance)
      throw DomainError("transition matrix row " + std::to_string(a + 1) + " does not sum to 1");
  }
  return TransitionMatrix{std::move(probs), CountMatrix::Zero(k, k),
                          std::vector<bool>(static_cast<std::size_t>(k), true)};
}

TransitionMatrix estimate_transition_matrix(const StateSequence& seq) {
  CountMatrix counts = CountMatrix::Zero(seq.states, seq.states);
  for (std::size_t t = 0; t + 1 < seq.labels.size(); ++t) ++counts(seq.labels[t] - 1, seq.labels[t + 1] - 1);
  return TransitionMatrix::from_counts(std::move(counts));
}

TransitionMatrix pool_transition_matrix(const std::vector<StateSequence>& seqs, PoolingMode mode) {
  if (seqs.empty()) throw DomainError("no sequences to pool");
  const int k = seqs.front().states;
  CountMatrix counts = CountMatrix::Zero(k, k);
  Matrix prob_sum = Matrix::Zero(k, k);
  std::vector<int> supporting(static_cast<std::size_t>(k), 0);
  for (const auto& s : seqs) {
    if (s.states != k) throw DimensionError("sequences differ in state count");
    const TransitionMatrix t = estimate_transition_matrix(s);
    counts += t.counts;
    for (int a = 0; a < k; ++a) {
      if (!t.row_support[static_cast<std::size_t>(a)]) continue;
      prob_sum.row(a) += t.probs.row(a);
      ++supporting[static_cast<std::size_t>(a)];
    }
  }
  TransitionMatrix pooled = TransitionMatrix::from_counts(std::move(counts));
  if (mode == PoolingMode::Average) {
    for (int a = 0; a < k; ++a) {
      const int c = supporting[static_cast<std::size_t>(a)];
      if (c > 0) pooled.probs.row(a) = prob_sum.row(a) / static_cast<double>(c);
    }
  }
  return pooled;
}

double hellinger_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("hellinger_distance: matrices differ in size");
  return (a.array().sqrt() - b.array().sqrt()).matrix().norm() / std::sqrt(2.0);
}

double hellinger_distance(const TransitionMatrix& a, const TransitionMatrix& b) {
  return hellinger_distance(a.probs, b.probs);
}

int closed_class_count(const Matrix& probs) {
  const Eigen::Index k = probs.rows();
  // Transitive closure of the positive-entry graph (K is small).
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> reach(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) reach(i, j) = (i == j) || probs(i, j) > 0.0;
  for (Eigen::Index via = 0; via < k; ++via)
    for (Eigen::Index i = 0; i < k; ++i)
      if (reach(i, via))
        for (Eigen::Index j = 0; j < k; ++j) reach(i, j) = reach(i, j) || reach(via, j);

  // A class is closed when everything reachable from it reaches back.
  int closed = 0;
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (seen[static_cast<std::size_t>(i)]) continue;
    bool is_closed = true;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (reach(i, j) && reach(j, i)) seen[static_cast<std::size_t>(j)] = true;
      if (reach(i, j) && !reach(j, i)) is_closed = false;
    }
    if (is_closed) ++closed;
  }
  return closed;
}

EquilibriumDistribution equilibrium(const Matrix& probs) {
  const Eigen::Index k = probs.rows();
  if (k < 1 || probs.cols() != k) throw DimensionError("equilibrium needs a square matrix");
  const int closed = closed_class_count(probs);
  if (closed != 1)
    throw NoUniqueEquilibriumError("chain has " + std::to_string(closed) +
                                   " closed classes; the stationary distribution is not unique");

  constexpr long kMaxIterations = 1000000;
  const Matrix pt = probs.transpose();
  Vector pi = Vector::Constant(k, 1.0 / static_cast<double>(k));
  for (long it = 1; it <= kMaxIterations; ++it) {
    Vector next = pt * pi;
    next /= next.sum();
    const double change = (next - pi).cwiseAbs().maxCoeff();
    pi = std::move(next);
    if (change < 1e-13) {
      if ((pt * pi - pi).cwiseAbs().maxCoeff() > 1e-10)
        throw NoUniqueEquilibriumError("power iteration settled on a non-stationary vector");
      return EquilibriumDistribution{pi, it};
    }
  }
  throw NoUniqueEquilibriumError("power iteration did not converge (periodic chain?)");
}

EquilibriumDistribution equilibrium(const TransitionMatrix& p) { return equilibrium(p.probs); }

TemporalClustering temporal_cluster(const std::vector<TransitionMatrix>& mats, std::size_t k_tc,
                                    WardVariant variant) {
  if (mats.size() < k_tc || k_tc < 1)
    throw RangeError("temporal clustering into " + std::to_string(k_tc) + " groups needs at least that many runs");
  const std::size_t n = mats.size();
  DistanceMatrix d(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, hellinger_distance(mats[i], mats[j]));

  TemporalClustering out;
  out.tree = ward_linkage(d, variant);
  out.labels = cut_tree(out.tree, k_tc);
  const int k = mats.front().states();
  for (std::size_t g = 1; g <= k_tc; ++g) {
    CountMatrix counts = CountMatrix::Zero(k, k);
    for (std::size_t i = 0; i < n; ++i)
      if (out.labels[i] == static_cast<int>(g)) counts += mats[i].counts;
    out.pooled.push_back(TransitionMatrix::from_counts(std::move(counts)));
    try {
      out.equilibria.emplace_back(equilibrium(out.pooled.back()));
    } catch (const NoUniqueEquilibriumError&) {
      out.equilibria.emplace_back(std::nullopt);
    }
  }
  return out;
}

Matrix final_location_probabilities(const std::vector<StateSequence>& seqs, const std::vector<int>& tc_labels) {
  if (seqs.size() != tc_labels.size()) throw DimensionError("one temporal-cluster label per sequence required");
  if (seqs.empty()) return Matrix();
  int groups = 0;
  for (int l : tc_labels) {
    if (l < 1) throw RangeError("temporal cluster labels start at 1");
    groups = std::max(groups, l);
  }
  const int k = seqs.front().states;
  Matrix out = Matrix::Zero(groups, k);
  for (std::size_t i = 0; i < seqs.size(); ++i) out(tc_labels[i] - 1, seqs[i].labels.back() - 1) += 1.0;
  for (int g = 0; g < groups; ++g) {
    const double total = out.row(g).sum();
    if (total > 0) out.row(g) /= total;
  }
  return out;
}

}  // namespace pnss
