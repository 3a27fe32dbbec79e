#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pnss/cluster.hpp"
#include "pnss/markov.hpp"

namespace pnss {

/// Parameters of the synthetic trajectory generator.
struct GeneratorSpec {
  Eigen::Index k = 8;
  Eigen::Index m = 3;
  std::size_t runs = 20;
  std::size_t frames = 200;
  std::size_t states = 4;
  /// Probability of staying in the current state; the remainder is split
  /// evenly across the other states. Ignored when `switch_matrix` is set.
  double stay_probability = 0.9;
  Matrix switch_matrix;  ///< optional states x states row-stochastic matrix
  double noise = 0.01;   ///< landmark noise SD relative to unit centroid size
  double template_spread = 1.0;  ///< template perturbation SD, in chain spacings
  std::uint64_t seed = 1;

  /// The effective state transition matrix.
  Matrix transition_matrix() const;
  /// Throws ConfigError on any invalid field.
  void validate() const;
};

enum class StateSpace { Sphere, PcScores };

struct PipelineConfig {
  std::size_t thin_count = 0;  ///< 0 keeps every frame
  Eigen::Index p = 0;          ///< 0 selects p by variance_threshold
  double variance_threshold = 0.90;
  std::size_t k_states = 4;
  std::size_t k_tc = 4;
  double c = 1.0;
  int arc_samples = 11;
  std::size_t arc_components = 3;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::filesystem::path out = "pnss_out";
  WardVariant linkage = WardVariant::WardD;
  PoolingMode pooling = PoolingMode::Counts;
  StateSpace states_from = StateSpace::Sphere;
  std::size_t pc_cluster_components = 3;
  int gpa_max_iterations = 200;
  double gpa_tolerance = 1e-10;
  int pns_restarts = 3;
  std::size_t min_cluster_size = 0;  ///< 0 derives the minimum from p
  std::size_t score_chunk = 4096;
  GeneratorSpec synth;

  /// Throws ConfigError when a value is out of range.
  void validate() const;
};

/// Applies one `key = value` setting; throws ConfigError for unknown keys
/// or unparsable values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

/// Reads a key-value file: one `key = value` per line, `#` comments.
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Every setting in canonical text form, sorted by key.
std::map<std::string, std::string> config_settings(const PipelineConfig& config);

}  // namespace pnss
