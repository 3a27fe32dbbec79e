#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pnss/config.hpp"
#include "pnss/dataset.hpp"

namespace pnss {

/// mt19937_64 with distribution code of our own: the engine's output is
/// fixed by the standard, the std:: distributions are not.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Uniformly distributed rotation in SO(m).
Matrix random_rotation(Rng& rng, Eigen::Index m);

struct SyntheticData {
  TrajectoryDataset dataset;
  std::vector<std::vector<int>> labels;  ///< per run, states 1..K per frame
  std::vector<Configuration> templates;
};

/// Runs that hop between template shapes under a Markov chain, each frame a
/// randomly rotated, translated and scaled noisy copy of its template.
SyntheticData synthesize(const GeneratorSpec& spec);

}  // namespace pnss
