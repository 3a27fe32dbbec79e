#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "pnss/procrustes.hpp"

namespace pnss {

struct Run {
  std::string run_id;
  std::vector<Configuration> frames;
  /// 1-based index of each frame in the original trajectory.
  std::vector<std::size_t> frame_index;
};

/// Runs of landmark trajectories sharing k, m and frame count.
struct TrajectoryDataset {
  std::vector<Run> runs;
  Eigen::Index k = 0;
  Eigen::Index m = 0;
  std::size_t frame_count = 0;

  std::size_t total_frames() const;
  /// Checks shared k, m, frame count and time ordering; throws IngestError.
  void validate() const;
};

/// Trajectory text format:
///   header line "k m frames", then per frame k lines of m decimals,
///   frames separated by blank lines; '#' starts a comment line.
Run read_trajectory_file(const std::filesystem::path& path);
void write_trajectory_file(const std::filesystem::path& path, const Run& run);

/// Reads every *.traj file of a directory (sorted by name), or one file.
/// Parse failures across all files are collected into one IngestError.
TrajectoryDataset ingest(const std::filesystem::path& path);

/// Writes one <run_id>.traj per run into `dir`.
void write_dataset(const std::filesystem::path& dir, const TrajectoryDataset& data);

/// 1-based indices 1 + round((i-1)(frames-1)/(count-1)), i = 1..count.
std::vector<std::size_t> thin_indices(std::size_t frame_count, std::size_t count);

TrajectoryDataset thin(const TrajectoryDataset& data, std::size_t count);

/// Frame-at-a-time reader for files too large to hold in memory.
class TrajectoryStream {
 public:
  explicit TrajectoryStream(const std::filesystem::path& path);

  Eigen::Index landmarks() const noexcept { return k_; }
  Eigen::Index dims() const noexcept { return m_; }
  std::size_t frames() const noexcept { return frames_; }

  /// Next frame, or nullopt after the last one.
  std::optional<Configuration> next();

 private:
  bool next_data_line(std::string& line);

  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  Eigen::Index k_ = 0;
  Eigen::Index m_ = 0;
  std::size_t frames_ = 0;
  std::size_t read_ = 0;
};

}  // namespace pnss
