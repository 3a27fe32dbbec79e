#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pnss/config.hpp"
#include "pnss/dataset.hpp"
#include "pnss/markov.hpp"
#include "pnss/pnss.hpp"

namespace pnss {

/// A stage failure; keeps the kind (and so the exit code) of the cause.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const Error& cause)
      : Error(cause.kind(), "stage '" + stage + "' failed: " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Dataset frames in run-major order with their identifiers.
struct StackedFrames {
  std::vector<Configuration> configs;
  std::vector<std::string> run_ids;     ///< one per run
  std::vector<std::size_t> run_of;      ///< run position of each frame
  std::vector<std::size_t> frame_index; ///< original 1-based index of each frame
  std::size_t frames_per_run = 0;
};

StackedFrames stack_frames(const TrajectoryDataset& data);

/// GPA, tangent PCA, embedding and nested-sphere fit, as in fit_pnss, with
/// the component count taken from the config (or its variance threshold).
PNSSModel fit_model(const std::vector<Configuration>& configs, const PipelineConfig& config);

struct StateClustering {
  Dendrogram sphere_tree;      ///< great-circle distances on the embedded sphere
  std::vector<int> sphere_labels;
  Dendrogram pc_tree;          ///< Euclidean distances of leading PC scores
  std::vector<int> pc_labels;

  const std::vector<int>& states(StateSpace space) const {
    return space == StateSpace::Sphere ? sphere_labels : pc_labels;
  }
};

StateClustering cluster_states(const PNSSModel& model, const PipelineConfig& config);

struct TransitionAnalysis {
  std::vector<StateSequence> sequences;
  std::vector<TransitionMatrix> per_run;
  TransitionMatrix overall;
  TransitionMatrix overall_counts;   ///< pooled by summed counts
  TransitionMatrix overall_average;  ///< pooled by averaging run matrices
  std::optional<EquilibriumDistribution> overall_equilibrium;
  TemporalClustering temporal;
  Matrix final_location;  ///< K_tc x K
};

/// `labels` are in run-major order as produced by stack_frames.
TransitionAnalysis analyze_transitions(const std::vector<std::string>& run_ids, const std::vector<int>& labels,
                                       std::size_t frames_per_run, const PipelineConfig& config);

struct ClusterModel {
  int cluster = 0;
  std::size_t size = 0;
  std::optional<PNSSModel> model;
  std::string note;  ///< reason when no model was fitted
};

struct PipelineResult {
  TrajectoryDataset thinned;
  StackedFrames frames;
  PNSSModel model;
  StateClustering clusters;
  std::vector<ClusterModel> cluster_models;
  TransitionAnalysis transitions;
  std::vector<std::string> stages;  ///< completed stages in order
};

/// Runs every stage, writing artifacts into config.out as each completes.
/// A failing stage is recorded in pipeline_status.txt and rethrown as
/// PipelineError; artifacts of earlier stages stay on disk.
PipelineResult run_pipeline(const TrajectoryDataset& data, const PipelineConfig& config);

/// Artifact writers, shared by the pipeline and the single-stage commands.
namespace artifacts {
void write_gpa(const std::filesystem::path& dir, const StackedFrames& frames, const GPAResult& gpa);
void write_pca(const std::filesystem::path& dir, const StackedFrames& frames, const ShapePCAModel& pca);
void write_pnss(const std::filesystem::path& dir, const StackedFrames& frames, const PNSSModel& model);
void write_distance_histogram(const std::filesystem::path& dir, const TrajectoryDataset& data);
void write_clusters(const std::filesystem::path& dir, const StackedFrames& frames, const StateClustering& clusters);
void write_arcs(const std::filesystem::path& dir, const PNSSModel& model, const PipelineConfig& config);
void write_cluster_models(const std::filesystem::path& dir, const PNSSModel& global,
                          const std::vector<ClusterModel>& models, const PipelineConfig& config);
void write_transitions(const std::filesystem::path& dir, const StackedFrames& frames,
                       const TransitionAnalysis& analysis);
void write_config(const std::filesystem::path& dir, const PipelineConfig& config);
}  // namespace artifacts

/// PNSS coordinates of every frame of the given trajectory files, streamed
/// in chunks of `chunk` frames; rows are written in input order. Returns the
/// number of frames scored.
std::size_t score_stream(const PNSSModel& model, const std::vector<std::filesystem::path>& files,
                         const std::filesystem::path& out_csv, std::size_t chunk, unsigned threads);

/// Trajectory files of a directory (sorted) or the single file given.
std::vector<std::filesystem::path> trajectory_files(const std::filesystem::path& path);

}  // namespace pnss
