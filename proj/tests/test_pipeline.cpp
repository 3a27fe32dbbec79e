#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pnss/csv.hpp"
#include "pnss/pipeline.hpp"
#include "pnss/serialize.hpp"
#include "pnss/synth.hpp"
#include "support/tempdir.hpp"

using namespace pnss;
using testing_support::TempDir;

namespace {

SyntheticData small_data(std::size_t runs = 6, std::size_t frames = 40) {
  GeneratorSpec spec;
  spec.runs = runs;
  spec.frames = frames;
  spec.k = 6;
  spec.seed = 5;
  return synthesize(spec);
}

PipelineConfig config_for(const std::filesystem::path& out) {
  PipelineConfig c;
  c.out = out;
  c.k_tc = 2;
  c.thin_count = 20;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST(Pipeline, WritesEveryArtifact) {
  TempDir dir;
  const SyntheticData syn = small_data();
  const PipelineResult r = run_pipeline(syn.dataset, config_for(dir.path()));
  EXPECT_EQ(r.stages.size(), 10u);
  EXPECT_EQ(r.frames.configs.size(), 6u * 20u);
  for (const char* f : {"config_used.txt", "gpa_fits.csv", "gpa_trace.csv", "procrustes_mean.csv", "variance_pca.csv",
                        "pc_scores.csv", "model.json", "scores.csv", "variance_pnss.csv", "distance_histogram.csv",
                        "clusters.csv", "dendrogram_sphere.csv", "dendrogram_pc.csv", "arcs.csv", "mean_shapes.csv",
                        "cluster_models.csv", "cluster_arcs.csv", "cluster_mean_shapes.csv", "visit_history.csv",
                        "transitions.csv", "transition_overall.txt", "equilibrium.csv", "temporal_clusters.csv",
                        "dendrogram_temporal.csv", "pooling_comparison.csv", "final_location.csv", "pipeline_status.txt"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  EXPECT_NE(slurp(dir / "pipeline_status.txt").find("complete"), std::string::npos);
}

TEST(Pipeline, CsvSchemas) {
  TempDir dir;
  const PipelineResult r = run_pipeline(small_data().dataset, config_for(dir.path()));
  EXPECT_EQ(first_line(dir / "clusters.csv"), "run_id,frame_index,sphere_cluster,pc_cluster");
  EXPECT_EQ(first_line(dir / "transitions.csv"), "scope,from,to,count,probability");
  EXPECT_EQ(first_line(dir / "gpa_fits.csv"), "run_id,frame_index,procrustes_distance,unique");
  EXPECT_EQ(first_line(dir / "dendrogram_sphere.csv"), "step,left,right,height,size");
  std::string want = "run_id,frame_index";
  for (Eigen::Index j = 1; j <= r.model.p; ++j) want += ",PNSS" + std::to_string(j);
  EXPECT_EQ(first_line(dir / "scores.csv"), want);

  const CsvTable scores = read_csv(dir / "scores.csv");
  EXPECT_EQ(scores.rows.size(), r.frames.configs.size());
  // Thinned indices of 40 frames down to 20 keep the original numbering.
  EXPECT_EQ(scores.rows[1][1], "3");
  const CsvTable trans = read_csv(dir / "transitions.csv");
  double overall_sum = 0.0;
  for (const auto& row : trans.rows)
    if (row[0] == "overall" && row[1] == "1") overall_sum += std::stod(row[4]);
  EXPECT_NEAR(overall_sum, 1.0, 1e-12);
}

TEST(Pipeline, ComponentBoundFailureKeepsEarlierArtifacts) {
  TempDir dir;
  PipelineConfig c = config_for(dir.path());
  c.p = 12;  // k = 6, m = 3: p must stay below 11
  try {
    run_pipeline(small_data().dataset, c);
    FAIL() << "expected PipelineError";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "embed");
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
    EXPECT_NE(std::string(e.what()).find("11"), std::string::npos) << e.what();
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "gpa_fits.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "pc_scores.csv"));
  EXPECT_FALSE(std::filesystem::exists(dir / "scores.csv"));
  const std::string status = slurp(dir / "pipeline_status.txt");
  EXPECT_NE(status.find("pca ok"), std::string::npos);
  EXPECT_NE(status.find("embed failed"), std::string::npos);
}

TEST(Pipeline, ThreadCountDoesNotChangeOutput) {
  TempDir a, b;
  const SyntheticData syn = small_data();
  PipelineConfig ca = config_for(a.path()), cb = config_for(b.path());
  cb.threads = 4;
  run_pipeline(syn.dataset, ca);
  run_pipeline(syn.dataset, cb);
  for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
    const auto name = entry.path().filename();
    EXPECT_EQ(slurp(entry.path()), slurp(b.path() / name)) << name;
  }
}

TEST(Serialize, ModelRoundTripAndStreamScoring) {
  TempDir dir;
  const SyntheticData syn = small_data(4, 20);
  PipelineConfig c = config_for(dir / "out");
  c.thin_count = 0;
  const PipelineResult r = run_pipeline(syn.dataset, c);

  const PNSSModel loaded = load_model(dir / "out" / "model.json");
  EXPECT_EQ(loaded.p, r.model.p);
  // Loaded models carry parameters only; serialization is a fixed point on them.
  EXPECT_EQ(model_to_json(model_from_json(model_to_json(loaded))), model_to_json(loaded));
  EXPECT_EQ(loaded.gpa.mean.matrix(), r.model.gpa.mean.matrix());
  EXPECT_EQ(loaded.pca.eigenvalues, r.model.pca.eigenvalues);
  ASSERT_EQ(loaded.pns.levels.size(), r.model.pns.levels.size());
  for (std::size_t l = 0; l < loaded.pns.levels.size(); ++l) {
    EXPECT_EQ(loaded.pns.levels[l].radius, r.model.pns.levels[l].radius);
    EXPECT_EQ(loaded.pns.levels[l].rotation_to_pole, r.model.pns.levels[l].rotation_to_pole);
  }
  EXPECT_EQ(loaded.cut_point(), r.model.cut_point());

  write_dataset(dir / "data", syn.dataset);
  const std::size_t n = score_stream(loaded, trajectory_files(dir / "data"), dir / "all.csv", 7, 2);
  EXPECT_EQ(n, 80u);
  const CsvTable streamed = read_csv(dir / "all.csv");
  const CsvTable fitted = read_csv(dir / "out" / "scores.csv");
  ASSERT_EQ(streamed.rows.size(), fitted.rows.size());
  for (std::size_t i = 0; i < fitted.rows.size(); ++i) {
    EXPECT_EQ(streamed.rows[i][0], fitted.rows[i][0]);
    EXPECT_EQ(streamed.rows[i][1], fitted.rows[i][1]);
    for (std::size_t j = 2; j < fitted.header.size(); ++j)
      EXPECT_NEAR(std::stod(streamed.rows[i][j]), std::stod(fitted.rows[i][j]), 1e-7) << i << "," << j;
  }
}

TEST(Serialize, RejectsBadDocuments) {
  EXPECT_THROW(model_from_json("{"), IngestError);
  EXPECT_THROW(model_from_json(R"({"format_version": 99})"), IngestError);
}

TEST(Transitions, AnalysisOnKnownLabels) {
  PipelineConfig c;
  c.k_states = 2;
  c.k_tc = 1;
  const std::vector<std::string> ids{"a", "b"};
  const std::vector<int> labels{1, 1, 2, 2, 1, 2, 1, 2};
  const TransitionAnalysis t = analyze_transitions(ids, labels, 4, c);
  ASSERT_EQ(t.per_run.size(), 2u);
  EXPECT_EQ(t.per_run[0].counts(0, 0), 1);
  EXPECT_EQ(t.per_run[0].counts(0, 1), 1);
  EXPECT_EQ(t.overall.counts(0, 1), 3);
  EXPECT_EQ(t.overall.counts(1, 0), 1);
  ASSERT_TRUE(t.overall_equilibrium.has_value());
}
