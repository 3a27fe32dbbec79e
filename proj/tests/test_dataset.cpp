#include <gtest/gtest.h>

#include <fstream>

#include "pnss/config.hpp"
#include "pnss/csv.hpp"
#include "pnss/dataset.hpp"
#include "pnss/synth.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace pnss;
using testing_support::TempDir;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string what_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(Ingest, WellFormedThreeFrames) {
  TempDir dir;
  write_text(dir / "a.traj",
             "# comment\n3 2 3\n\n0 0\n1 0\n0 1\n\n0 0\n2 0\n0 1\n\n1e-1 +0.5\n1 0\n0 1.5\n");
  const TrajectoryDataset d = ingest(dir.path());
  ASSERT_EQ(d.runs.size(), 1u);
  EXPECT_EQ(d.runs[0].run_id, "a");
  EXPECT_EQ(d.k, 3);
  EXPECT_EQ(d.m, 2);
  EXPECT_EQ(d.frame_count, 3u);
  EXPECT_EQ(d.runs[0].frame_index, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(d.runs[0].frames[2].points()(0, 1), 0.5);
}

TEST(Ingest, EmptyDirectory) {
  TempDir dir;
  EXPECT_THROW(ingest(dir.path()), IngestError);
  EXPECT_THROW(ingest(dir / "missing"), IngestError);
}

TEST(Ingest, RowWithWrongCoordinateCountNamesLine) {
  TempDir dir;
  write_text(dir / "bad.traj", "4 3 1\n0 0 0\n1 0\n0 1 0\n0 0 1\n");
  const std::string msg = what_of([&] { ingest(dir.path()); });
  EXPECT_NE(msg.find("bad.traj:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("expected 3 coordinates, found 2"), std::string::npos) << msg;
}

TEST(Ingest, AggregatesAcrossFiles) {
  TempDir dir;
  write_text(dir / "a.traj", "3 2 1\n0 0\n1 x\n0 1\n");
  write_text(dir / "b.traj", "3 2 2\n0 0\n1 0\n0 1\n");
  write_text(dir / "c.traj", "3 2 1\n0 0\n0 0\n0 0\n");
  const std::string msg = what_of([&] { ingest(dir.path()); });
  EXPECT_NE(msg.find("3 ingest error(s)"), std::string::npos) << msg;
  EXPECT_NE(msg.find("a.traj:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("b.traj"), std::string::npos) << msg;
  EXPECT_NE(msg.find("c.traj:2: frame 1 has coincident landmarks"), std::string::npos) << msg;
}

TEST(Ingest, MismatchedRuns) {
  TempDir dir;
  write_text(dir / "a.traj", "3 2 1\n0 0\n1 0\n0 1\n");
  write_text(dir / "b.traj", "3 2 2\n0 0\n1 0\n0 1\n\n0 0\n1 0\n0 2\n");
  EXPECT_NE(what_of([&] { ingest(dir.path()); }).find("frame count differs"), std::string::npos);
}

TEST(Ingest, RoundTripIsExact) {
  TempDir dir;
  GeneratorSpec spec;
  spec.runs = 3;
  spec.frames = 7;
  const SyntheticData syn = synthesize(spec);
  write_dataset(dir.path(), syn.dataset);
  const TrajectoryDataset back = ingest(dir.path());
  ASSERT_EQ(back.runs.size(), 3u);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(back.runs[r].run_id, syn.dataset.runs[r].run_id);
    for (std::size_t t = 0; t < 7; ++t)
      EXPECT_EQ(back.runs[r].frames[t].points(), syn.dataset.runs[r].frames[t].points());
  }
}

TEST(Stream, MatchesIngest) {
  TempDir dir;
  GeneratorSpec spec;
  spec.runs = 1;
  spec.frames = 5;
  const SyntheticData syn = synthesize(spec);
  write_dataset(dir.path(), syn.dataset);
  TrajectoryStream s(dir / (syn.dataset.runs[0].run_id + ".traj"));
  EXPECT_EQ(s.frames(), 5u);
  std::size_t t = 0;
  while (auto f = s.next()) EXPECT_EQ(f->points(), syn.dataset.runs[0].frames[t++].points());
  EXPECT_EQ(t, 5u);
}

TEST(Thinning, Indices) {
  EXPECT_EQ(thin_indices(10, 4), (std::vector<std::size_t>{1, 4, 7, 10}));
  EXPECT_EQ(thin_indices(5, 5), (std::vector<std::size_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(thin_indices(5, 2), (std::vector<std::size_t>{1, 5}));
  const auto big = thin_indices(10000, 100);
  EXPECT_EQ(big[1], 102u);
  EXPECT_EQ(big[2], 203u);
  EXPECT_EQ(big[98], 9899u);
  EXPECT_EQ(big.back(), 10000u);
  EXPECT_THROW(thin_indices(10, 1), RangeError);
  EXPECT_THROW(thin_indices(10, 11), RangeError);
}

TEST(Thinning, MatchesRoundedFormula) {
  for (std::size_t f = 2; f < 60; ++f)
    for (std::size_t c = 2; c <= f; ++c) {
      const auto idx = thin_indices(f, c);
      for (std::size_t i = 0; i < c; ++i) {
        const double x = static_cast<double>(i) * static_cast<double>(f - 1) / static_cast<double>(c - 1);
        EXPECT_EQ(idx[i], 1 + static_cast<std::size_t>(std::floor(x + 0.5))) << f << "/" << c;
      }
    }
}

TEST(Thinning, KeepsOriginalFrameIndex) {
  GeneratorSpec spec;
  spec.runs = 2;
  spec.frames = 10;
  const SyntheticData syn = synthesize(spec);
  const TrajectoryDataset t = thin(syn.dataset, 4);
  EXPECT_EQ(t.frame_count, 4u);
  EXPECT_EQ(t.runs[1].frame_index, (std::vector<std::size_t>{1, 4, 7, 10}));
  EXPECT_EQ(t.runs[1].frames[1].points(), syn.dataset.runs[1].frames[3].points());
}

TEST(Csv, DoubleRoundTrip) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 40 - 20);
    double back = 0.0;
    ASSERT_TRUE(parse_double(format_double(v), back));
    EXPECT_EQ(back, v);
  }
  double x = 0.0;
  EXPECT_TRUE(parse_double("1.5e-3", x));
  EXPECT_EQ(x, 1.5e-3);
  EXPECT_FALSE(parse_double("1.5x", x));
  EXPECT_FALSE(parse_double("", x));
}

TEST(Csv, ReadWrite) {
  TempDir dir;
  {
    CsvWriter w(dir / "t.csv", {"a", "b"});
    w << std::string("x") << 0.1;
    w.end_row();
  }
  const CsvTable t = read_csv(dir / "t.csv");
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_EQ(t.rows[0][1], "0.1");
  EXPECT_THROW(t.column("c"), IngestError);
  write_text(dir / "bad.csv", "a,b\n1\n");
  EXPECT_NE(what_of([&] { read_csv(dir / "bad.csv"); }).find("bad.csv:2"), std::string::npos);
}

TEST(Config, ParseAndErrors) {
  TempDir dir;
  write_text(dir / "c.cfg", "# settings\nk_states = 3\nlinkage = ward.D2\n\nsynth.runs = 5\nc=2.5\n");
  const PipelineConfig c = load_config(dir / "c.cfg");
  EXPECT_EQ(c.k_states, 3u);
  EXPECT_EQ(c.linkage, WardVariant::WardD2);
  EXPECT_EQ(c.synth.runs, 5u);
  EXPECT_EQ(c.c, 2.5);

  write_text(dir / "bad.cfg", "k_states = 3\nnot_a_key = 1\n");
  const std::string msg = what_of([&] { load_config(dir / "bad.cfg"); });
  EXPECT_NE(msg.find("bad.cfg:2"), std::string::npos) << msg;
  PipelineConfig x;
  EXPECT_THROW(apply_setting(x, "k_states", "three"), ConfigError);
  EXPECT_THROW(apply_setting(x, "linkage", "single"), ConfigError);
  EXPECT_THROW(load_config(dir / "absent.cfg"), Error);
}

TEST(Config, SettingsRoundTrip) {
  PipelineConfig a;
  apply_setting(a, "variance_threshold", "0.8");
  apply_setting(a, "pooling", "average");
  apply_setting(a, "synth.switch_matrix", "0.5,0.5,0.25,0.75");
  PipelineConfig b;
  for (const auto& [k, v] : config_settings(a)) apply_setting(b, k, v);
  EXPECT_EQ(config_settings(a), config_settings(b));
  EXPECT_EQ(b.pooling, PoolingMode::Average);
  EXPECT_EQ(b.synth.transition_matrix()(1, 1), 0.75);
}

TEST(Synth, DeterministicForSeed) {
  GeneratorSpec spec;
  spec.runs = 2;
  spec.frames = 20;
  const SyntheticData a = synthesize(spec), b = synthesize(spec);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.dataset.runs[1].frames[7].points(), b.dataset.runs[1].frames[7].points());
  spec.seed = 2;
  EXPECT_NE(synthesize(spec).dataset.runs[1].frames[7].points(), a.dataset.runs[1].frames[7].points());
}

TEST(Synth, NoiselessSingleTemplateGivesOneShape) {
  GeneratorSpec spec;
  spec.states = 1;
  spec.noise = 0.0;
  spec.runs = 2;
  spec.frames = 10;
  const SyntheticData s = synthesize(spec);
  const Configuration& ref = s.dataset.runs[0].frames[0];
  for (const auto& run : s.dataset.runs)
    for (const auto& f : run.frames) EXPECT_LT(riemannian_shape_distance(f, ref), 1e-7);
}

TEST(Synth, LabelChainFollowsGenerator) {
  GeneratorSpec spec;
  spec.runs = 40;
  spec.frames = 300;
  spec.k = 4;
  const SyntheticData s = synthesize(spec);
  Matrix counts = Matrix::Zero(4, 4);
  for (const auto& l : s.labels)
    for (std::size_t t = 1; t < l.size(); ++t) counts(l[t - 1] - 1, l[t] - 1) += 1;
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(counts(i, i) / counts.row(i).sum(), 0.9, 0.02);
}

TEST(Synth, RejectsBadSpec) {
  GeneratorSpec spec;
  spec.stay_probability = 1.5;
  EXPECT_THROW(synthesize(spec), ConfigError);
  spec = {};
  spec.switch_matrix = Matrix::Identity(3, 3);
  EXPECT_THROW(spec.validate(), ConfigError);
}
