#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>

#include "pnss/csv.hpp"
#include "pnss/pipeline.hpp"
#include "pnss/serialize.hpp"
#include "pnss/synth.hpp"

namespace {

using namespace pnss;

struct GlobalOptions {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::vector<std::string> settings;
};

PipelineConfig resolve_config(const GlobalOptions& g) {
  PipelineConfig c;
  if (!g.config_file.empty()) c = load_config(g.config_file);
  for (const auto& kv : g.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) {
    c.seed = *g.seed;
    c.synth.seed = *g.seed;
  }
  if (g.threads) c.threads = *g.threads;
  if (g.out) c.out = *g.out;
  c.validate();
  return c;
}

std::filesystem::path prepare_out(const PipelineConfig& c) {
  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  if (ec) throw IoError("cannot create " + c.out.string() + ": " + ec.message());
  return c.out;
}

TrajectoryDataset load_thinned(const std::string& input, const PipelineConfig& c) {
  TrajectoryDataset data = ingest(input);
  if (c.thin_count == 0 || c.thin_count == data.frame_count) return data;
  return thin(data, c.thin_count);
}

void write_labels(const std::filesystem::path& path, const SyntheticData& s) {
  CsvWriter w(path, {"run_id", "frame_index", "state"});
  for (std::size_t r = 0; r < s.dataset.runs.size(); ++r)
    for (std::size_t t = 0; t < s.labels[r].size(); ++t) {
      w << s.dataset.runs[r].run_id << s.dataset.runs[r].frame_index[t] << s.labels[r][t];
      w.end_row();
    }
}

// Reads run_id, frame_index and a label column back into run-major order.
std::pair<StackedFrames, std::vector<int>> read_label_table(const std::string& path, const std::string& column) {
  const CsvTable t = read_csv(path);
  const std::size_t c_run = t.column("run_id");
  const std::size_t c_frame = t.column("frame_index");
  const std::size_t c_label = t.column(column);
  StackedFrames frames;
  std::vector<int> labels;
  std::map<std::string, std::size_t> pos;
  std::vector<std::vector<std::pair<std::size_t, int>>> per_run;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    std::size_t frame = 0, label = 0;
    if (!parse_size(row[c_frame], frame) || !parse_size(row[c_label], label))
      throw IngestError(path + ": row " + std::to_string(i + 2) + " is not numeric");
    auto [it, fresh] = pos.try_emplace(row[c_run], per_run.size());
    if (fresh) {
      frames.run_ids.push_back(row[c_run]);
      per_run.emplace_back();
    }
    per_run[it->second].emplace_back(frame, static_cast<int>(label));
  }
  if (per_run.empty()) throw IngestError(path + ": no rows");
  frames.frames_per_run = per_run.front().size();
  for (std::size_t r = 0; r < per_run.size(); ++r) {
    if (per_run[r].size() != frames.frames_per_run)
      throw IngestError(path + ": run '" + frames.run_ids[r] + "' has a different number of frames");
    std::stable_sort(per_run[r].begin(), per_run[r].end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [frame, label] : per_run[r]) {
      frames.run_of.push_back(r);
      frames.frame_index.push_back(frame);
      labels.push_back(label);
    }
  }
  return {std::move(frames), std::move(labels)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Principal nested shape space analysis of landmark trajectories"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config_file, "Key-value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Random seed (also seeds the synthetic generator)");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--set", g.settings, "Override a config key: --set key=value")->take_all();

  std::string input;
  std::string model_path;
  std::string column = "sphere_cluster";
  std::size_t count = 0;

  auto* ingest_check = app.add_subcommand("ingest-check", "Parse trajectory files and report their layout");
  ingest_check->add_option("input", input, "Trajectory file or directory")->required();

  auto* thin_cmd = app.add_subcommand("thin", "Keep equally spaced frames of every run");
  thin_cmd->add_option("input", input, "Trajectory file or directory")->required();
  thin_cmd->add_option("--count", count, "Frames to keep per run (default: thin_count)");

  auto* synth_cmd = app.add_subcommand("synthesize", "Generate template-hopping trajectories (synth.* keys)");

  auto* gpa_cmd = app.add_subcommand("gpa", "Generalized Procrustes analysis");
  auto* pca_cmd = app.add_subcommand("pca", "Tangent-space PCA");
  auto* pnss_cmd = app.add_subcommand("pnss", "Fit the nested-sphere shape model");
  auto* cluster_cmd = app.add_subcommand("cluster", "Ward clustering on the sphere and on PC scores");
  auto* arcs_cmd = app.add_subcommand("arcs", "Principal arcs and mean shapes");
  for (auto* sc : {gpa_cmd, pca_cmd, pnss_cmd, cluster_cmd, arcs_cmd})
    sc->add_option("input", input, "Trajectory file or directory")->required();

  auto* trans_cmd = app.add_subcommand("transitions", "Transition matrices from a label table");
  trans_cmd->add_option("labels", input, "CSV with run_id, frame_index and a label column")->required();
  trans_cmd->add_option("--column", column, "Label column")->capture_default_str();

  auto* pipe_cmd = app.add_subcommand("pipeline", "Run every stage end to end");
  pipe_cmd->add_option("input", input, "Trajectory file or directory (default: synthesize from config)");

  auto* score_cmd = app.add_subcommand("score", "Stream PNSS coordinates of all frames under a saved model");
  score_cmd->add_option("model", model_path, "model.json from pnss or pipeline")->required()->check(CLI::ExistingFile);
  score_cmd->add_option("input", input, "Trajectory file or directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const PipelineConfig config = resolve_config(g);

    if (*ingest_check) {
      const TrajectoryDataset d = ingest(input);
      std::cout << "runs " << d.runs.size() << "\nk " << d.k << "\nm " << d.m << "\nframes " << d.frame_count
                << "\ntotal_frames " << d.total_frames() << '\n';
    } else if (*thin_cmd) {
      const TrajectoryDataset d = ingest(input);
      const std::size_t n = count > 0 ? count : config.thin_count;
      if (n == 0) throw ConfigError("thin needs --count or thin_count");
      write_dataset(prepare_out(config), thin(d, n));
    } else if (*synth_cmd) {
      const auto dir = prepare_out(config);
      const SyntheticData s = synthesize(config.synth);
      write_dataset(dir, s.dataset);
      write_labels(dir / "labels.csv", s);
    } else if (*gpa_cmd || *pca_cmd) {
      const auto dir = prepare_out(config);
      const StackedFrames frames = stack_frames(load_thinned(input, config));
      GpaOptions opt{config.gpa_max_iterations, config.gpa_tolerance, config.threads};
      const GPAResult result = gpa(frames.configs, opt);
      if (*gpa_cmd) artifacts::write_gpa(dir, frames, result);
      else artifacts::write_pca(dir, frames, fit_shape_pca(result));
    } else if (*pnss_cmd || *cluster_cmd || *arcs_cmd) {
      const auto dir = prepare_out(config);
      const StackedFrames frames = stack_frames(load_thinned(input, config));
      const PNSSModel model = fit_model(frames.configs, config);
      if (*pnss_cmd) artifacts::write_pnss(dir, frames, model);
      if (*cluster_cmd) artifacts::write_clusters(dir, frames, cluster_states(model, config));
      if (*arcs_cmd) artifacts::write_arcs(dir, model, config);
    } else if (*trans_cmd) {
      const auto dir = prepare_out(config);
      const auto [frames, labels] = read_label_table(input, column);
      artifacts::write_transitions(dir, frames,
                                   analyze_transitions(frames.run_ids, labels, frames.frames_per_run, config));
    } else if (*pipe_cmd) {
      const TrajectoryDataset data = input.empty() ? synthesize(config.synth).dataset : ingest(input);
      const PipelineResult r = run_pipeline(data, config);
      std::cout << "p " << r.model.p << "\nobservations " << r.frames.configs.size() << "\nstages "
                << r.stages.size() << '\n';
    } else if (*score_cmd) {
      const auto dir = prepare_out(config);
      const PNSSModel model = load_model(model_path);
      const std::size_t n =
          score_stream(model, trajectory_files(input), dir / "all_scores.csv", config.score_chunk, config.threads);
      std::cout << "scored " << n << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "pnss: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << "pnss: out of memory\n";
    return 3;
  }
  return 0;
}
