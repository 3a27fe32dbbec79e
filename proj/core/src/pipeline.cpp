#include "pnss/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>

#include "pnss/csv.hpp"
#include "pnss/parallel.hpp"
#include "pnss/serialize.hpp"

namespace pnss {

namespace {

std::vector<std::string> coord_names(Eigen::Index m) {
  if (m <= 3) {
    static const char* xyz[] = {"x", "y", "z"};
    return std::vector<std::string>(xyz, xyz + m);
  }
  std::vector<std::string> out;
  for (Eigen::Index j = 1; j <= m; ++j) out.push_back("x" + std::to_string(j));
  return out;
}

std::vector<std::string> with_prefix(std::vector<std::string> head, const std::string& stem, std::size_t count) {
  for (std::size_t j = 1; j <= count; ++j) head.push_back(stem + std::to_string(j));
  return head;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void write_dendrogram(const std::filesystem::path& path, const Dendrogram& tree) {
  CsvWriter w(path, {"step", "left", "right", "height", "size"});
  for (std::size_t s = 0; s < tree.merges.size(); ++s) {
    const Merge& mg = tree.merges[s];
    w << (s + 1) << mg.left << mg.right << mg.height << mg.size;
    w.end_row();
  }
}

// Writes the rows of a configuration after a label prefix.
template <typename Prefix>
void write_shape_rows(CsvWriter& w, const Matrix& points, Prefix&& prefix) {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    prefix(w);
    w << static_cast<long long>(i + 1);
    for (Eigen::Index j = 0; j < points.cols(); ++j) w << points(i, j);
    w.end_row();
  }
}

Matrix procrustes_mean_points(const PNSSModel& model) { return from_preshape(model.pca.mean).points(); }

// PNSS mean rotated onto the Procrustes mean for side-by-side display.
Matrix aligned_pnss_mean_points(const PNSSModel& model) {
  const PreShape mu = to_preshape(pnss_mean_shape(model));
  return from_preshape(opa_fit(mu, model.pca.mean).fitted).points();
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::size_t effective_min_cluster_size(const PipelineConfig& config, Eigen::Index p) {
  return config.min_cluster_size > 0 ? config.min_cluster_size : static_cast<std::size_t>(p + 2);
}

}  // namespace

StackedFrames stack_frames(const TrajectoryDataset& data) {
  StackedFrames s;
  s.frames_per_run = data.frame_count;
  s.configs.reserve(data.total_frames());
  for (std::size_t r = 0; r < data.runs.size(); ++r) {
    const Run& run = data.runs[r];
    s.run_ids.push_back(run.run_id);
    for (std::size_t t = 0; t < run.frames.size(); ++t) {
      s.configs.push_back(run.frames[t]);
      s.run_of.push_back(r);
      s.frame_index.push_back(run.frame_index[t]);
    }
  }
  return s;
}

namespace {

PnssOptions pnss_options(const PipelineConfig& config) {
  PnssOptions opt;
  if (config.p > 0) opt.p = config.p;
  opt.variance_threshold = config.variance_threshold;
  opt.gpa.max_iterations = config.gpa_max_iterations;
  opt.gpa.relative_tolerance = config.gpa_tolerance;
  opt.gpa.threads = config.threads;
  opt.pns.threads = config.threads;
  opt.pns.subsphere.restarts = config.pns_restarts;
  opt.pns.subsphere.seed = config.seed;
  return opt;
}

}  // namespace

PNSSModel fit_model(const std::vector<Configuration>& configs, const PipelineConfig& config) {
  return fit_pnss(configs, pnss_options(config));
}

StateClustering cluster_states(const PNSSModel& model, const PipelineConfig& config) {
  StateClustering out;
  {
    const DistanceMatrix d = great_circle_distance_matrix(model.embedded, config.threads);
    out.sphere_tree = ward_linkage(d, config.linkage);
  }
  out.sphere_labels = cut_tree(out.sphere_tree, config.k_states);
  const Eigen::Index cols =
      std::min<Eigen::Index>(static_cast<Eigen::Index>(config.pc_cluster_components), model.pca.centered_scores.cols());
  {
    const DistanceMatrix d = euclidean_distance_matrix(model.pca.centered_scores.leftCols(cols), config.threads);
    out.pc_tree = ward_linkage(d, config.linkage);
  }
  out.pc_labels = cut_tree(out.pc_tree, config.k_states);
  return out;
}

TransitionAnalysis analyze_transitions(const std::vector<std::string>& run_ids, const std::vector<int>& labels,
                                       std::size_t frames_per_run, const PipelineConfig& config) {
  if (labels.size() != run_ids.size() * frames_per_run)
    throw DimensionError("label count " + std::to_string(labels.size()) + " does not match " +
                         std::to_string(run_ids.size()) + " runs of " + std::to_string(frames_per_run) + " frames");
  TransitionAnalysis a;
  const int k = static_cast<int>(config.k_states);
  for (std::size_t r = 0; r < run_ids.size(); ++r) {
    const auto first = labels.begin() + static_cast<std::ptrdiff_t>(r * frames_per_run);
    a.sequences.emplace_back(run_ids[r], std::vector<int>(first, first + static_cast<std::ptrdiff_t>(frames_per_run)), k);
    a.per_run.push_back(estimate_transition_matrix(a.sequences.back()));
  }
  a.overall_counts = pool_transition_matrix(a.sequences, PoolingMode::Counts);
  a.overall_average = pool_transition_matrix(a.sequences, PoolingMode::Average);
  a.overall = config.pooling == PoolingMode::Counts ? a.overall_counts : a.overall_average;
  try {
    a.overall_equilibrium = equilibrium(a.overall);
  } catch (const NoUniqueEquilibriumError&) {
    a.overall_equilibrium.reset();
  }
  a.temporal = temporal_cluster(a.per_run, config.k_tc, config.linkage);
  a.final_location = final_location_probabilities(a.sequences, a.temporal.labels);
  return a;
}

namespace artifacts {

void write_config(const std::filesystem::path& dir, const PipelineConfig& config) {
  std::ofstream out(dir / "config_used.txt", std::ios::binary);
  if (!out) throw IoError("cannot write " + (dir / "config_used.txt").string());
  // Output location and worker count do not influence results.
  for (const auto& [key, value] : config_settings(config))
    if (key != "out" && key != "threads") out << key << " = " << value << '\n';
}

void write_gpa(const std::filesystem::path& dir, const StackedFrames& frames, const GPAResult& g) {
  {
    CsvWriter w(dir / "gpa_fits.csv", {"run_id", "frame_index", "procrustes_distance", "unique"});
    for (std::size_t i = 0; i < g.fits.size(); ++i) {
      w << frames.run_ids[frames.run_of[i]] << frames.frame_index[i] << g.fits[i].distance
        << static_cast<long long>(g.fits[i].unique);
      w.end_row();
    }
  }
  {
    CsvWriter w(dir / "gpa_trace.csv", {"iteration", "objective"});
    for (std::size_t i = 0; i < g.objective_trace.size(); ++i) {
      w << (i + 1) << g.objective_trace[i];
      w.end_row();
    }
  }
  const Matrix mean = from_preshape(g.mean).points();
  CsvWriter w(dir / "procrustes_mean.csv", concat({"landmark"}, coord_names(mean.cols())));
  write_shape_rows(w, mean, [](CsvWriter&) {});
}

void write_pca(const std::filesystem::path& dir, const StackedFrames& frames, const ShapePCAModel& pca) {
  const auto pct = explained_variance(pca);
  const auto cum = cumulative_variance(pca);
  {
    CsvWriter w(dir / "variance_pca.csv", {"component", "eigenvalue", "percent", "cumulative_percent"});
    for (std::size_t j = 0; j < pca.components(); ++j) {
      w << (j + 1) << pca.eigenvalues[j] << pct[j] << cum[j];
      w.end_row();
    }
  }
  CsvWriter w(dir / "pc_scores.csv", with_prefix({"run_id", "frame_index"}, "PC", pca.components()));
  for (Eigen::Index i = 0; i < pca.centered_scores.rows(); ++i) {
    const auto row = static_cast<std::size_t>(i);
    w << frames.run_ids[frames.run_of[row]] << frames.frame_index[row];
    for (Eigen::Index j = 0; j < pca.centered_scores.cols(); ++j) w << pca.centered_scores(i, j);
    w.end_row();
  }
}

void write_pnss(const std::filesystem::path& dir, const StackedFrames& frames, const PNSSModel& model) {
  save_model(dir / "model.json", model);
  const Matrix& sc = model.scores();
  {
    CsvWriter w(dir / "scores.csv", with_prefix({"run_id", "frame_index"}, "PNSS", static_cast<std::size_t>(sc.rows())));
    for (Eigen::Index i = 0; i < sc.cols(); ++i) {
      const auto col = static_cast<std::size_t>(i);
      w << frames.run_ids[frames.run_of[col]] << frames.frame_index[col];
      for (Eigen::Index j = 0; j < sc.rows(); ++j) w << sc(j, i);
      w.end_row();
    }
  }
  const auto pct = variance_by_component(model.pns);
  CsvWriter w(dir / "variance_pnss.csv", {"component", "percent", "cumulative_percent", "sd"});
  double cum = 0.0;
  for (std::size_t j = 0; j < pct.size(); ++j) {
    cum += pct[j];
    w << (j + 1) << pct[j] << cum << component_sd(model, static_cast<Eigen::Index>(j + 1));
    w.end_row();
  }
}

void write_distance_histogram(const std::filesystem::path& dir, const TrajectoryDataset& data) {
  CsvWriter w(dir / "distance_histogram.csv", {"time", "frame_index", "run_a", "run_b", "distance"});
  const std::size_t f = data.frame_count;
  if (f == 0) return;
  std::set<std::size_t> times = {0, std::min<std::size_t>(1, f - 1), f >= 2 ? f - 2 : 0, f - 1};
  for (std::size_t t : times) {
    for (std::size_t a = 0; a < data.runs.size(); ++a)
      for (std::size_t b = a + 1; b < data.runs.size(); ++b) {
        w << (t + 1) << data.runs[a].frame_index[t] << data.runs[a].run_id << data.runs[b].run_id
          << riemannian_shape_distance(data.runs[a].frames[t], data.runs[b].frames[t]);
        w.end_row();
      }
  }
}

void write_clusters(const std::filesystem::path& dir, const StackedFrames& frames, const StateClustering& c) {
  {
    CsvWriter w(dir / "clusters.csv", {"run_id", "frame_index", "sphere_cluster", "pc_cluster"});
    for (std::size_t i = 0; i < c.sphere_labels.size(); ++i) {
      w << frames.run_ids[frames.run_of[i]] << frames.frame_index[i] << c.sphere_labels[i] << c.pc_labels[i];
      w.end_row();
    }
  }
  write_dendrogram(dir / "dendrogram_sphere.csv", c.sphere_tree);
  write_dendrogram(dir / "dendrogram_pc.csv", c.pc_tree);
}

void write_arcs(const std::filesystem::path& dir, const PNSSModel& model, const PipelineConfig& config) {
  const Eigen::Index m = model.pca.mean.cols();
  {
    CsvWriter w(dir / "arcs.csv", concat({"component", "sample", "offset", "landmark"}, coord_names(m)));
    const auto count = std::min<Eigen::Index>(static_cast<Eigen::Index>(config.arc_components), model.p);
    for (Eigen::Index j = 1; j <= count; ++j) {
      const PrincipalArc arc = principal_arc(model, j, config.c, config.arc_samples);
      for (std::size_t s = 0; s < arc.offsets.size(); ++s)
        write_shape_rows(w, arc.configurations[s].points(),
                         [&](CsvWriter& row) { row << static_cast<long long>(j) << (s + 1) << arc.offsets[s]; });
    }
  }
  CsvWriter w(dir / "mean_shapes.csv", concat({"kind", "landmark"}, coord_names(m)));
  write_shape_rows(w, procrustes_mean_points(model), [](CsvWriter& row) { row << std::string("procrustes"); });
  write_shape_rows(w, aligned_pnss_mean_points(model), [](CsvWriter& row) { row << std::string("pnss"); });
}

void write_cluster_models(const std::filesystem::path& dir, const PNSSModel& global,
                          const std::vector<ClusterModel>& models, const PipelineConfig& config) {
  const Eigen::Index m = global.pca.mean.cols();
  CsvWriter summary(dir / "cluster_models.csv", {"cluster", "size", "status", "p", "pnss1_sd", "note"});
  CsvWriter arcs(dir / "cluster_arcs.csv", concat({"cluster", "sample", "offset", "landmark"}, coord_names(m)));
  CsvWriter means(dir / "cluster_mean_shapes.csv", concat({"cluster", "kind", "landmark"}, coord_names(m)));
  for (const auto& cm : models) {
    summary << cm.cluster << cm.size << std::string(cm.model ? "fitted" : "skipped")
            << static_cast<long long>(cm.model ? cm.model->p : 0)
            << (cm.model ? component_sd(*cm.model, 1) : 0.0) << cm.note;
    summary.end_row();
    if (!cm.model) continue;
    const PNSSModel& model = *cm.model;
    // Express the cluster's shapes in the frame of the overall mean.
    const Matrix r = opa_fit(model.pca.mean, global.pca.mean).rotation;
    const auto tag = [&](CsvWriter& row) { row << cm.cluster; };
    write_shape_rows(means, procrustes_mean_points(model) * r, [&](CsvWriter& row) {
      tag(row);
      row << std::string("procrustes");
    });
    write_shape_rows(means, aligned_pnss_mean_points(model) * r, [&](CsvWriter& row) {
      tag(row);
      row << std::string("pnss");
    });
    try {
      const PrincipalArc arc = principal_arc(model, 1, config.c, config.arc_samples);
      for (std::size_t s = 0; s < arc.offsets.size(); ++s)
        write_shape_rows(arcs, arc.configurations[s].points() * r, [&](CsvWriter& row) {
          tag(row);
          row << (s + 1) << arc.offsets[s];
        });
    } catch (const RangeError&) {
      // The arc would wrap past the circular cut point; the summary's sd column shows why.
    }
  }
}

void write_transitions(const std::filesystem::path& dir, const StackedFrames& frames, const TransitionAnalysis& a) {
  const int k = a.overall.states();
  {
    CsvWriter w(dir / "visit_history.csv", {"run_id", "step", "frame_index", "state"});
    std::size_t i = 0;
    for (const auto& seq : a.sequences)
      for (std::size_t t = 0; t < seq.labels.size(); ++t, ++i) {
        w << seq.run_id << (t + 1) << frames.frame_index[i] << seq.labels[t];
        w.end_row();
      }
  }
  {
    CsvWriter w(dir / "transitions.csv", {"scope", "from", "to", "count", "probability"});
    const auto emit = [&](const std::string& scope, const TransitionMatrix& t) {
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) {
          w << scope << (r + 1) << (c + 1) << t.counts(r, c) << t.probs(r, c);
          w.end_row();
        }
    };
    emit("overall", a.overall);
    for (std::size_t g = 0; g < a.temporal.pooled.size(); ++g) emit("TC" + std::to_string(g + 1), a.temporal.pooled[g]);
    for (std::size_t r = 0; r < a.per_run.size(); ++r) emit(a.sequences[r].run_id, a.per_run[r]);
  }
  {
    CsvWriter w(dir / "pooling_comparison.csv", {"from", "to", "counts", "average", "difference"});
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) {
        const double pc = a.overall_counts.probs(r, c), pa = a.overall_average.probs(r, c);
        w << (r + 1) << (c + 1) << pc << pa << (pc - pa);
        w.end_row();
      }
  }
  {
    std::ofstream out(dir / "transition_overall.txt", std::ios::binary);
    if (!out) throw IoError("cannot write transition_overall.txt");
    out << "from\\to";
    for (int c = 1; c <= k; ++c) out << "\tS" << c;
    out << '\n';
    for (int r = 0; r < k; ++r) {
      out << 'S' << (r + 1);
      for (int c = 0; c < k; ++c) out << '\t' << fixed4(a.overall.probs(r, c));
      out << '\n';
    }
  }
  {
    CsvWriter w(dir / "equilibrium.csv", with_prefix({"group"}, "S", static_cast<std::size_t>(k)));
    const auto emit = [&](const std::string& group, const std::optional<EquilibriumDistribution>& eq) {
      w << group;
      for (int s = 0; s < k; ++s) {
        if (eq) w << eq->probs[s];
        else w << std::string("NA");
      }
      w.end_row();
    };
    emit("overall", a.overall_equilibrium);
    for (std::size_t g = 0; g < a.temporal.equilibria.size(); ++g)
      emit("TC" + std::to_string(g + 1), a.temporal.equilibria[g]);
  }
  {
    CsvWriter w(dir / "temporal_clusters.csv", {"run_id", "temporal_cluster"});
    for (std::size_t r = 0; r < a.sequences.size(); ++r) {
      w << a.sequences[r].run_id << a.temporal.labels[r];
      w.end_row();
    }
  }
  write_dendrogram(dir / "dendrogram_temporal.csv", a.temporal.tree);
  CsvWriter w(dir / "final_location.csv", with_prefix({"temporal_cluster"}, "S", static_cast<std::size_t>(k)));
  for (Eigen::Index g = 0; g < a.final_location.rows(); ++g) {
    w << static_cast<long long>(g + 1);
    for (Eigen::Index s = 0; s < a.final_location.cols(); ++s) w << a.final_location(g, s);
    w.end_row();
  }
}

}  // namespace artifacts

PipelineResult run_pipeline(const TrajectoryDataset& data, const PipelineConfig& config) {
  const std::filesystem::path& dir = config.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PipelineError("setup", IoError("cannot create " + dir.string() + ": " + ec.message()));

  std::vector<std::string> stages;
  const auto write_status = [&](const std::string* failed, const std::string& message) {
    std::ofstream out(dir / "pipeline_status.txt", std::ios::binary);
    for (const auto& s : stages) out << s << " ok\n";
    if (failed) out << *failed << " failed: " << message << '\n';
    else out << "complete\n";
  };
  const auto stage = [&](const std::string& name, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      write_status(&name, e.what());
      throw PipelineError(name, e);
    }
    stages.push_back(name);
  };

  TrajectoryDataset thinned;
  StackedFrames frames;
  std::optional<GPAResult> g;
  std::optional<ShapePCAModel> pca;
  Eigen::Index p = 0;
  Matrix embedded;
  std::optional<PNSSModel> model;
  StateClustering clusters;
  std::vector<ClusterModel> cluster_models;
  TransitionAnalysis transitions;

  stage("validate", [&] {
    config.validate();
    data.validate();
    artifacts::write_config(dir, config);
  });
  stage("thin", [&] {
    const bool keep_all = config.thin_count == 0 || config.thin_count == data.frame_count;
    thinned = keep_all ? data : thin(data, config.thin_count);
    frames = stack_frames(thinned);
    artifacts::write_distance_histogram(dir, thinned);
  });
  const PnssOptions opt = pnss_options(config);
  stage("gpa", [&] {
    g = gpa(frames.configs, opt.gpa);
    artifacts::write_gpa(dir, frames, *g);
  });
  stage("pca", [&] {
    pca = fit_shape_pca(*g);
    artifacts::write_pca(dir, frames, *pca);
  });
  stage("embed", [&] {
    p = opt.p ? *opt.p : choose_components(*pca, opt.variance_threshold);
    check_pnss_components(p, thinned.k, thinned.m);
    if (static_cast<Eigen::Index>(frames.configs.size()) < p + 2)
      throw UnderdeterminedError("need at least p + 2 = " + std::to_string(p + 2) + " frames after thinning");
    embedded = embed_on_sphere(*g, *pca, p);
  });
  stage("pns", [&] {
    PNSModel pns = pns_decompose(embedded, opt.pns);
    model.emplace(PNSSModel{std::move(*g), std::move(*pca), p, std::move(embedded), std::move(pns)});
    artifacts::write_pnss(dir, frames, *model);
  });
  stage("cluster", [&] {
    clusters = cluster_states(*model, config);
    artifacts::write_clusters(dir, frames, clusters);
  });
  stage("arcs", [&] { artifacts::write_arcs(dir, *model, config); });
  stage("cluster_models", [&] {
    const std::size_t min_size = effective_min_cluster_size(config, p);
    PipelineConfig sub = config;
    sub.p = p;
    for (int c = 1; c <= static_cast<int>(config.k_states); ++c) {
      std::vector<Configuration> members;
      for (std::size_t i = 0; i < clusters.sphere_labels.size(); ++i)
        if (clusters.sphere_labels[i] == c) members.push_back(frames.configs[i]);
      ClusterModel cm;
      cm.cluster = c;
      cm.size = members.size();
      if (members.size() < min_size) {
        cm.note = "fewer than " + std::to_string(min_size) + " members";
      } else {
        try {
          cm.model = fit_model(members, sub);
        } catch (const Error& e) {
          cm.note = e.what();
        }
      }
      cluster_models.push_back(std::move(cm));
    }
    artifacts::write_cluster_models(dir, *model, cluster_models, config);
  });
  stage("transitions", [&] {
    transitions = analyze_transitions(frames.run_ids, clusters.states(config.states_from), frames.frames_per_run, config);
    artifacts::write_transitions(dir, frames, transitions);
  });
  write_status(nullptr, "");

  return PipelineResult{std::move(thinned), std::move(frames),         std::move(*model), std::move(clusters),
                        std::move(cluster_models), std::move(transitions), std::move(stages)};
}

std::vector<std::filesystem::path> trajectory_files(const std::filesystem::path& path) {
  std::error_code ec;
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path, ec)) {
    for (const auto& entry : std::filesystem::directory_iterator(path, ec))
      if (entry.is_regular_file() && entry.path().extension() == ".traj") files.push_back(entry.path());
    if (ec) throw IoError("cannot list " + path.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IngestError("no .traj files in " + path.string());
  } else if (std::filesystem::is_regular_file(path, ec)) {
    files.push_back(path);
  } else {
    throw IngestError("no such file or directory: " + path.string());
  }
  return files;
}

std::size_t score_stream(const PNSSModel& model, const std::vector<std::filesystem::path>& files,
                         const std::filesystem::path& out_csv, std::size_t chunk, unsigned threads) {
  if (chunk == 0) throw RangeError("score chunk size must be positive");
  const Eigen::Index k = model.pca.mean.rows() + 1;
  const Eigen::Index m = model.pca.mean.cols();
  CsvWriter w(out_csv, with_prefix({"run_id", "frame_index"}, "PNSS", static_cast<std::size_t>(model.p)));
  std::size_t total = 0;
  std::vector<Configuration> buffer;
  std::vector<Vector> scored;
  for (const auto& file : files) {
    TrajectoryStream in(file);
    if (in.landmarks() != k || in.dims() != m)
      throw IngestError(file.string() + ": k=" + std::to_string(in.landmarks()) + ", m=" + std::to_string(in.dims()) +
                        " does not match the model (k=" + std::to_string(k) + ", m=" + std::to_string(m) + ")");
    const std::string run_id = file.stem().string();
    std::size_t frame = 0;
    while (true) {
      buffer.clear();
      while (buffer.size() < chunk) {
        auto next = in.next();
        if (!next) break;
        buffer.push_back(std::move(*next));
      }
      if (buffer.empty()) break;
      scored.assign(buffer.size(), Vector());
      parallel_for(buffer.size(), threads, [&](std::size_t i) { scored[i] = pnss_project(model, buffer[i]); });
      for (const auto& v : scored) {
        w << run_id << ++frame;
        for (Eigen::Index j = 0; j < v.size(); ++j) w << v[j];
        w.end_row();
      }
      total += buffer.size();
    }
  }
  return total;
}

}  // namespace pnss
