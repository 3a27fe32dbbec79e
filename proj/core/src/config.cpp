#include "pnss/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>

#include "pnss/csv.hpp"
#include "pnss/error.hpp"

namespace pnss {

Matrix GeneratorSpec::transition_matrix() const {
  if (switch_matrix.size() > 0) return switch_matrix;
  const auto k = static_cast<Eigen::Index>(states);
  if (k == 1) return Matrix::Ones(1, 1);
  Matrix p = Matrix::Constant(k, k, (1.0 - stay_probability) / static_cast<double>(k - 1));
  p.diagonal().setConstant(stay_probability);
  return p;
}

void GeneratorSpec::validate() const {
  if (m < 2 || k <= m) throw ConfigError("synth: need k > m >= 2");
  if (runs < 1 || frames < 1 || states < 1) throw ConfigError("synth: runs, frames and states must be positive");
  if (!(stay_probability >= 0.0 && stay_probability <= 1.0))
    throw ConfigError("synth: stay_probability must lie in [0, 1]");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("synth: noise must be non-negative");
  if (!(template_spread >= 0.0) || !std::isfinite(template_spread))
    throw ConfigError("synth: template_spread must be non-negative");
  if (switch_matrix.size() > 0) {
    const auto s = static_cast<Eigen::Index>(states);
    if (switch_matrix.rows() != s || switch_matrix.cols() != s)
      throw ConfigError("synth: switch matrix must be states x states");
    for (Eigen::Index i = 0; i < s; ++i) {
      if ((switch_matrix.row(i).array() < 0.0).any())
        throw ConfigError("synth: switch matrix entries must be non-negative");
      if (std::abs(switch_matrix.row(i).sum() - 1.0) > 1e-9)
        throw ConfigError("synth: switch matrix row " + std::to_string(i + 1) + " must sum to 1");
    }
  }
}

void PipelineConfig::validate() const {
  if (thin_count == 1) throw ConfigError("thin_count must be 0 (no thinning) or at least 2");
  if (p < 0) throw ConfigError("p must be non-negative");
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
    throw ConfigError("variance_threshold must lie in (0, 1]");
  if (k_states < 1 || k_tc < 1) throw ConfigError("k_states and k_tc must be positive");
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("c must be positive");
  if (arc_samples < 3 || arc_samples % 2 == 0) throw ConfigError("arc_samples must be odd and at least 3");
  if (threads < 1) throw ConfigError("threads must be positive");
  if (pc_cluster_components < 1) throw ConfigError("pc_cluster_components must be positive");
  if (gpa_max_iterations < 1) throw ConfigError("gpa_max_iterations must be positive");
  if (!(gpa_tolerance > 0.0)) throw ConfigError("gpa_tolerance must be positive");
  if (pns_restarts < 0) throw ConfigError("pns_restarts must be non-negative");
  if (score_chunk < 1) throw ConfigError("score_chunk must be positive");
  synth.validate();
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  if (!parse_size(v, out)) bad_value(key, v, "a non-negative integer");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!parse_double(v, out) || !std::isfinite(out)) bad_value(key, v, "a number");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) bad_value(key, v, "an unsigned 64-bit integer");
  return out;
}

Matrix to_square_matrix(const std::string& key, const std::string& v) {
  std::vector<double> vals;
  for (auto f : split_fields(v, ',')) vals.push_back(to_double(key, trim(f)));
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(vals.size()))));
  if (n < 1 || static_cast<std::size_t>(n * n) != vals.size()) bad_value(key, v, "n*n comma-separated numbers");
  Matrix p(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) p(i, j) = vals[static_cast<std::size_t>(i * n + j)];
  return p;
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"thin_count", [](auto& c, auto& k, auto& v) { c.thin_count = to_size(k, v); }},
      {"p", [](auto& c, auto& k, auto& v) { c.p = static_cast<Eigen::Index>(to_size(k, v)); }},
      {"variance_threshold", [](auto& c, auto& k, auto& v) { c.variance_threshold = to_double(k, v); }},
      {"k_states", [](auto& c, auto& k, auto& v) { c.k_states = to_size(k, v); }},
      {"k_tc", [](auto& c, auto& k, auto& v) { c.k_tc = to_size(k, v); }},
      {"c", [](auto& c, auto& k, auto& v) { c.c = to_double(k, v); }},
      {"arc_samples", [](auto& c, auto& k, auto& v) { c.arc_samples = static_cast<int>(to_size(k, v)); }},
      {"arc_components", [](auto& c, auto& k, auto& v) { c.arc_components = to_size(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_u64(k, v); }},
      {"threads", [](auto& c, auto& k, auto& v) { c.threads = static_cast<unsigned>(to_size(k, v)); }},
      {"out", [](auto& c, auto&, auto& v) { c.out = v; }},
      {"linkage",
       [](auto& c, auto& k, auto& v) {
         if (v == "ward.D") c.linkage = WardVariant::WardD;
         else if (v == "ward.D2") c.linkage = WardVariant::WardD2;
         else bad_value(k, v, "ward.D or ward.D2");
       }},
      {"pooling",
       [](auto& c, auto& k, auto& v) {
         if (v == "counts") c.pooling = PoolingMode::Counts;
         else if (v == "average") c.pooling = PoolingMode::Average;
         else bad_value(k, v, "counts or average");
       }},
      {"states_from",
       [](auto& c, auto& k, auto& v) {
         if (v == "sphere") c.states_from = StateSpace::Sphere;
         else if (v == "pc") c.states_from = StateSpace::PcScores;
         else bad_value(k, v, "sphere or pc");
       }},
      {"pc_cluster_components", [](auto& c, auto& k, auto& v) { c.pc_cluster_components = to_size(k, v); }},
      {"gpa_max_iterations", [](auto& c, auto& k, auto& v) { c.gpa_max_iterations = static_cast<int>(to_size(k, v)); }},
      {"gpa_tolerance", [](auto& c, auto& k, auto& v) { c.gpa_tolerance = to_double(k, v); }},
      {"pns_restarts", [](auto& c, auto& k, auto& v) { c.pns_restarts = static_cast<int>(to_size(k, v)); }},
      {"min_cluster_size", [](auto& c, auto& k, auto& v) { c.min_cluster_size = to_size(k, v); }},
      {"score_chunk", [](auto& c, auto& k, auto& v) { c.score_chunk = to_size(k, v); }},
      {"synth.k", [](auto& c, auto& k, auto& v) { c.synth.k = static_cast<Eigen::Index>(to_size(k, v)); }},
      {"synth.m", [](auto& c, auto& k, auto& v) { c.synth.m = static_cast<Eigen::Index>(to_size(k, v)); }},
      {"synth.runs", [](auto& c, auto& k, auto& v) { c.synth.runs = to_size(k, v); }},
      {"synth.frames", [](auto& c, auto& k, auto& v) { c.synth.frames = to_size(k, v); }},
      {"synth.states", [](auto& c, auto& k, auto& v) { c.synth.states = to_size(k, v); }},
      {"synth.stay_probability", [](auto& c, auto& k, auto& v) { c.synth.stay_probability = to_double(k, v); }},
      {"synth.switch_matrix", [](auto& c, auto& k, auto& v) { c.synth.switch_matrix = to_square_matrix(k, v); }},
      {"synth.noise", [](auto& c, auto& k, auto& v) { c.synth.noise = to_double(k, v); }},
      {"synth.template_spread", [](auto& c, auto& k, auto& v) { c.synth.template_spread = to_double(k, v); }},
      {"synth.seed", [](auto& c, auto& k, auto& v) { c.synth.seed = to_u64(k, v); }},
  };
  return table;
}

}  // namespace

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(config, key, value);
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    try {
      apply_setting(base, trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

std::map<std::string, std::string> config_settings(const PipelineConfig& c) {
  std::map<std::string, std::string> s;
  s["thin_count"] = std::to_string(c.thin_count);
  s["p"] = std::to_string(c.p);
  s["variance_threshold"] = format_double(c.variance_threshold);
  s["k_states"] = std::to_string(c.k_states);
  s["k_tc"] = std::to_string(c.k_tc);
  s["c"] = format_double(c.c);
  s["arc_samples"] = std::to_string(c.arc_samples);
  s["arc_components"] = std::to_string(c.arc_components);
  s["seed"] = std::to_string(c.seed);
  s["threads"] = std::to_string(c.threads);
  s["out"] = c.out.string();
  s["linkage"] = c.linkage == WardVariant::WardD ? "ward.D" : "ward.D2";
  s["pooling"] = c.pooling == PoolingMode::Counts ? "counts" : "average";
  s["states_from"] = c.states_from == StateSpace::Sphere ? "sphere" : "pc";
  s["pc_cluster_components"] = std::to_string(c.pc_cluster_components);
  s["gpa_max_iterations"] = std::to_string(c.gpa_max_iterations);
  s["gpa_tolerance"] = format_double(c.gpa_tolerance);
  s["pns_restarts"] = std::to_string(c.pns_restarts);
  s["min_cluster_size"] = std::to_string(c.min_cluster_size);
  s["score_chunk"] = std::to_string(c.score_chunk);
  s["synth.k"] = std::to_string(c.synth.k);
  s["synth.m"] = std::to_string(c.synth.m);
  s["synth.runs"] = std::to_string(c.synth.runs);
  s["synth.frames"] = std::to_string(c.synth.frames);
  s["synth.states"] = std::to_string(c.synth.states);
  s["synth.stay_probability"] = format_double(c.synth.stay_probability);
  if (c.synth.switch_matrix.size() > 0) {
    std::string v;
    for (Eigen::Index i = 0; i < c.synth.switch_matrix.rows(); ++i)
      for (Eigen::Index j = 0; j < c.synth.switch_matrix.cols(); ++j)
        v += (v.empty() ? "" : ",") + format_double(c.synth.switch_matrix(i, j));
    s["synth.switch_matrix"] = v;
  }
  s["synth.noise"] = format_double(c.synth.noise);
  s["synth.template_spread"] = format_double(c.synth.template_spread);
  s["synth.seed"] = std::to_string(c.synth.seed);
  return s;
}

}  // namespace pnss
