#include "pnss/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pnss/csv.hpp"
#include "pnss/error.hpp"

namespace pnss {

namespace {

struct ParseFailure {
  std::string where;
  std::string what;
};

bool is_blank_or_comment(const std::string& line) {
  for (char ch : line) {
    if (ch == '#') return true;
    if (ch != ' ' && ch != '\t' && ch != '\r') return false;
  }
  return true;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r'; });
}

// Parses the "k m frames" header; returns false with a message on failure.
bool parse_header(const std::string& line, Eigen::Index& k, Eigen::Index& m, std::size_t& frames, std::string& err) {
  const auto f = split_fields(line, ' ');
  std::size_t kk = 0, mm = 0;
  if (f.size() != 3 || !parse_size(f[0], kk) || !parse_size(f[1], mm) || !parse_size(f[2], frames)) {
    err = "header must be 'k m frames'";
    return false;
  }
  if (mm < 2 || kk <= mm) {
    err = "header needs k > m >= 2";
    return false;
  }
  if (frames < 1) {
    err = "header declares no frames";
    return false;
  }
  k = static_cast<Eigen::Index>(kk);
  m = static_cast<Eigen::Index>(mm);
  return true;
}

bool parse_row(const std::string& line, Eigen::Index m, Matrix& x, Eigen::Index row, std::string& err) {
  const auto f = split_fields(line, ' ');
  if (static_cast<Eigen::Index>(f.size()) != m) {
    err = "expected " + std::to_string(m) + " coordinates, found " + std::to_string(f.size());
    return false;
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    double v = 0.0;
    if (!parse_double(f[static_cast<std::size_t>(j)], v) || !std::isfinite(v)) {
      err = "bad coordinate '" + std::string(f[static_cast<std::size_t>(j)]) + "'";
      return false;
    }
    x(row, j) = v;
  }
  return true;
}

Run read_run(const std::filesystem::path& path, std::vector<ParseFailure>& failures) {
  std::ifstream in(path);
  Run run;
  run.run_id = path.stem().string();
  if (!in) {
    failures.push_back({path.string(), "cannot open file"});
    return run;
  }
  auto fail = [&](std::size_t line_no, const std::string& what) {
    failures.push_back({path.string() + ":" + std::to_string(line_no), what});
  };

  std::string line;
  std::size_t line_no = 0;
  Eigen::Index k = 0, m = 0;
  std::size_t frames = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    std::string err;
    if (!parse_header(line, k, m, frames, err)) {
      fail(line_no, err);
      return run;
    }
    have_header = true;
  }
  if (!have_header) {
    failures.push_back({path.string(), "missing header"});
    return run;
  }

  Matrix x(k, m);
  Eigen::Index row = 0;
  std::size_t frame_start = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) {
      if (row != 0) {
        fail(line_no, "frame ended after " + std::to_string(row) + " of " + std::to_string(k) + " rows");
        return run;
      }
      continue;
    }
    if (is_blank_or_comment(line)) continue;
    if (row == 0) frame_start = line_no;
    if (run.frames.size() == frames) {
      fail(line_no, "more frames than the declared " + std::to_string(frames));
      return run;
    }
    std::string err;
    if (!parse_row(line, m, x, row, err)) {
      fail(line_no, err);
      return run;
    }
    if (++row == k) {
      if ((x.rowwise() - x.colwise().mean()).norm() < 1e-12) {
        fail(frame_start, "frame " + std::to_string(run.frames.size() + 1) + " has coincident landmarks");
        return run;
      }
      try {
        run.frames.emplace_back(x);
      } catch (const Error& e) {
        fail(frame_start, e.what());
        return run;
      }
      run.frame_index.push_back(run.frames.size());
      row = 0;
    }
  }
  if (row != 0) fail(line_no, "truncated frame");
  else if (run.frames.size() != frames)
    fail(line_no, "declared " + std::to_string(frames) + " frames, found " + std::to_string(run.frames.size()));
  return run;
}

[[noreturn]] void throw_failures(const std::vector<ParseFailure>& failures) {
  std::ostringstream msg;
  msg << failures.size() << " ingest error(s):";
  for (const auto& f : failures) msg << "\n  " << f.where << ": " << f.what;
  throw IngestError(msg.str());
}

}  // namespace

std::size_t TrajectoryDataset::total_frames() const {
  std::size_t total = 0;
  for (const auto& r : runs) total += r.frames.size();
  return total;
}

void TrajectoryDataset::validate() const {
  if (runs.empty()) throw IngestError("dataset has no runs");
  for (const auto& r : runs) {
    if (r.frames.size() != frame_count)
      throw IngestError("run '" + r.run_id + "' has " + std::to_string(r.frames.size()) + " frames, expected " +
                        std::to_string(frame_count));
    if (r.frame_index.size() != r.frames.size())
      throw IngestError("run '" + r.run_id + "' frame index length mismatch");
    for (std::size_t t = 0; t < r.frames.size(); ++t) {
      if (r.frames[t].landmarks() != k || r.frames[t].dims() != m)
        throw IngestError("run '" + r.run_id + "' frame " + std::to_string(t + 1) + " has a different k or m");
      if (t > 0 && r.frame_index[t] <= r.frame_index[t - 1])
        throw IngestError("run '" + r.run_id + "' frames are not in time order");
    }
  }
}

Run read_trajectory_file(const std::filesystem::path& path) {
  std::vector<ParseFailure> failures;
  Run run = read_run(path, failures);
  if (!failures.empty()) throw_failures(failures);
  return run;
}

void write_trajectory_file(const std::filesystem::path& path, const Run& run) {
  if (run.frames.empty()) throw DomainError("run '" + run.run_id + "' has no frames");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const Eigen::Index k = run.frames.front().landmarks();
  const Eigen::Index m = run.frames.front().dims();
  out << k << ' ' << m << ' ' << run.frames.size() << '\n';
  for (const auto& frame : run.frames) {
    out << '\n';
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        if (j) out << ' ';
        out << format_double(frame.points()(i, j));
      }
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

TrajectoryDataset ingest(const std::filesystem::path& path) {
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

  std::vector<ParseFailure> failures;
  TrajectoryDataset data;
  for (const auto& f : files) {
    const std::size_t before = failures.size();
    Run run = read_run(f, failures);
    if (failures.size() == before) data.runs.push_back(std::move(run));
  }
  if (!data.runs.empty()) {
    data.k = data.runs.front().frames.front().landmarks();
    data.m = data.runs.front().frames.front().dims();
    data.frame_count = data.runs.front().frames.size();
    for (const auto& r : data.runs) {
      if (r.frames.front().landmarks() != data.k || r.frames.front().dims() != data.m)
        failures.push_back({r.run_id, "k or m differs from run '" + data.runs.front().run_id + "'"});
      else if (r.frames.size() != data.frame_count)
        failures.push_back({r.run_id, "frame count differs from run '" + data.runs.front().run_id + "'"});
    }
  }
  if (!failures.empty()) throw_failures(failures);
  data.validate();
  return data;
}

void write_dataset(const std::filesystem::path& dir, const TrajectoryDataset& data) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& r : data.runs) write_trajectory_file(dir / (r.run_id + ".traj"), r);
}

std::vector<std::size_t> thin_indices(std::size_t frame_count, std::size_t count) {
  if (count < 2 || count > frame_count)
    throw RangeError("thin count must lie in [2, " + std::to_string(frame_count) + "], got " + std::to_string(count));
  // Integer round-half-up of (i-1)(F-1)/(C-1) avoids floating-point drift.
  const std::size_t span = frame_count - 1;
  const std::size_t steps = count - 1;
  std::vector<std::size_t> idx(count);
  for (std::size_t i = 0; i < count; ++i) idx[i] = 1 + (2 * i * span + steps) / (2 * steps);
  return idx;
}

TrajectoryDataset thin(const TrajectoryDataset& data, std::size_t count) {
  const auto idx = thin_indices(data.frame_count, count);
  TrajectoryDataset out;
  out.k = data.k;
  out.m = data.m;
  out.frame_count = count;
  out.runs.reserve(data.runs.size());
  for (const auto& r : data.runs) {
    Run t;
    t.run_id = r.run_id;
    for (std::size_t i : idx) {
      t.frames.push_back(r.frames[i - 1]);
      t.frame_index.push_back(r.frame_index[i - 1]);
    }
    out.runs.push_back(std::move(t));
  }
  return out;
}

TrajectoryStream::TrajectoryStream(const std::filesystem::path& path) : path_(path), in_(path) {
  if (!in_) throw IoError("cannot open " + path.string());
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (is_blank_or_comment(line)) continue;
    std::string err;
    if (!parse_header(line, k_, m_, frames_, err))
      throw IngestError(path_.string() + ":" + std::to_string(line_no_) + ": " + err);
    return;
  }
  throw IngestError(path_.string() + ": missing header");
}

bool TrajectoryStream::next_data_line(std::string& line) {
  while (std::getline(in_, line)) {
    ++line_no_;
    if (!is_blank_or_comment(line)) return true;
  }
  return false;
}

std::optional<Configuration> TrajectoryStream::next() {
  if (read_ == frames_) return std::nullopt;
  Matrix x(k_, m_);
  std::string line;
  for (Eigen::Index row = 0; row < k_; ++row) {
    if (!next_data_line(line))
      throw IngestError(path_.string() + ":" + std::to_string(line_no_) + ": truncated frame " +
                        std::to_string(read_ + 1));
    std::string err;
    if (!parse_row(line, m_, x, row, err))
      throw IngestError(path_.string() + ":" + std::to_string(line_no_) + ": " + err);
  }
  ++read_;
  return Configuration(std::move(x));
}

}  // namespace pnss
