#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace pnss {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Locale-independent parse of a decimal in standard or scientific notation.
/// Returns false unless the whole field is consumed.
bool parse_double(std::string_view text, double& out);
bool parse_size(std::string_view text, std::size_t& out);

std::vector<std::string_view> split_fields(std::string_view line, char sep);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& operator<<(const std::string& field);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(long long v);
  CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
  CsvWriter& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
  void end_row();

 private:
  void sep();
  std::ofstream out_;
  bool row_started_ = false;
};

}  // namespace pnss
