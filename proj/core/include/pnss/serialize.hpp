#pragma once

#include <filesystem>
#include <string>

#include "pnss/pnss.hpp"

namespace pnss {

inline constexpr int kModelFormatVersion = 1;

/// JSON text with top-level `format_version`, `gpa`, `pca`, `pns`, `pnss`.
/// Matrices are objects {"shape": [rows, cols], "data": [row-major values]}.
std::string model_to_json(const PNSSModel& model);

/// Model sufficient for projection and reconstruction. Per-observation data
/// (fits, scores) is not stored and comes back empty.
PNSSModel model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const PNSSModel& model);
PNSSModel load_model(const std::filesystem::path& path);

}  // namespace pnss
