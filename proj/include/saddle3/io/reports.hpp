#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "saddle3/spectral.hpp"

namespace saddle3::io {

inline constexpr int kReportSchemaVersion = 1;

struct BenchRow {
  std::string problem;
  std::size_t size = 0;  // generator size parameter
  std::size_t order = 0;
  std::string recipe;
  std::string kind;
  std::size_t iterations = 0;
  bool converged = false;
  double final_residual = 0.0;
  double wall_time_ms = 0.0;
  std::string error;  // empty unless the cell failed before solving
};

struct BenchReport {
  nlohmann::json config;
  std::vector<BenchRow> rows;
};

// FNV-1a 64 of the canonical (sorted-key, compact) JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);
// Build facts only: no host names, clocks or paths.
nlohmann::json environment_stamp();

nlohmann::json to_json(const BenchReport& report);
// CSV columns: problem,size,order,recipe,kind,iterations,converged,final_residual,wall_time_ms,error
void write_report_csv(const BenchReport& report, std::ostream& out);
void write_report(const BenchReport& report, const std::filesystem::path& json_path,
                  const std::filesystem::path& csv_path);

// One row per eigenvalue under the header re,im,in_box.
void write_plotdata(const SpectrumCheck& check, std::ostream& out);
// Box corners under the header corner,re,im (counterclockwise from lower left).
void write_box_corners(const EigenBox& box, std::ostream& out);
// Writes <path> and <path stem>_box.csv next to it.
void write_plotdata(const SpectrumCheck& check, const std::filesystem::path& path);

}  // namespace saddle3::io
