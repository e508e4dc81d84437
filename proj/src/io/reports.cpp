#include "saddle3/io/reports.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

#include "saddle3/errors.hpp"

namespace saddle3::io {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

nlohmann::json environment_stamp() {
  nlohmann::json env;
#if defined(__clang__)
  env["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  env["compiler"] = "gcc " + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__) + "." +
                    std::to_string(__GNUC_PATCHLEVEL__);
#else
  env["compiler"] = "unknown";
#endif
  env["cxx_standard"] = static_cast<long>(__cplusplus);
#ifdef NDEBUG
  env["build"] = "release";
#else
  env["build"] = "debug";
#endif
  env["double_epsilon"] = std::numeric_limits<double>::epsilon();
  return env;
}

nlohmann::json to_json(const BenchReport& report) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = report.config;
  j["config_hash"] = config_hash(report.config);
  j["environment"] = environment_stamp();
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const BenchRow& r : report.rows) {
    nlohmann::json row;
    row["problem"] = r.problem;
    row["size"] = r.size;
    row["order"] = r.order;
    row["recipe"] = r.recipe;
    row["kind"] = r.kind;
    row["iterations"] = r.iterations;
    row["converged"] = r.converged;
    row["final_residual"] = r.final_residual;
    row["timing"] = {{"wall_time_ms", r.wall_time_ms}};
    if (!r.error.empty()) row["error"] = r.error;
    rows.push_back(std::move(row));
  }
  return j;
}

void write_report_csv(const BenchReport& report, std::ostream& out) {
  out << "problem,size,order,recipe,kind,iterations,converged,final_residual,wall_time_ms,error\n";
  for (const BenchRow& r : report.rows) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", r.wall_time_ms);
    out << csv_field(r.problem) << ',' << r.size << ',' << r.order << ',' << csv_field(r.recipe) << ','
        << csv_field(r.kind) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
        << fmt(r.final_residual) << ',' << ms << ',' << csv_field(r.error) << '\n';
  }
}

void write_report(const BenchReport& report, const fs::path& json_path, const fs::path& csv_path) {
  {
    auto out = open_out(json_path);
    out << to_json(report).dump(2) << '\n';
  }
  auto out = open_out(csv_path);
  write_report_csv(report, out);
}

void write_plotdata(const SpectrumCheck& check, std::ostream& out) {
  out << "re,im,in_box\n";
  for (const SpectrumPoint& p : check.points)
    out << fmt(p.value.real()) << ',' << fmt(p.value.imag()) << ',' << (p.in_box ? 1 : 0) << '\n';
}

void write_box_corners(const EigenBox& box, std::ostream& out) {
  out << "corner,re,im\n";
  out << "lower_left," << fmt(box.re_lo) << ',' << fmt(-box.im_abs) << '\n';
  out << "lower_right," << fmt(box.re_hi) << ',' << fmt(-box.im_abs) << '\n';
  out << "upper_right," << fmt(box.re_hi) << ',' << fmt(box.im_abs) << '\n';
  out << "upper_left," << fmt(box.re_lo) << ',' << fmt(box.im_abs) << '\n';
}

void write_plotdata(const SpectrumCheck& check, const fs::path& path) {
  {
    auto out = open_out(path);
    write_plotdata(check, out);
  }
  fs::path box_path = path.parent_path() / (path.stem().string() + "_box.csv");
  auto out = open_out(box_path);
  write_box_corners(check.box, out);
}

}  // namespace saddle3::io
