#include "zygmund/report.hpp"

#include <cerrno>
#include <fstream>
#include <system_error>

namespace zyg {

ReportFormat parse_format(const std::string& s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw ConfigError("unknown report format '" + s + "'");
}

namespace {

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return field(v.get<std::string>());
  return field(v.dump());
}

}  // namespace

std::string render_csv(const ResultTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + field(t.columns[i]);
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + (i < row.size() ? cell(row[i]) : "");
    out += "\r\n";
  }
  return out;
}

std::string render_json(const ExperimentResult& r) { return r.to_json().dump(2) + "\n"; }

void write_report(const ExperimentResult& r, const std::filesystem::path& file) {
  const auto ext = file.extension().string();
  if (ext != ".csv" && ext != ".json") throw ConfigError("report file '" + file.string() + "' needs a .csv or .json extension");
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  const std::string text = ext == ".csv" ? render_csv(r.table) : render_json(r);
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot open '" + file.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw std::system_error(errno, std::generic_category(), "cannot write '" + file.string() + "'");
}

std::filesystem::path emit_report(const ExperimentResult& r, ReportFormat format, const std::filesystem::path& dir) {
  const auto path = dir / (r.experiment + (format == ReportFormat::Csv ? ".csv" : ".json"));
  write_report(r, path);
  return path;
}

}  // namespace zyg
