#pragma once

#include <filesystem>
#include <string>

#include "zygmund/experiments.hpp"

namespace zyg {

enum class ReportFormat { Csv, Json };
ReportFormat parse_format(const std::string& s);

// RFC 4180 table with a header row; an empty table is the header alone.
std::string render_csv(const ResultTable& t);
// Pretty-printed JSON with sorted keys and a trailing newline.
std::string render_json(const ExperimentResult& r);

// Writes dir/<experiment>.csv or .json and returns the path. I/O errors propagate as
// std::filesystem::filesystem_error or std::system_error with the system message.
std::filesystem::path emit_report(const ExperimentResult& r, ReportFormat format, const std::filesystem::path& dir);
// Writes one file; the format follows the extension, .csv or .json.
void write_report(const ExperimentResult& r, const std::filesystem::path& file);

}  // namespace zyg
