#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace causeway {

/// Library-wide error type; the CLI turns these into machine-readable JSON.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Minimal CSV support: comma-separated, optional double-quote quoting with
/// "" escapes, lines starting with '#' skipped. Enough for the data files
/// this project ships and emits.
std::vector<std::string> split_csv_line(const std::string& line);
std::string csv_escape(std::string_view field);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(std::string_view name) const;  // -1 if absent
  int require_column(std::string_view name, const std::string& context) const;
};
CsvTable read_csv(const std::filesystem::path& path, bool has_header = true);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// FNV-1a 64 digest of a file's bytes, as 16 hex chars.
std::string file_digest(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

/// Shortest round-trip decimal rendering of a double ("inf"/"nan" spelled
/// out); used everywhere a float reaches a report so bytes are reproducible.
std::string format_double(double v);

}  // namespace causeway
