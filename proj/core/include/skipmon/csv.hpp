#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace skipmon {

using CsvField = std::variant<std::string, double, long long>;

/// Formats a double with round-trip precision; identical inputs give
/// identical text, which the byte-for-byte determinism checks rely on.
std::string format_number(double x);

/// Minimal RFC-4180 writer. Throws Error(Io) when the file cannot be opened
/// or written.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<CsvField>& fields);
  void close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t width_;
};

/// Parses a CSV file produced by CsvWriter (no embedded newlines).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace skipmon
