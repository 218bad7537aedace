#include "skipmon/csv.hpp"

#include <fmt/format.h>

#include <cmath>
#include <sstream>

#include "skipmon/error.hpp"

namespace skipmon {

namespace {

std::string escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);  // shortest form that round-trips
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), width_(header.size()) {
  if (!out_) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
  std::vector<CsvField> fields(header.begin(), header.end());
  row(fields);
}

void CsvWriter::row(const std::vector<CsvField>& fields) {
  if (fields.size() != width_) {
    throw Error(Errc::InvalidArgument,
                fmt::format("{}: row has {} fields, header has {}", path_.string(), fields.size(),
                            width_));
  }
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    std::visit(
        [&line](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::string>) {
            line += escape(v);
          } else if constexpr (std::is_same_v<T, double>) {
            line += format_number(v);
          } else {
            line += std::to_string(v);
          }
        },
        fields[i]);
  }
  line += '\n';
  out_ << line;
  if (!out_) throw Error(Errc::Io, "write failed for " + path_.string());
}

void CsvWriter::close() {
  out_.close();
  if (out_.fail()) throw Error(Errc::Io, "close failed for " + path_.string());
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(Errc::InvalidArgument, fmt::format("missing CSV column '{}'", name));
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      t.header = split_line(line);
      first = false;
    } else if (!line.empty()) {
      t.rows.push_back(split_line(line));
    }
  }
  return t;
}

}  // namespace skipmon
