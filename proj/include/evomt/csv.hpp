#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <vector>

#include "evomt/errors.hpp"

namespace evomt {

// Shortest round-trip decimal form of a double (std::to_chars), so CSV values
// re-read bit-exactly and files are byte-stable across runs.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Minimal RFC 4180 writer: CRLF line endings, quoting only where required.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : path_(path), f_(std::fopen(path.c_str(), "wb")) {
    if (!f_) throw IoError("cannot open for writing: " + path);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;
  ~CsvWriter() {
    if (f_) std::fclose(f_);
  }

  void row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) line += ',';
      line += escape(fields[i]);
    }
    line += "\r\n";
    if (std::fwrite(line.data(), 1, line.size(), f_) != line.size())
      throw IoError("write failed: " + path_);
  }

  void close() {
    if (f_) {
      if (std::fclose(f_) != 0) throw IoError("close failed: " + path_);
      f_ = nullptr;
    }
  }

 private:
  static std::string escape(const std::string& field) {
    const bool needs_quote = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quote) return field;
    std::string out = "\"";
    for (char c : field) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
    return out;
  }

  std::string path_;
  std::FILE* f_;
};

// Tiny CSV reader for the project's own artifacts (no embedded newlines in
// quoted fields, which the writers above never produce for these tables).
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace evomt
