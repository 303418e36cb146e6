#pragma once

// Small CSV layer for the pipeline's tabular files. Quoting follows RFC 4180;
// parse errors carry 1-based line numbers for diagnostics.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "roadpheno/util.hpp"

namespace roadpheno::csv {

inline std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += escape(fields[i]);
  }
  out += '\n';
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::filesystem::path source;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw input_error("missing column '" + name + "' in " + source.string());
  }

  // 1-based file line of a data row (header is line 1)
  static std::size_t line_of(std::size_t row_index) { return row_index + 2; }
};

inline std::vector<std::string> parse_line(const std::string& line,
                                           std::size_t line_no,
                                           const std::string& where) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty())
        throw input_error(strprintf("%s line %zu: stray quote", where.c_str(),
                                    line_no));
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
    ++i;
  }
  if (quoted)
    throw input_error(strprintf("%s line %zu: unterminated quote",
                                where.c_str(), line_no));
  fields.push_back(cur);
  return fields;
}

inline Table read_table(const std::filesystem::path& path) {
  std::string text = read_file(path);
  Table t;
  t.source = path;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto fields = parse_line(line, line_no, path.string());
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size())
        throw input_error(strprintf(
            "%s line %zu: expected %zu fields, got %zu", path.string().c_str(),
            line_no, t.header.size(), fields.size()));
      t.rows.push_back(std::move(fields));
    }
  }
  if (t.header.empty())
    throw input_error("empty CSV file: " + path.string());
  return t;
}

class Writer {
 public:
  explicit Writer(std::vector<std::string> header) {
    buf_ += join_row(header);
  }
  void row(const std::vector<std::string>& fields) { buf_ += join_row(fields); }
  const std::string& str() const { return buf_; }
  void save(const std::filesystem::path& path) const {
    write_file_atomic(path, buf_);
  }

 private:
  std::string buf_;
};

}  // namespace roadpheno::csv
