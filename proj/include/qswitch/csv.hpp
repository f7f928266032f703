#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace qswitch::csv {

/// Shortest-ish deterministic double formatting; stable across reruns.
inline std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

/// RFC 4180 quoting: fields containing commas, quotes or newlines are
/// wrapped in double quotes with embedded quotes doubled.
inline std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << quote(fields[i]);
    }
    out_ << '\n';
  }

 private:
  std::ostream& out_;
};

/// Joins per-link values with ';' into one CSV field.
inline std::string join_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace qswitch::csv
