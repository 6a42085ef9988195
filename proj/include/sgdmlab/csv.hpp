#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace sgdmlab {

// Shortest decimal string that parses back to the same double. NaN is
// written as an empty field.
std::string format_double(double x);

// Parses a field written by format_double; empty fields give NaN.
double parse_double(std::string_view field);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);

  template <class... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    ((write_field(fields, first)), ...);
    out_ << '\n';
  }

  void row(const std::vector<std::string>& fields);

 private:
  void sep(bool& first) {
    if (!first) out_ << ',';
    first = false;
  }
  void write_field(double x, bool& first) {
    sep(first);
    out_ << format_double(x);
  }
  template <class T>
    requires std::is_integral_v<T>
  void write_field(T x, bool& first) {
    sep(first);
    out_ << x;
  }
  void write_field(const std::string& s, bool& first) {
    sep(first);
    out_ << s;
  }
  void write_field(const char* s, bool& first) {
    sep(first);
    out_ << s;
  }

  std::ostream& out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Column index by name; throws std::out_of_range if absent.
  std::size_t column(std::string_view name) const;
};

// Plain comma-separated reader for the tables this library writes (no quoting).
CsvTable read_csv(std::istream& in);

}  // namespace sgdmlab
