#pragma once

#include <initializer_list>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace locstat {

/// Shortest round-trip decimal form with '.' separator, independent of the locale.
[[nodiscard]] std::string format_double(double x);

/// RFC 4180 style writer: comma separated, CRLF-free ("\n") rows, quoting on demand.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string_view> names);
  void header(const std::vector<std::string>& names);

  CsvWriter& cell(double x);
  CsvWriter& cell(long long x);
  CsvWriter& cell(std::size_t x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(int x) { return cell(static_cast<long long>(x)); }
  CsvWriter& cell(std::string_view s);
  void end_row();

 private:
  void separator();
  std::ostream& out_;
  bool row_started_ = false;
};

}  // namespace locstat
