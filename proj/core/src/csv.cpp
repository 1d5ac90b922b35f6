#include "locstat/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace locstat {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void CsvWriter::header(std::initializer_list<std::string_view> names) {
  for (auto n : names) cell(n);
  end_row();
}

void CsvWriter::header(const std::vector<std::string>& names) {
  for (const auto& n : names) cell(std::string_view(n));
  end_row();
}

void CsvWriter::separator() {
  if (row_started_) out_ << ',';
  row_started_ = true;
}

CsvWriter& CsvWriter::cell(double x) {
  separator();
  out_ << format_double(x);
  return *this;
}

CsvWriter& CsvWriter::cell(long long x) {
  separator();
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out_.write(buf, res.ptr - buf);
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view s) {
  separator();
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
    out_ << s;
    return *this;
  }
  out_ << '"';
  for (char c : s) {
    if (c == '"') out_ << '"';
    out_ << c;
  }
  out_ << '"';
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
}

}  // namespace locstat
