#include "fnc/series_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "fnc/error.hpp"

namespace fnc::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<double> parse_series_csv(std::string_view text, bool skip_header) {
  std::vector<double> values;
  bool header_pending = skip_header;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const std::string_view field = trim(line.substr(0, line.find(',')));
    double v = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || end != field.data() + field.size() || !std::isfinite(v)) {
      throw DataError("csv line " + std::to_string(line_no) + ": not a number: '" + std::string(field) + "'");
    }
    values.push_back(v);
  }
  return values;
}

std::string format_series_csv(std::span<const double> values, std::string_view header) {
  std::string out;
  if (!header.empty()) {
    out.append(header);
    out.push_back('\n');
  }
  char buf[40];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    out.append(buf);
  }
  return out;
}

}  // namespace fnc::io
