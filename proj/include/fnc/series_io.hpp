#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fnc::io {

/// One sample per line; the first comma-separated field is used. Blank lines
/// are ignored. With `skip_header` the first non-blank line is dropped.
std::vector<double> parse_series_csv(std::string_view text, bool skip_header);

/// Round-trippable (%.17g) rendering, one value per line.
std::string format_series_csv(std::span<const double> values, std::string_view header = {});

}  // namespace fnc::io
