#pragma once

// Run reports: one record per codec run, written as JSON lines with a fixed
// field order or as an aligned text table.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace fnc::report {

using Config = nlohmann::ordered_json;

struct RunReport {
  std::string method;
  std::size_t original_bytes = 0;
  std::size_t compressed_bytes = 0;
  std::string metric = "hamming";
  double distortion = 0.0;
  double wall_time = 0.0;  // seconds
  std::uint64_t seed = 0;
  Config config = Config::object();

  /// original_bytes / compressed_bytes; 0 when nothing was written.
  double ratio() const;
};

/// Fields in order: method, original_bytes, compressed_bytes, ratio,
/// metric, distortion, wall_time, seed, config.
nlohmann::ordered_json to_json(const RunReport& r);

/// One compact JSON object per line, each line newline-terminated.
std::string format_jsonl(const std::vector<RunReport>& rows);

std::string format_table(const std::vector<RunReport>& rows);

}  // namespace fnc::report
