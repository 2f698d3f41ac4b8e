#include "fnc/report.hpp"

#include <algorithm>
#include <cstdio>

namespace fnc::report {

double RunReport::ratio() const {
  if (compressed_bytes == 0) return 0.0;
  return static_cast<double>(original_bytes) / static_cast<double>(compressed_bytes);
}

nlohmann::ordered_json to_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["original_bytes"] = r.original_bytes;
  j["compressed_bytes"] = r.compressed_bytes;
  j["ratio"] = r.ratio();
  j["metric"] = r.metric;
  j["distortion"] = r.distortion;
  j["wall_time"] = r.wall_time;
  j["seed"] = r.seed;
  j["config"] = r.config;
  return j;
}

std::string format_jsonl(const std::vector<RunReport>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string format_table(const std::vector<RunReport>& rows) {
  const std::vector<std::string> head{"method", "original", "compressed", "ratio", "metric", "distortion", "time_s", "seed"};
  std::vector<std::vector<std::string>> cells{head};
  for (const auto& r : rows)
    cells.push_back({r.method, std::to_string(r.original_bytes), std::to_string(r.compressed_bytes), fixed(r.ratio(), 4),
                     r.metric, fixed(r.distortion, 6), fixed(r.wall_time, 3), std::to_string(r.seed)});
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += "  ";
      const std::string pad(width[c] - row[c].size(), ' ');
      out += c == 0 || c == 4 ? row[c] + pad : pad + row[c];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  }
  return out;
}

}  // namespace fnc::report
