#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "timelimits/core/errors.hpp"
#include "timelimits/core/stats.hpp"

namespace timelimits {

/// One raw measurement: `step,seed,metric,value`.
struct RawRecord {
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

/// One aggregate row: `step,metric,mean,stderr,n`.
struct AggregateRecord {
  std::uint64_t step = 0;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n = 0;

  friend bool operator==(const AggregateRecord&, const AggregateRecord&) = default;
};

inline constexpr const char* kRawHeader = "step,seed,metric,value";
inline constexpr const char* kAggregateHeader = "step,metric,mean,stderr,n";

/// Shortest decimal that parses back to the same double.
inline std::string to_decimal(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace detail {

inline void check_metric_name(const std::string& m) {
  if (m.empty() || m.find_first_of(",\n\r\"") != std::string::npos)
    throw InvalidInput("metric name '" + m + "' cannot be written to CSV");
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) return out;
    start = comma + 1;
  }
}

template <class T>
T parse_field(const std::string& text, std::size_t line, const char* what) {
  T v{};
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size())
    throw InvalidInput("csv line " + std::to_string(line) + ": bad " + what + " '" + text + "'");
  return v;
}

template <class Row>
std::vector<Row> parse_table(const std::string& text, const char* header, std::size_t columns,
                             Row (*make)(const std::vector<std::string>&, std::size_t)) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != header)
    throw InvalidInput(std::string("csv: expected header '") + header + "'");
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != columns)
      throw InvalidInput("csv line " + std::to_string(line_no) + ": expected " +
                         std::to_string(columns) + " fields");
    rows.push_back(make(fields, line_no));
  }
  return rows;
}

}  // namespace detail

inline std::string emit_raw(const std::vector<RawRecord>& rows) {
  std::string out = std::string(kRawHeader) + "\n";
  for (const auto& r : rows) {
    detail::check_metric_name(r.metric);
    out += std::to_string(r.step) + ',' + std::to_string(r.seed) + ',' + r.metric + ',' +
           to_decimal(r.value) + '\n';
  }
  return out;
}

inline std::vector<RawRecord> parse_raw(const std::string& text) {
  return detail::parse_table<RawRecord>(
      text, kRawHeader, 4, +[](const std::vector<std::string>& f, std::size_t line) {
        return RawRecord{detail::parse_field<std::uint64_t>(f[0], line, "step"),
                         detail::parse_field<std::uint64_t>(f[1], line, "seed"), f[2],
                         detail::parse_field<double>(f[3], line, "value")};
      });
}

inline std::string emit_aggregate(const std::vector<AggregateRecord>& rows) {
  std::string out = std::string(kAggregateHeader) + "\n";
  for (const auto& r : rows) {
    detail::check_metric_name(r.metric);
    out += std::to_string(r.step) + ',' + r.metric + ',' + to_decimal(r.mean) + ',' +
           to_decimal(r.stderr_) + ',' + std::to_string(r.n) + '\n';
  }
  return out;
}

inline std::vector<AggregateRecord> parse_aggregate(const std::string& text) {
  return detail::parse_table<AggregateRecord>(
      text, kAggregateHeader, 5, +[](const std::vector<std::string>& f, std::size_t line) {
        return AggregateRecord{detail::parse_field<std::uint64_t>(f[0], line, "step"), f[1],
                               detail::parse_field<double>(f[2], line, "mean"),
                               detail::parse_field<double>(f[3], line, "stderr"),
                               detail::parse_field<std::uint64_t>(f[4], line, "n")};
      });
}

/// Mean and standard error over seeds for every (step, metric), ordered by
/// step then metric name. Values within a group are taken in seed order so
/// the result does not depend on the order of `rows`.
inline std::vector<AggregateRecord> aggregate(const std::vector<RawRecord>& rows) {
  std::map<std::pair<std::uint64_t, std::string>, std::map<std::uint64_t, double>> groups;
  for (const auto& r : rows) {
    auto& bucket = groups[{r.step, r.metric}];
    if (!bucket.emplace(r.seed, r.value).second)
      throw InvalidInput("duplicate record for step " + std::to_string(r.step) + ", seed " +
                         std::to_string(r.seed) + ", metric " + r.metric);
  }
  std::vector<AggregateRecord> out;
  out.reserve(groups.size());
  for (const auto& [key, by_seed] : groups) {
    std::vector<double> values;
    values.reserve(by_seed.size());
    for (const auto& kv : by_seed) values.push_back(kv.second);
    const MeanStderr ms = mean_stderr(values);
    out.push_back({key.first, key.second, ms.mean, ms.stderr_, ms.n});
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace timelimits
