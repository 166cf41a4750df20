#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "timelimits/harness/csv.hpp"

namespace timelimits {

/// Runs being compared do not share an evaluation grid.
class AlignmentError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct ComparisonInput {
  std::string label;
  std::vector<AggregateRecord> rows;
};

/// Loads `aggregate.csv` from a run directory.
inline ComparisonInput load_run(const std::filesystem::path& dir) {
  const auto file = dir / "aggregate.csv";
  if (!std::filesystem::exists(file)) throw InvalidInput("no records in '" + dir.string() + "'");
  ComparisonInput in{dir.filename().empty() ? dir.parent_path().filename().string()
                                            : dir.filename().string(),
                     parse_aggregate(read_file(file))};
  if (in.rows.empty()) throw InvalidInput("no records in '" + dir.string() + "'");
  return in;
}

/// Joins aggregates on (step, metric). A single input is passed through
/// unchanged; several produce `step,metric,<label>_mean,<label>_stderr,...`.
inline std::string compare_runs(const std::vector<ComparisonInput>& inputs) {
  if (inputs.empty()) throw InvalidInput("compare needs at least one run");
  if (inputs.size() == 1) return emit_aggregate(inputs.front().rows);

  using Key = std::pair<std::uint64_t, std::string>;
  std::vector<std::map<Key, const AggregateRecord*>> tables(inputs.size());
  std::set<Key> all;
  std::set<std::string> labels;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!labels.insert(inputs[i].label).second)
      throw InvalidInput("duplicate run label '" + inputs[i].label + "'");
    for (const auto& r : inputs[i].rows) {
      tables[i][{r.step, r.metric}] = &r;
      all.insert({r.step, r.metric});
    }
  }
  std::string missing;
  for (const auto& key : all)
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (!tables[i].contains(key))
        missing += "\n  step " + std::to_string(key.first) + " metric " + key.second +
                   " missing from " + inputs[i].label;
  if (!missing.empty()) throw AlignmentError("evaluation grids differ:" + missing);

  std::string out = "step,metric";
  for (const auto& in : inputs) out += "," + in.label + "_mean," + in.label + "_stderr";
  out += '\n';
  for (const auto& key : all) {
    out += std::to_string(key.first) + ',' + key.second;
    for (const auto& t : tables) {
      const AggregateRecord* r = t.at(key);
      out += ',' + to_decimal(r->mean) + ',' + to_decimal(r->stderr_);
    }
    out += '\n';
  }
  return out;
}

}  // namespace timelimits
