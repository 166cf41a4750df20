#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "timelimits/core/errors.hpp"
#include "timelimits/policy_grad/mlp.hpp"

namespace timelimits {

/// Trained network plus the metadata needed to rebuild its inputs.
///
/// Text format, version 1:
///
///     timelimits-policy 1
///     input <n>
///     hidden <h1> <h2> ...
///     actions <k>
///     time_aware <0|1>
///     parameters <count>
///     <one parameter per line, shortest round-trip decimal>
struct PolicySnapshot {
  MlpShape shape;
  bool time_aware = false;
  Eigen::VectorXd parameters;
};

inline constexpr int kSnapshotVersion = 1;

inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline void write_snapshot(std::ostream& os, const PolicySnapshot& snap) {
  const Mlp net(snap.shape);
  if (static_cast<std::size_t>(snap.parameters.size()) != net.num_parameters())
    throw InvalidInput("snapshot parameter count does not match its shape");
  os << "timelimits-policy " << kSnapshotVersion << '\n';
  os << "input " << snap.shape.input << '\n';
  os << "hidden";
  for (auto h : snap.shape.hidden) os << ' ' << h;
  os << '\n';
  os << "actions " << snap.shape.actions << '\n';
  os << "time_aware " << (snap.time_aware ? 1 : 0) << '\n';
  os << "parameters " << snap.parameters.size() << '\n';
  for (Eigen::Index i = 0; i < snap.parameters.size(); ++i)
    os << format_double(snap.parameters(i)) << '\n';
}

inline PolicySnapshot read_snapshot(std::istream& is) {
  std::size_t line_no = 0;
  std::string line;
  auto next = [&](const char* key) {
    ++line_no;
    if (!std::getline(is, line))
      throw InvalidInput("snapshot: unexpected end of file, expected '" + std::string(key) + "'");
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word != key)
      throw InvalidInput("snapshot line " + std::to_string(line_no) + ": expected '" + key + "'");
    std::string rest;
    std::getline(ls, rest);
    return std::istringstream(rest);
  };
  auto number = [&](std::istringstream& ls) {
    long long v = -1;
    if (!(ls >> v) || v < 0)
      throw InvalidInput("snapshot line " + std::to_string(line_no) + ": bad integer");
    return static_cast<std::size_t>(v);
  };

  PolicySnapshot snap;
  auto header = next("timelimits-policy");
  if (number(header) != static_cast<std::size_t>(kSnapshotVersion))
    throw InvalidInput("snapshot: unsupported version");
  auto in = next("input");
  snap.shape.input = number(in);
  auto hidden = next("hidden");
  snap.shape.hidden.clear();
  for (long long h; hidden >> h;) {
    if (h <= 0) throw InvalidInput("snapshot line " + std::to_string(line_no) + ": bad layer size");
    snap.shape.hidden.push_back(static_cast<std::size_t>(h));
  }
  auto actions = next("actions");
  snap.shape.actions = number(actions);
  auto ta = next("time_aware");
  const auto flag = number(ta);
  if (flag > 1) throw InvalidInput("snapshot line " + std::to_string(line_no) + ": bad flag");
  snap.time_aware = flag == 1;
  auto count_line = next("parameters");
  const std::size_t count = number(count_line);
  const Mlp net(snap.shape);
  if (count != net.num_parameters())
    throw InvalidInput("snapshot: parameter count does not match its shape");
  snap.parameters.resize(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    ++line_no;
    if (!std::getline(is, line)) throw InvalidInput("snapshot: truncated parameter list");
    double v = 0.0;
    const auto r = std::from_chars(line.data(), line.data() + line.size(), v);
    if (r.ec != std::errc() || r.ptr != line.data() + line.size())
      throw InvalidInput("snapshot line " + std::to_string(line_no) + ": bad number");
    snap.parameters(static_cast<Eigen::Index>(i)) = v;
  }
  return snap;
}

}  // namespace timelimits
