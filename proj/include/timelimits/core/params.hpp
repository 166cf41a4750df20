#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "timelimits/core/errors.hpp"

namespace timelimits {

/// Error in user-supplied configuration; `line()` is 0 when no source line applies.
class ConfigError : public InvalidInput {
 public:
  ConfigError(const std::string& message, std::size_t line = 0)
      : InvalidInput(line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// String-valued key/value table with typed accessors. Every key that is read
/// is marked; `reject_unread` reports whatever is left, so unknown keys fail
/// loudly instead of being ignored.
class ParamTable {
 public:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };

  void set(std::string key, std::string value, std::size_t line = 0) {
    entries_[std::move(key)] = Entry{std::move(value), line};
  }

  [[nodiscard]] bool contains(std::string_view key) const {
    return entries_.find(std::string(key)) != entries_.end();
  }
  [[nodiscard]] const std::map<std::string, Entry>& entries() const { return entries_; }

  std::string get_string(std::string_view key, std::string fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
  }
  std::string require_string(std::string_view key) const {
    const Entry* e = find(key);
    if (!e) throw ConfigError("missing required key '" + std::string(key) + "'");
    return e->value;
  }

  double get_double(std::string_view key, double fallback) const {
    const Entry* e = find(key);
    return e ? parse_double(key, *e) : fallback;
  }

  std::int64_t get_int(std::string_view key, std::int64_t fallback) const {
    const Entry* e = find(key);
    return e ? parse_int(key, e->value, e->line) : fallback;
  }

  bool get_bool(std::string_view key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
    if (e->value == "false" || e->value == "0" || e->value == "no") return false;
    throw ConfigError("key '" + std::string(key) + "' expects a boolean, got '" + e->value + "'",
                      e->line);
  }

  /// Comma separated integers; `a..b` expands to an inclusive range.
  std::vector<std::int64_t> get_int_list(std::string_view key,
                                         std::vector<std::int64_t> fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    return parse_int_list(key, e->value, e->line);
  }

  static std::vector<std::int64_t> parse_int_list(std::string_view key, std::string_view text,
                                                  std::size_t line = 0) {
    std::vector<std::int64_t> out;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t comma = text.find(',', start);
      if (comma == std::string_view::npos) comma = text.size();
      std::string_view item = trim(text.substr(start, comma - start));
      if (item.empty()) throw ConfigError("empty item in list for '" + std::string(key) + "'", line);
      if (auto dots = item.find(".."); dots != std::string_view::npos) {
        const auto lo = parse_int(key, trim(item.substr(0, dots)), line);
        const auto hi = parse_int(key, trim(item.substr(dots + 2)), line);
        if (hi < lo) throw ConfigError("empty range in '" + std::string(key) + "'", line);
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
      } else {
        out.push_back(parse_int(key, item, line));
      }
      start = comma + 1;
    }
    return out;
  }

  /// Throws for the first key (in source order) that no accessor touched.
  void reject_unread(std::string_view context) const {
    const std::pair<const std::string, Entry>* first = nullptr;
    for (const auto& kv : entries_)
      if (!read_.contains(kv.first) && (!first || kv.second.line < first->second.line))
        first = &kv;
    if (first)
      throw ConfigError("unknown key '" + first->first + "' in " + std::string(context),
                        first->second.line);
  }

  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
      s.remove_suffix(1);
    return s;
  }

 private:
  const Entry* find(std::string_view key) const {
    auto it = entries_.find(std::string(key));
    if (it == entries_.end()) return nullptr;
    read_.insert(it->first);
    return &it->second;
  }

  static double parse_double(std::string_view key, const Entry& e) {
    double v = 0.0;
    const char* end = e.value.data() + e.value.size();
    auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
    if (ec != std::errc() || ptr != end)
      throw ConfigError("key '" + std::string(key) + "' expects a number, got '" + e.value + "'",
                        e.line);
    return v;
  }

  static std::int64_t parse_int(std::string_view key, std::string_view text, std::size_t line) {
    std::int64_t v = 0;
    // accept scientific shorthand such as 2e5 for integer budgets
    double d = 0.0;
    const char* end = text.data() + text.size();
    if (auto [ptr, ec] = std::from_chars(text.data(), end, v); ec == std::errc() && ptr == end)
      return v;
    if (auto [ptr, ec] = std::from_chars(text.data(), end, d);
        ec == std::errc() && ptr == end && d == static_cast<double>(static_cast<std::int64_t>(d)))
      return static_cast<std::int64_t>(d);
    throw ConfigError("key '" + std::string(key) + "' expects an integer, got '" +
                          std::string(text) + "'",
                      line);
  }

  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> read_;
};

}  // namespace timelimits
