#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lwct {

// Ordered key=value text records. One entry per line; blank lines and lines
// starting with '#' are ignored; whitespace around keys and values is trimmed.
// Used for raw sidecars, the SVZ geometry block and pipeline configs.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text);

  void set(std::string key, std::string value);
  void set(std::string key, double value);
  void set(std::string key, std::size_t value);

  bool has(std::string_view key) const;
  std::optional<std::string> find(std::string_view key) const;

  // Accessors throw ConfigError naming the key when it is absent or malformed.
  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::size_t get_size(std::string_view key) const;
  std::vector<double> get_doubles(std::string_view key) const;
  std::vector<std::size_t> get_sizes(std::string_view key) const;

  double get_double_or(std::string_view key, double fallback) const;
  std::size_t get_size_or(std::string_view key, std::size_t fallback) const;
  std::string get_or(std::string_view key, std::string fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);
std::string format_doubles(const std::vector<double>& v);

double parse_double(std::string_view text, std::string_view key);
std::size_t parse_size(std::string_view text, std::string_view key);

}  // namespace lwct
