#include "lwct/keyvalue.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <system_error>

#include "lwct/error.hpp"

namespace lwct {
namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> parts;
  if (trim(s).empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

KeyValues KeyValues::parse(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected key=value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
    kv.set(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return kv;
}

void KeyValues::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

void KeyValues::set(std::string key, double value) { set(std::move(key), format_double(value)); }

void KeyValues::set(std::string key, std::size_t value) {
  set(std::move(key), std::to_string(value));
}

bool KeyValues::has(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> KeyValues::find(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

const std::string& KeyValues::get(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw ConfigError(std::string(key), "missing required key '" + std::string(key) + "'");
}

double KeyValues::get_double(std::string_view key) const { return parse_double(get(key), key); }

std::size_t KeyValues::get_size(std::string_view key) const { return parse_size(get(key), key); }

std::vector<double> KeyValues::get_doubles(std::string_view key) const {
  std::vector<double> out;
  for (auto part : split_commas(get(key))) out.push_back(parse_double(part, key));
  return out;
}

std::vector<std::size_t> KeyValues::get_sizes(std::string_view key) const {
  std::vector<std::size_t> out;
  for (auto part : split_commas(get(key))) out.push_back(parse_size(part, key));
  return out;
}

double KeyValues::get_double_or(std::string_view key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::size_t KeyValues::get_size_or(std::string_view key, std::size_t fallback) const {
  return has(key) ? get_size(key) : fallback;
}

std::string KeyValues::get_or(std::string_view key, std::string fallback) const {
  auto v = find(key);
  return v ? *v : std::move(fallback);
}

std::string KeyValues::str() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw DataError("cannot format number");
  return std::string(buf, end);
}

std::string format_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

double parse_double(std::string_view text, std::string_view key) {
  text = trim(text);
  double v = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v))
    throw ConfigError(std::string(key),
                      "key '" + std::string(key) + "': not a number: '" + std::string(text) + "'");
  return v;
}

std::size_t parse_size(std::string_view text, std::string_view key) {
  text = trim(text);
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw ConfigError(std::string(key), "key '" + std::string(key) +
                                            "': not a non-negative integer: '" +
                                            std::string(text) + "'");
  return v;
}

}  // namespace lwct
