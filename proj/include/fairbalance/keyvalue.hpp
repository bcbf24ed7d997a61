#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fairbalance {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Parses `key = value` lines. `#` starts a comment, blank lines are ignored,
/// keys may repeat. Throws ConfigError on a line without `=`.
[[nodiscard]] std::vector<KeyValue> parse_key_values(std::string_view text);

[[nodiscard]] std::string_view trim(std::string_view s) noexcept;

/// Splits on commas and trims each element; empty elements are dropped.
[[nodiscard]] std::vector<std::string> split_list(std::string_view value);

[[nodiscard]] std::string read_text_file(const std::string& path);

[[nodiscard]] bool parse_bool(std::string_view value, std::string_view key);
[[nodiscard]] double parse_double(std::string_view value, std::string_view key);
[[nodiscard]] long long parse_integer(std::string_view value, std::string_view key);

}  // namespace fairbalance
