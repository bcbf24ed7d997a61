#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairbalance::csv {

using Record = std::vector<std::string>;

/// Header plus data records of an RFC-4180 file. Quoted fields may contain
/// commas, doubled quotes and line breaks; CRLF and LF line endings are both
/// accepted. Blank lines are skipped.
struct Document {
  Record header;
  std::vector<Record> rows;

  /// Position of the first header field equal to `name`.
  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
};

[[nodiscard]] Document parse(std::string_view text);
[[nodiscard]] Document read(const std::filesystem::path& path);

/// Quotes a field only when it contains a comma, quote or line break.
[[nodiscard]] std::string escape(std::string_view field);

void write_record(std::ostream& out, const Record& record);

}  // namespace fairbalance::csv
