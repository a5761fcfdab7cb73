#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fxvol::csv {

/// A header-indexed CSV file. Unquoted fields are trimmed; quoted fields may
/// contain separators and doubled quotes.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line per row

  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
};

/// Throws Error(FileUnreadable) if the file cannot be opened or has no header.
Table read(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

/// Quotes a field if it contains a separator, quote or newline.
std::string quote(std::string_view field);

/// Shortest decimal representation that round-trips.
std::string format_double(double value);

bool parse_double(std::string_view text, double& out);

/// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace fxvol::csv
