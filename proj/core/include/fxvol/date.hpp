#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace fxvol {

/// Calendar date with day resolution, stored as days since the Unix epoch.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Parses ISO-8601 `yyyy-mm-dd`. Returns nullopt for anything else,
  /// including out-of-range calendar values.
  static std::optional<Date> parse(std::string_view text);

  [[nodiscard]] std::string iso() const;
  [[nodiscard]] constexpr std::chrono::sys_days days() const { return days_; }
  [[nodiscard]] bool is_weekend() const;
  [[nodiscard]] Date next_weekday() const;

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace fxvol
