#include "fxvol/date.hpp"

#include "fxvol/error.hpp"

#include <charconv>

#include <fmt/format.h>

namespace fxvol {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::FileUnreadable: return "FileUnreadable";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::EmptySeries: return "EmptySeries";
    case ErrorKind::TooFewObservations: return "TooFewObservations";
    case ErrorKind::HoldoutTooLarge: return "HoldoutTooLarge";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::NonFiniteLikelihood: return "NonFiniteLikelihood";
    case ErrorKind::NonStationary: return "NonStationary";
    case ErrorKind::OptimizationFailed: return "OptimizationFailed";
    case ErrorKind::AllCellsFailed: return "AllCellsFailed";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::NoValidOrigins: return "NoValidOrigins";
    case ErrorKind::InvalidInputs: return "InvalidInputs";
    case ErrorKind::PriceOutOfBand: return "PriceOutOfBand";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::MisalignedSeries: return "MisalignedSeries";
    case ErrorKind::MissingInputs: return "MissingInputs";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

Date::Date(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    throw Error(ErrorKind::InvalidInputs,
                fmt::format("invalid calendar date {}-{}-{}", year, month, day));
  }
  days_ = std::chrono::sys_days{ymd};
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    return std::nullopt;
  }
  int year = 0;
  unsigned month = 0;
  unsigned day = 0;
  if (!parse_number(text.substr(0, 4), year) || !parse_number(text.substr(5, 2), month) ||
      !parse_number(text.substr(8, 2), day)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    return std::nullopt;
  }
  return Date{std::chrono::sys_days{ymd}};
}

std::string Date::iso() const {
  const std::chrono::year_month_day ymd{days_};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

bool Date::is_weekend() const {
  const std::chrono::weekday wd{days_};
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

Date Date::next_weekday() const {
  Date next{days_ + std::chrono::days{1}};
  while (next.is_weekend()) {
    next = Date{next.days_ + std::chrono::days{1}};
  }
  return next;
}

}  // namespace fxvol
