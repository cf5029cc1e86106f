#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace seqmotif {

// UTC instant at second precision, stored as seconds since the Unix epoch.
struct Instant {
  std::int64_t epoch_seconds = 0;

  auto operator<=>(const Instant&) const = default;

  Instant operator+(std::chrono::seconds d) const {
    return Instant{epoch_seconds + d.count()};
  }
  std::chrono::seconds operator-(Instant other) const {
    return std::chrono::seconds{epoch_seconds - other.epoch_seconds};
  }
};

// Accepts "YYYY-MM-DDTHH:MM:SS" (a space may replace the T), an optional
// fractional part that is truncated, and an optional "Z", "+HH:MM", "+HHMM"
// or "+HH" offset. No offset means UTC.
std::optional<Instant> parse_iso8601(std::string_view text);

// Always renders "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(Instant t);

// Parses "600", "600s", "10m", "1.5h", "2d".
std::optional<std::chrono::seconds> parse_duration(std::string_view text);

}  // namespace seqmotif
