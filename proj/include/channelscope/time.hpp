#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace channelscope {

// Timestamps are UTC epoch seconds throughout; the polling grid is 30 minutes.
using Timestamp = std::int64_t;

inline constexpr std::int64_t kSecondsPerSlot = 1800;
inline constexpr std::int64_t kSlotsPerDay = 48;
inline constexpr std::int64_t kSlotsPerWeek = 7 * kSlotsPerDay;

// Floors to the enclosing grid boundary (works for negative epochs too).
Timestamp floor_to_slot(Timestamp ts, std::int64_t slot_seconds = kSecondsPerSlot);

// Half-hour-of-day bin in [0, 48), UTC.
int utc_slot_of_day(Timestamp ts);

// "2021-07-01T13:30:00Z"
std::string to_iso8601(Timestamp ts);
std::optional<Timestamp> parse_iso8601(std::string_view text);

// Calendar day helpers for daily records ("2021-07-01").
std::string to_iso_date(Timestamp ts);
std::optional<Timestamp> parse_iso_date(std::string_view text);

}  // namespace channelscope
