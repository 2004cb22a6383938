#include "channelscope/time.hpp"

#include <charconv>
#include <cstdio>

namespace channelscope {

namespace {

// Days <-> {y,m,d} conversions on the proleptic Gregorian calendar,
// after Howard Hinnant's chrono algorithms.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yr + (m <= 2));
}

bool parse_uint(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int value = 0;
    auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, value);
    return ec == std::errc{} && p == s.data() + pos + len && value >= 0 ? (out = value, true) : false;
}

}  // namespace

Timestamp floor_to_slot(Timestamp ts, std::int64_t slot_seconds) {
    Timestamp q = ts / slot_seconds;
    if (ts % slot_seconds < 0) --q;
    return q * slot_seconds;
}

int utc_slot_of_day(Timestamp ts) {
    std::int64_t sec = ts % 86400;
    if (sec < 0) sec += 86400;
    return static_cast<int>(sec / kSecondsPerSlot);
}

std::string to_iso8601(Timestamp ts) {
    std::int64_t days = ts / 86400;
    std::int64_t sec = ts % 86400;
    if (sec < 0) {
        sec += 86400;
        --days;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                  static_cast<long long>(sec / 3600), static_cast<long long>(sec / 60 % 60),
                  static_cast<long long>(sec % 60));
    return buf;
}

std::optional<Timestamp> parse_iso8601(std::string_view text) {
    // YYYY-MM-DDTHH:MM:SSZ, exactly.
    if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
        return std::nullopt;
    }
    int y, mo, d, h, mi, s;
    if (!parse_uint(text, 0, 4, y) || !parse_uint(text, 5, 2, mo) || !parse_uint(text, 8, 2, d) ||
        !parse_uint(text, 11, 2, h) || !parse_uint(text, 14, 2, mi) || !parse_uint(text, 17, 2, s)) {
        return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 59) return std::nullopt;
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
           h * 3600 + mi * 60 + s;
}

std::string to_iso_date(Timestamp ts) {
    std::int64_t days = ts / 86400;
    if (ts % 86400 < 0) --days;
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
    return buf;
}

std::optional<Timestamp> parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y, mo, d;
    if (!parse_uint(text, 0, 4, y) || !parse_uint(text, 5, 2, mo) || !parse_uint(text, 8, 2, d)) {
        return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400;
}

}  // namespace channelscope
