#include "smcforge/dates.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "smcforge/errors.hpp"

namespace smcforge::dates {

// Howard Hinnant's civil-day algorithms (public domain arithmetic).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);             // [0, 399]
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;            // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int day_of_year(std::int64_t days) {
    const CivilDate c = civil_from_days(days);
    return static_cast<int>(days - days_from_civil(c.year, 1, 1)) + 1;
}

std::int64_t parse_iso_date(const std::string& text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw ValidationError("bad date '" + text + "': expected YYYY-MM-DD");
    }
    auto parse_int = [&](std::size_t off, std::size_t len) {
        int value = 0;
        const char* first = text.data() + off;
        auto [ptr, ec] = std::from_chars(first, first + len, value);
        if (ec != std::errc{} || ptr != first + len) {
            throw ValidationError("bad date '" + text + "': non-numeric field");
        }
        return value;
    };
    const int y = parse_int(0, 4);
    const int m = parse_int(5, 2);
    const int d = parse_int(8, 2);
    static constexpr std::array<int, 12> month_len = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m < 1 || m > 12) throw ValidationError("bad date '" + text + "': month out of range");
    const int dmax = month_len[m - 1] + ((m == 2 && is_leap_year(y)) ? 1 : 0);
    if (d < 1 || d > dmax) throw ValidationError("bad date '" + text + "': day out of range");
    return days_from_civil(y, m, d);
}

std::string format_iso_date(std::int64_t days) {
    const CivilDate c = civil_from_days(days);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", c.year, c.month, c.day);
    return std::string(buf);
}

}  // namespace smcforge::dates
