#pragma once

#include <cstdint>
#include <string>

namespace smcforge::dates {

struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
};

/// Days since 1970-01-01 for a proleptic-Gregorian civil date.
std::int64_t days_from_civil(int year, int month, int day);

CivilDate civil_from_days(std::int64_t days);

bool is_leap_year(int year);

/// 1-based ordinal day within the year (1..366).
int day_of_year(std::int64_t days);

/// Parse "YYYY-MM-DD"; throws ValidationError on malformed or impossible dates.
std::int64_t parse_iso_date(const std::string& text);

std::string format_iso_date(std::int64_t days);

}  // namespace smcforge::dates
