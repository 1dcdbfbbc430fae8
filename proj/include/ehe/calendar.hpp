#pragma once

#include <cstdint>
#include <string>

namespace ehe {

/// Proleptic Gregorian calendar date.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;
};

bool is_leap_year(int year);
int year_length(int year);          // 365 or 366
int days_in_month(int year, int month);
bool is_valid_date(const Date& d);

// Serial day number (days since 1970-01-01, may be negative).
std::int64_t to_serial(const Date& d);
Date from_serial(std::int64_t serial);

// 1-based ordinal day within the year; Feb 29 is day 60 in leap years.
int day_of_year(const Date& d);

Date add_days(const Date& d, std::int64_t n);

std::string format_date(const Date& d);     // ISO-8601 YYYY-MM-DD
Date parse_date(const std::string& s);      // throws std::invalid_argument on malformed input

}  // namespace ehe
