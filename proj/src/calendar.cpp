#include "ehe/calendar.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace ehe {

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int year_length(int year) { return is_leap_year(year) ? 366 : 365; }

int days_in_month(int year, int month) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) return 0;
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[month - 1];
}

bool is_valid_date(const Date& d) {
    return d.month >= 1 && d.month <= 12 && d.day >= 1 && d.day <= days_in_month(d.year, d.month);
}

// Days-from-civil algorithm (shifts the year so leap day is last, era = 400-year block).
std::int64_t to_serial(const Date& d) {
    std::int64_t y = d.year;
    const int m = d.month;
    const int day = d.day;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);                     // [0, 399]
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + day - 1;        // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;                    // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date from_serial(std::int64_t serial) {
    std::int64_t z = serial + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned day = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(day)};
}

int day_of_year(const Date& d) {
    return static_cast<int>(to_serial(d) - to_serial(Date{d.year, 1, 1})) + 1;
}

Date add_days(const Date& d, std::int64_t n) { return from_serial(to_serial(d) + n); }

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

Date parse_date(const std::string& s) {
    auto fail = [&] { throw std::invalid_argument("invalid date: '" + s + "' (expected YYYY-MM-DD)"); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail();
    Date d;
    auto num = [&](int lo, int hi, int& out) {
        auto [p, ec] = std::from_chars(s.data() + lo, s.data() + hi, out);
        if (ec != std::errc() || p != s.data() + hi) fail();
    };
    num(0, 4, d.year);
    num(5, 7, d.month);
    num(8, 10, d.day);
    if (!is_valid_date(d)) fail();
    return d;
}

}  // namespace ehe
