// Calendar value types used across the panels: ISO dates and (year, month)
// pairs. Everything crossing a file boundary is ISO-8601.
#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace cyber {

struct YearMonth {
    int year = 1970;
    int month = 1;  // 1..12

    auto operator<=>(const YearMonth&) const = default;

    // Months since year 0; differences are month counts.
    int index() const { return year * 12 + (month - 1); }
    static YearMonth from_index(int idx);

    YearMonth plus(int months) const { return from_index(index() + months); }
    YearMonth quarter_start() const;
    bool is_quarter_start() const { return (month - 1) % 3 == 0; }

    std::string iso() const;                         // YYYY-MM
    static YearMonth parse(std::string_view text);   // throws std::invalid_argument
};

struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    YearMonth year_month() const { return {year, month}; }
    std::string iso() const;                         // YYYY-MM-DD
    static Date parse(std::string_view text);        // throws std::invalid_argument
    static Date first_of(YearMonth ym) { return {ym.year, ym.month, 1}; }
};

bool is_leap_year(int year);
int days_in_month(int year, int month);

}  // namespace cyber
