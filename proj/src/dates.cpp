#include "cyberscore/dates.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace cyber {

namespace {

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
    int value = 0;
    auto first = text.data() + pos;
    auto last = first + len;
    for (auto p = first; p != last; ++p) {
        if (*p < '0' || *p > '9') throw std::invalid_argument("bad date '" + std::string(text) + "'");
    }
    std::from_chars(first, last, value);
    return value;
}

}  // namespace

bool is_leap_year(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

int days_in_month(int year, int month) {
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return kDays[month - 1];
}

YearMonth YearMonth::from_index(int idx) {
    int year = idx / 12;
    int month = idx % 12;
    if (month < 0) {
        month += 12;
        --year;
    }
    return {year, month + 1};
}

YearMonth YearMonth::quarter_start() const { return {year, ((month - 1) / 3) * 3 + 1}; }

std::string YearMonth::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') throw std::invalid_argument("bad month '" + std::string(text) + "'");
    YearMonth ym{parse_fixed(text, 0, 4), parse_fixed(text, 5, 2)};
    if (ym.month < 1 || ym.month > 12) throw std::invalid_argument("bad month '" + std::string(text) + "'");
    return ym;
}

std::string Date::iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-')
        throw std::invalid_argument("bad date '" + std::string(text) + "'");
    Date d{parse_fixed(text, 0, 4), parse_fixed(text, 5, 2), parse_fixed(text, 8, 2)};
    if (d.month < 1 || d.month > 12 || d.day < 1 || d.day > days_in_month(d.year, d.month))
        throw std::invalid_argument("bad date '" + std::string(text) + "'");
    return d;
}

}  // namespace cyber
