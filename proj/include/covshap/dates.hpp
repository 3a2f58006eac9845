#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace covshap {

// Calendar date stored as days since 1970-01-01 (proleptic Gregorian).
struct Date {
    int32_t serial = 0;

    auto operator<=>(const Date&) const = default;

    Date operator+(int days) const { return Date{serial + days}; }
    Date operator-(int days) const { return Date{serial - days}; }
    int operator-(const Date& o) const { return serial - o.serial; }

    static Date from_ymd(int year, int month, int day);
    void to_ymd(int& year, int& month, int& day) const;

    std::string iso() const;  // YYYY-MM-DD
};

// "YYYY-MM-DD"
std::optional<Date> parse_iso_date(std::string_view s);
// JHU header style "M/D/YY" (also accepts M/D/YYYY)
std::optional<Date> parse_mdy_date(std::string_view s);

}  // namespace covshap
