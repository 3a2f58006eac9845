#include "covshap/dates.hpp"

#include <charconv>
#include <cstdio>

namespace covshap {

namespace {

// Days-from-civil and inverse, Howard Hinnant's public-domain algorithms.
int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t yy = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool valid_ymd(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1) return false;
    static const int days_in[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dim = days_in[m - 1];
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) dim = 29;
    return d <= dim;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
    return Date{static_cast<int32_t>(days_from_civil(year, month, day))};
}

void Date::to_ymd(int& year, int& month, int& day) const {
    civil_from_days(serial, year, month, day);
}

std::string Date::iso() const {
    int y, m, d;
    to_ymd(y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
}

std::optional<Date> parse_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y, m, d;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), m) ||
        !parse_int(s.substr(8, 2), d))
        return std::nullopt;
    if (!valid_ymd(y, m, d)) return std::nullopt;
    return Date::from_ymd(y, m, d);
}

std::optional<Date> parse_mdy_date(std::string_view s) {
    size_t p1 = s.find('/');
    if (p1 == std::string_view::npos) return std::nullopt;
    size_t p2 = s.find('/', p1 + 1);
    if (p2 == std::string_view::npos) return std::nullopt;
    int m, d, y;
    if (!parse_int(s.substr(0, p1), m) ||
        !parse_int(s.substr(p1 + 1, p2 - p1 - 1), d) ||
        !parse_int(s.substr(p2 + 1), y))
        return std::nullopt;
    if (y < 100) y += 2000;
    if (!valid_ymd(y, m, d)) return std::nullopt;
    return Date::from_ymd(y, m, d);
}

}  // namespace covshap
