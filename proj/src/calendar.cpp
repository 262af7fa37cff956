#include "memaudit/calendar.hpp"

#include "memaudit/error.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace memaudit {

namespace {

using namespace std::chrono;

bool parse_uint(std::string_view s, unsigned& out) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::optional<Date> make_date(unsigned y, unsigned m, unsigned d) {
    Date date{year{static_cast<int>(y)}, month{m}, day{d}};
    if (!date.ok()) return std::nullopt;
    return date;
}

}  // namespace

Frequency parse_frequency(std::string_view text) {
    if (text == "daily") return Frequency::daily;
    if (text == "monthly") return Frequency::monthly;
    if (text == "quarterly") return Frequency::quarterly;
    throw DataError("unknown frequency '" + std::string(text) + "'");
}

std::string_view to_string(Frequency f) {
    switch (f) {
        case Frequency::daily: return "daily";
        case Frequency::monthly: return "monthly";
        case Frequency::quarterly: return "quarterly";
    }
    return "daily";
}

std::optional<Date> try_parse_iso_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    unsigned y = 0, m = 0, d = 0;
    if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
        !parse_uint(text.substr(8, 2), d)) {
        return std::nullopt;
    }
    return make_date(y, m, d);
}

Date parse_iso_date(std::string_view text) {
    if (auto d = try_parse_iso_date(text)) return *d;
    throw DataError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
}

Date parse_period(std::string_view text) {
    if (auto d = try_parse_iso_date(text)) return *d;
    unsigned y = 0, m = 0;
    if (text.size() == 7 && text[4] == '-' && parse_uint(text.substr(0, 4), y)) {
        if (text[5] == 'Q' && text[6] >= '1' && text[6] <= '4') {
            unsigned q = static_cast<unsigned>(text[6] - '0');
            return *make_date(y, 3 * (q - 1) + 1, 1);
        }
        if (parse_uint(text.substr(5, 2), m)) {
            if (auto d = make_date(y, m, 1)) return *d;
        }
    }
    throw DataError("invalid period '" + std::string(text) + "'");
}

std::optional<Date> try_parse_us_date(std::string_view text) {
    // Tolerate surrounding whitespace and single-digit month/day.
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    auto first = text.find('/');
    if (first == std::string_view::npos) return std::nullopt;
    auto second = text.find('/', first + 1);
    if (second == std::string_view::npos) return std::nullopt;
    unsigned m = 0, d = 0, y = 0;
    auto ms = text.substr(0, first);
    auto ds = text.substr(first + 1, second - first - 1);
    auto ys = text.substr(second + 1);
    if (ms.size() > 2 || ds.size() > 2 || ys.size() != 4) return std::nullopt;
    if (!parse_uint(ms, m) || !parse_uint(ds, d) || !parse_uint(ys, y)) return std::nullopt;
    return make_date(y, m, d);
}

std::string to_iso(Date d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                  static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
    return buf;
}

std::string period_key(Date d, Frequency f) {
    char buf[32];
    switch (f) {
        case Frequency::daily: return to_iso(d);
        case Frequency::monthly:
            std::snprintf(buf, sizeof buf, "%04d-%02u", year_of(d), month_of(d));
            return buf;
        case Frequency::quarterly:
            std::snprintf(buf, sizeof buf, "%04d-Q%d", year_of(d), quarter_of(d));
            return buf;
    }
    return to_iso(d);
}

int year_of(Date d) { return static_cast<int>(d.year()); }
unsigned month_of(Date d) { return static_cast<unsigned>(d.month()); }
unsigned day_of(Date d) { return static_cast<unsigned>(d.day()); }
int quarter_of(Date d) { return static_cast<int>((month_of(d) - 1) / 3 + 1); }

std::string_view month_name(unsigned month) {
    static constexpr std::array<std::string_view, 12> names{
        "January", "February", "March",     "April",   "May",      "June",
        "July",    "August",   "September", "October", "November", "December"};
    if (month < 1 || month > 12) throw PreconditionError("month out of range");
    return names[month - 1];
}

std::string long_date(Date d) {
    return std::string(month_name(month_of(d))) + " " + std::to_string(day_of(d)) + ", " +
           std::to_string(year_of(d));
}

std::string ordinal_date(Date d) {
    unsigned day = day_of(d);
    std::string_view suffix = "th";
    if (day % 100 < 11 || day % 100 > 13) {
        switch (day % 10) {
            case 1: suffix = "st"; break;
            case 2: suffix = "nd"; break;
            case 3: suffix = "rd"; break;
            default: break;
        }
    }
    return std::string(month_name(month_of(d))) + " " + std::to_string(day) + std::string(suffix) +
           ", " + std::to_string(year_of(d));
}

Date add_days(Date d, long n) { return Date{sys_days{d} + days{n}}; }

Date previous_day(Date d) { return add_days(d, -1); }

Date end_of_month(Date d) {
    year_month_day_last last{d.year(), month_day_last{d.month()}};
    return Date{last};
}

Date first_of_month(Date d) { return Date{d.year(), d.month(), day{1}}; }

long days_between(Date a, Date b) {
    return static_cast<long>((sys_days{a} - sys_days{b}).count());
}

}  // namespace memaudit
