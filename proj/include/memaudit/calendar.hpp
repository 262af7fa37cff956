#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace memaudit {

using Date = std::chrono::year_month_day;

enum class Frequency { daily, monthly, quarterly };

Frequency parse_frequency(std::string_view text);
std::string_view to_string(Frequency f);

/// Strict `YYYY-MM-DD`. Throws DataError.
Date parse_iso_date(std::string_view text);
std::optional<Date> try_parse_iso_date(std::string_view text);

/// Accepts `YYYY-MM-DD`, `YYYY-MM` (first day of month) and `YYYY-Qn`
/// (first day of quarter). Throws DataError.
Date parse_period(std::string_view text);

/// `mm/dd/yyyy`, the date format requested from the model.
std::optional<Date> try_parse_us_date(std::string_view text);

std::string to_iso(Date d);

/// `YYYY-MM-DD`, `YYYY-MM` or `YYYY-Qn` depending on the frequency.
std::string period_key(Date d, Frequency f);

int year_of(Date d);
unsigned month_of(Date d);
unsigned day_of(Date d);
int quarter_of(Date d);

/// English long month name, 1-based.
std::string_view month_name(unsigned month);

/// "March 15, 2019"
std::string long_date(Date d);
/// "December 31st, 2010"
std::string ordinal_date(Date d);

Date add_days(Date d, long n);
Date previous_day(Date d);
Date end_of_month(Date d);
Date first_of_month(Date d);

/// a - b in calendar days.
long days_between(Date a, Date b);

}  // namespace memaudit
