#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stes/core/error.hpp"

namespace stes::ts {

inline constexpr std::size_t kHoursPerYear = 8760;
inline constexpr double kSecondsPerHour = 3600.0;

enum class Unit { Watt, Celsius, WattPerSquareMetre };

inline const char* unit_name(Unit u) {
  switch (u) {
    case Unit::Watt:
      return "W";
    case Unit::Celsius:
      return "degC";
    case Unit::WattPerSquareMetre:
      return "W/m2";
  }
  return "?";
}

/// Hourly, gap-free sequence of samples with a declared physical unit.
/// Temperatures must lie in [-60, 60] degC; powers and irradiances are >= 0.
class HourlySeries {
 public:
  HourlySeries() = default;

  HourlySeries(Unit unit, std::vector<double> values, std::int64_t start_epoch = 0)
      : unit_(unit), start_epoch_(start_epoch), values_(std::move(values)) {
    for (std::size_t k = 0; k < values_.size(); ++k) check_sample(values_[k], k);
  }

  Unit unit() const { return unit_; }
  std::int64_t start_epoch() const { return start_epoch_; }
  double step_seconds() const { return kSecondsPerHour; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }

  /// Sum of samples times the step, in unit-hours (e.g. Wh for a power series).
  double integral_unit_hours() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

  /// Contiguous sub-range [first, first + count) with the start time shifted accordingly.
  HourlySeries slice(std::size_t first, std::size_t count) const {
    if (first + count > values_.size()) throw DataError("series slice out of range");
    return HourlySeries(unit_,
                        std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                            values_.begin() + static_cast<std::ptrdiff_t>(first + count)),
                        start_epoch_ + static_cast<std::int64_t>(first) * 3600);
  }

 private:
  void check_sample(double v, std::size_t k) const {
    if (!std::isfinite(v)) {
      throw DataError("non-finite sample at index " + std::to_string(k));
    }
    if (unit_ == Unit::Celsius && (v < -60.0 || v > 60.0)) {
      throw DataError("temperature sample " + std::to_string(v) + " degC at index " + std::to_string(k) +
                      " outside [-60, 60]");
    }
    if (unit_ != Unit::Celsius && v < 0.0) {
      throw DataError("negative " + std::string(unit_name(unit_)) + " sample at index " + std::to_string(k));
    }
  }

  Unit unit_ = Unit::Watt;
  std::int64_t start_epoch_ = 0;
  std::vector<double> values_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.push_back(trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline bool to_lower_equals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const char ca = (a[i] >= 'A' && a[i] <= 'Z') ? static_cast<char>(a[i] - 'A' + 'a') : a[i];
    if (ca != b[i]) return false;
  }
  return true;
}

}  // namespace detail

/// Parses "YYYY-MM-DD HH:MM[:SS]" (space or 'T' separated, optional trailing 'Z')
/// or an integer count of seconds since the Unix epoch. Returns false on malformed input.
inline bool parse_timestamp(std::string_view s, std::int64_t& epoch) {
  if (detail::parse_number(s, epoch)) return true;
  if (!s.empty() && s.back() == 'Z') s.remove_suffix(1);
  int y = 0;
  unsigned mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != ' ' && s[10] != 'T') || s[13] != ':') {
    return false;
  }
  if (!detail::parse_number(s.substr(0, 4), y) || !detail::parse_number(s.substr(5, 2), mo) ||
      !detail::parse_number(s.substr(8, 2), d) || !detail::parse_number(s.substr(11, 2), hh) ||
      !detail::parse_number(s.substr(14, 2), mm)) {
    return false;
  }
  if (s.size() >= 19) {
    if (s[16] != ':' || !detail::parse_number(s.substr(17, 2), ss)) return false;
  }
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 60) return false;
  const auto days_since = sys_days{ymd}.time_since_epoch().count();
  epoch = static_cast<std::int64_t>(days_since) * 86400 + hh * 3600 + mm * 60 + ss;
  return true;
}

inline std::string format_timestamp(std::int64_t epoch) {
  using namespace std::chrono;
  const auto day_count = static_cast<int>(epoch >= 0 ? epoch / 86400 : (epoch - 86399) / 86400);
  const std::int64_t rem = epoch - static_cast<std::int64_t>(day_count) * 86400;
  const year_month_day ymd{sys_days{days{day_count}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                static_cast<int>((rem % 3600) / 60), static_cast<int>(rem % 60));
  return buf;
}

/// Reads a two-column `timestamp,value` CSV with a header row. Each error names
/// the offending data row (1-based, header excluded).
inline HourlySeries load_csv(const std::string& path, Unit unit, std::size_t expected_samples = kHoursPerYear) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open time series file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty; expected a header row");
  const auto header = detail::split(line);
  int ts_col = -1, val_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (detail::to_lower_equals(header[c], "timestamp")) ts_col = static_cast<int>(c);
    if (detail::to_lower_equals(header[c], "value")) val_col = static_cast<int>(c);
  }
  if (ts_col < 0 || val_col < 0) {
    throw DataError("'" + path + "': header must declare columns 'timestamp' and 'value'");
  }
  const auto needed = static_cast<std::size_t>(std::max(ts_col, val_col)) + 1;

  std::vector<double> values;
  values.reserve(expected_samples);
  std::int64_t first_epoch = 0, prev_epoch = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const std::string where = "'" + path + "' row " + std::to_string(row);
    const auto cells = detail::split(line);
    if (cells.size() < needed) throw DataError(where + ": expected at least " + std::to_string(needed) + " columns");
    std::int64_t epoch = 0;
    if (!parse_timestamp(cells[static_cast<std::size_t>(ts_col)], epoch)) {
      throw DataError(where + ": malformed timestamp '" + std::string(cells[static_cast<std::size_t>(ts_col)]) + "'");
    }
    if (row == 1) {
      first_epoch = epoch;
    } else if (epoch - prev_epoch != 3600) {
      throw DataError(where + ": timestamps must advance by exactly one hour");
    }
    prev_epoch = epoch;
    double v = 0.0;
    const auto cell = cells[static_cast<std::size_t>(val_col)];
    if (!detail::parse_number(cell, v) || !std::isfinite(v)) {
      throw DataError(where + ": non-numeric value '" + std::string(cell) + "'");
    }
    if (unit == Unit::Celsius && (v < -60.0 || v > 60.0)) {
      throw DataError(where + ": value " + std::string(cell) + " is not a plausible temperature in degC");
    }
    if (unit != Unit::Celsius && v < 0.0) {
      throw DataError(where + ": negative value " + std::string(cell) + " for unit " + unit_name(unit));
    }
    values.push_back(v);
  }
  if (values.size() != expected_samples) {
    throw DataError("'" + path + "': expected " + std::to_string(expected_samples) + " samples, found " +
                    std::to_string(values.size()));
  }
  return HourlySeries(unit, std::move(values), first_epoch);
}

inline void write_csv(const std::string& path, const HourlySeries& series) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "timestamp,value\n";
  char buf[64];
  for (std::size_t k = 0; k < series.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", series[k]);
    out << format_timestamp(series.start_epoch() + static_cast<std::int64_t>(k) * 3600) << ',' << buf << '\n';
  }
}

inline void require_same_length(const HourlySeries& a, const HourlySeries& b, const char* what) {
  if (a.size() != b.size()) {
    throw DataError(std::string(what) + ": series lengths differ (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
}

}  // namespace stes::ts
