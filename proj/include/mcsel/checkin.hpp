#pragma once

// Loader for location check-in data: tab-separated lines of
// (user id, timestamp, latitude, longitude, location id), one record per line.

#include <charconv>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcsel {

struct CheckinRecord {
  long user_id = 0;
  std::string timestamp;
  double latitude = 0.0;
  double longitude = 0.0;
  long location_id = 0;
};

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, long line_no, const char* what) {
  T value{};
  const char* begin = field.data();
  const char* end = field.data() + field.size();
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc{} || result.ptr != end)
    throw std::runtime_error("check-in line " + std::to_string(line_no) + ": non-numeric " + what +
                             " '" + std::string(field) + "'");
  return value;
}

}  // namespace detail

// Parses records in input order. Blank lines are skipped; any malformed line
// raises an error naming the 1-based line number.
inline std::vector<CheckinRecord> load_checkins(std::istream& in) {
  std::vector<CheckinRecord> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_tabs(line);
    if (fields.size() != 5)
      throw std::runtime_error("check-in line " + std::to_string(line_no) + ": expected 5 fields, got " +
                               std::to_string(fields.size()));
    CheckinRecord rec;
    rec.user_id = detail::parse_number<long>(fields[0], line_no, "user id");
    rec.timestamp = std::string(fields[1]);
    rec.latitude = detail::parse_number<double>(fields[2], line_no, "latitude");
    rec.longitude = detail::parse_number<double>(fields[3], line_no, "longitude");
    rec.location_id = detail::parse_number<long>(fields[4], line_no, "location id");
    if (rec.latitude < -90.0 || rec.latitude > 90.0)
      throw std::runtime_error("check-in line " + std::to_string(line_no) + ": latitude out of range");
    if (rec.longitude < -180.0 || rec.longitude > 180.0)
      throw std::runtime_error("check-in line " + std::to_string(line_no) + ": longitude out of range");
    records.push_back(std::move(rec));
  }
  return records;
}

// Keeps records inside the closed latitude/longitude box.
inline std::vector<CheckinRecord> filter_bbox(std::span<const CheckinRecord> records, double lat_lo,
                                              double lat_hi, double lon_lo, double lon_hi) {
  if (lat_lo > lat_hi || lon_lo > lon_hi)
    throw std::invalid_argument("filter_bbox: inverted range");
  std::vector<CheckinRecord> kept;
  for (const auto& r : records) {
    if (r.latitude >= lat_lo && r.latitude <= lat_hi && r.longitude >= lon_lo &&
        r.longitude <= lon_hi)
      kept.push_back(r);
  }
  return kept;
}

}  // namespace mcsel
