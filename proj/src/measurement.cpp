// Copyright 2026 The lmgeo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lmgeo/measurement.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lmgeo/error.hpp"
#include "lmgeo/stats.hpp"

namespace lmgeo {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void parse_fail(const std::string& what) {
  throw Error(ErrorCode::kParse, what);
}

GeoPoint parse_point(std::string_view lat, std::string_view lon) {
  try {
    return GeoPoint::make(parse_double(lat), parse_double(lon));
  } catch (const Error& e) {
    parse_fail(e.what());
  }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  }
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::string_view to_string(AccessTech tech) {
  switch (tech) {
    case AccessTech::kWifi:
      return "wifi";
    case AccessTech::k3G:
      return "3g";
    case AccessTech::k4G:
      return "4g";
    case AccessTech::kOtherNa:
      return "na";
  }
  return "na";
}

std::string_view to_string(Continent continent) {
  switch (continent) {
    case Continent::kAF:
      return "af";
    case Continent::kAS:
      return "as";
    case Continent::kEU:
      return "eu";
    case Continent::kNA:
      return "na";
    case Continent::kOC:
      return "oc";
    case Continent::kSA:
      return "sa";
  }
  return "eu";
}

std::string_view to_string(PositionSource source) {
  return source == PositionSource::kGps ? "gps" : "network";
}

std::optional<AccessTech> parse_tech(std::string_view s) {
  if (s == "wifi") return AccessTech::kWifi;
  if (s == "3g") return AccessTech::k3G;
  if (s == "4g") return AccessTech::k4G;
  if (s == "na") return AccessTech::kOtherNa;
  return std::nullopt;
}

std::optional<Continent> parse_continent(std::string_view s) {
  if (s == "af") return Continent::kAF;
  if (s == "as") return Continent::kAS;
  if (s == "eu") return Continent::kEU;
  if (s == "na") return Continent::kNA;
  if (s == "oc") return Continent::kOC;
  if (s == "sa") return Continent::kSA;
  return std::nullopt;
}

std::optional<PositionSource> parse_position_source(std::string_view s) {
  if (s == "gps") return PositionSource::kGps;
  if (s == "network") return PositionSource::kNetwork;
  return std::nullopt;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kAccepted:
      return "ACCEPTED";
    case Verdict::kMobility:
      return "MOBILITY";
    case Verdict::kTechChange:
      return "TECH_CHANGE";
    case Verdict::kNonGps:
      return "NON_GPS";
    case Verdict::kObsoleteTech:
      return "OBSOLETE_TECH";
  }
  return "ACCEPTED";
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() ||
      !std::isfinite(value)) {
    throw Error(ErrorCode::kParse, "not a number: '" + std::string(s) + "'");
  }
  return value;
}

void check_well_formed(const MeasurementRecord& record) {
  if (record.rtts_ms.empty()) parse_fail("empty RTT list");
  for (double rtt : record.rtts_ms) {
    if (!std::isfinite(rtt) || rtt <= 0.0) {
      parse_fail("RTT must be positive, got " + format_double(rtt));
    }
  }
  auto check_point = [](const GeoPoint& p) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90.0 ||
        p.lat > 90.0 || p.lon <= -180.0 || p.lon > 180.0) {
      parse_fail("coordinates out of range");
    }
  };
  check_point(record.start_pos);
  check_point(record.end_pos);
  if (record.target_pos) check_point(*record.target_pos);
  if (record.landmark_id.empty() || record.target_id.empty()) {
    parse_fail("missing landmark or target id");
  }
}

Verdict validate(const MeasurementRecord& record, bool require_tech) {
  check_well_formed(record);
  if (great_circle_distance(record.start_pos, record.end_pos) >
      kMaxDisplacementKm) {
    return Verdict::kMobility;
  }
  if (record.tech_changed) return Verdict::kTechChange;
  if (record.position_source != PositionSource::kGps) return Verdict::kNonGps;
  if (require_tech && record.access_tech == AccessTech::kOtherNa) {
    return Verdict::kObsoleteTech;
  }
  return Verdict::kAccepted;
}

BurstSummary summarize(const MeasurementRecord& record) {
  check_well_formed(record);
  return BurstSummary{
      record.landmark_id,
      record.target_id,
      *std::min_element(record.rtts_ms.begin(), record.rtts_ms.end()),
      record.rtts_ms.size(),
      record.access_tech,
      record.continent,
      record.start_pos,
  };
}

StabilityCurve stability_curve(std::span<const std::vector<double>> bursts) {
  if (bursts.empty()) {
    throw Error(ErrorCode::kInsufficientData, "stability curve needs bursts");
  }
  const std::size_t len = bursts.front().size();
  if (len == 0) {
    throw Error(ErrorCode::kInvalidArgument, "bursts must be non-empty");
  }
  for (const auto& b : bursts) {
    if (b.size() != len) {
      throw Error(ErrorCode::kInvalidArgument,
                  "all bursts must have the same length");
    }
  }
  // deviations[j][i]: burst i, prefix length j + 1.
  std::vector<std::vector<double>> deviations(
      len, std::vector<double>(bursts.size()));
  for (std::size_t i = 0; i < bursts.size(); ++i) {
    const auto& b = bursts[i];
    const double overall = *std::min_element(b.begin(), b.end());
    double running = b[0];
    for (std::size_t j = 0; j < len; ++j) {
      running = std::min(running, b[j]);
      deviations[j][i] = running - overall;
    }
  }
  StabilityCurve curve;
  curve.points.reserve(len);
  for (std::size_t j = 0; j < len; ++j) {
    curve.points.push_back({j + 1, median(deviations[j])});
  }
  return curve;
}

MeasurementRecord parse_measurement_line(std::string_view line) {
  const auto f = split(line, ',');
  if (f.size() != 13) {
    parse_fail("expected 13 fields, got " + std::to_string(f.size()));
  }
  MeasurementRecord r;
  r.landmark_id = std::string(f[0]);
  r.start_pos = parse_point(f[1], f[2]);
  r.end_pos = parse_point(f[3], f[4]);
  const auto tech = parse_tech(f[5]);
  if (!tech) parse_fail("unknown tech '" + std::string(f[5]) + "'");
  r.access_tech = *tech;
  const auto cont = parse_continent(f[6]);
  if (!cont) parse_fail("unknown continent '" + std::string(f[6]) + "'");
  r.continent = *cont;
  r.target_id = std::string(f[7]);
  if (f[8].empty() != f[9].empty()) {
    parse_fail("target coordinates must be both present or both empty");
  }
  if (!f[8].empty()) r.target_pos = parse_point(f[8], f[9]);
  const auto src = parse_position_source(f[10]);
  if (!src) parse_fail("unknown position source '" + std::string(f[10]) + "'");
  r.position_source = *src;
  if (f[11] == "0" || f[11] == "false") {
    r.tech_changed = false;
  } else if (f[11] == "1" || f[11] == "true") {
    r.tech_changed = true;
  } else {
    parse_fail("tech_changed must be 0 or 1");
  }
  for (const auto tok : split(f[12], ';')) r.rtts_ms.push_back(parse_double(tok));
  check_well_formed(r);
  return r;
}

std::string format_measurement_line(const MeasurementRecord& r) {
  std::string s;
  s.reserve(64 + 8 * r.rtts_ms.size());
  s += r.landmark_id;
  s += ',';
  s += format_double(r.start_pos.lat);
  s += ',';
  s += format_double(r.start_pos.lon);
  s += ',';
  s += format_double(r.end_pos.lat);
  s += ',';
  s += format_double(r.end_pos.lon);
  s += ',';
  s += to_string(r.access_tech);
  s += ',';
  s += to_string(r.continent);
  s += ',';
  s += r.target_id;
  s += ',';
  if (r.target_pos) {
    s += format_double(r.target_pos->lat);
    s += ',';
    s += format_double(r.target_pos->lon);
  } else {
    s += ',';
  }
  s += ',';
  s += to_string(r.position_source);
  s += ',';
  s += r.tech_changed ? '1' : '0';
  s += ',';
  for (std::size_t i = 0; i < r.rtts_ms.size(); ++i) {
    if (i) s += ';';
    s += format_double(r.rtts_ms[i]);
  }
  return s;
}

IngestResult ingest_stream(std::istream& in) {
  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (!header_seen) {
      header_seen = true;
      if (line == kMeasurementHeader) continue;
      result.rejections.push_back({line_no, "missing or unexpected header"});
      continue;
    }
    if (line.empty()) continue;
    try {
      result.records.push_back(parse_measurement_line(line));
    } catch (const Error& e) {
      result.rejections.push_back({line_no, e.what()});
    }
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path,
                    MeasurementFormat /*format*/) {
  auto in = open_for_read(path);
  return ingest_stream(in);
}

void write_measurements(const std::filesystem::path& path,
                        std::span<const MeasurementRecord> records) {
  auto out = open_for_write(path);
  out << kMeasurementHeader << '\n';
  for (const auto& r : records) out << format_measurement_line(r) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

TargetContinents read_target_continents(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  TargetContinents out;
  std::string line;
  std::getline(in, line);
  strip_cr(line);
  if (line != "target_id,continent") {
    throw Error(ErrorCode::kParse, path.string() + ": bad header");
  }
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    const auto c = f.size() == 2 ? parse_continent(f[1]) : std::nullopt;
    if (!c) throw Error(ErrorCode::kParse, path.string() + ": bad line " + line);
    out[std::string(f[0])] = *c;
  }
  return out;
}

void write_target_continents(const std::filesystem::path& path,
                             const TargetContinents& continents) {
  auto out = open_for_write(path);
  out << "target_id,continent\n";
  for (const auto& [id, c] : continents) out << id << ',' << to_string(c) << '\n';
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  GroundTruth out;
  std::string line;
  std::getline(in, line);
  strip_cr(line);
  if (line != "target_id,lat,lon") {
    throw Error(ErrorCode::kParse, path.string() + ": bad header");
  }
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) {
      throw Error(ErrorCode::kParse, path.string() + ": bad line " + line);
    }
    out[std::string(f[0])] = parse_point(f[1], f[2]);
  }
  return out;
}

void write_ground_truth(const std::filesystem::path& path,
                        const GroundTruth& truth) {
  auto out = open_for_write(path);
  out << "target_id,lat,lon\n";
  for (const auto& [id, p] : truth) {
    out << id << ',' << format_double(p.lat) << ',' << format_double(p.lon)
        << '\n';
  }
}

}  // namespace lmgeo
