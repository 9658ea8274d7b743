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

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmgeo/geo.hpp"

namespace lmgeo {

enum class AccessTech { kWifi, k3G, k4G, kOtherNa };
enum class Continent { kAF, kAS, kEU, kNA, kOC, kSA };
enum class PositionSource { kGps, kNetwork };

std::string_view to_string(AccessTech tech);
std::string_view to_string(Continent continent);
std::string_view to_string(PositionSource source);
std::optional<AccessTech> parse_tech(std::string_view s);
std::optional<Continent> parse_continent(std::string_view s);
std::optional<PositionSource> parse_position_source(std::string_view s);

/// One landmark -> target burst as collected by a device.
struct MeasurementRecord {
  std::string landmark_id;
  GeoPoint start_pos;
  GeoPoint end_pos;
  AccessTech access_tech = AccessTech::kWifi;
  Continent continent = Continent::kEU;  // landmark's continent
  std::string target_id;
  std::optional<GeoPoint> target_pos;
  std::vector<double> rtts_ms;
  PositionSource position_source = PositionSource::kGps;
  bool tech_changed = false;

  bool operator==(const MeasurementRecord&) const = default;
};

// Maximum start/end displacement for a burst to be kept.
inline constexpr double kMaxDisplacementKm = 5.0;

enum class Verdict { kAccepted, kMobility, kTechChange, kNonGps, kObsoleteTech };

std::string_view to_string(Verdict verdict);

/// Throws Error(kParse) on structurally malformed records.
void check_well_formed(const MeasurementRecord& record);

/// require_tech is set when the active model is keyed by access technology.
Verdict validate(const MeasurementRecord& record, bool require_tech = false);

struct BurstSummary {
  std::string landmark_id;
  std::string target_id;
  double min_rtt_ms = 0.0;
  std::size_t n_probes = 0;
  AccessTech access_tech = AccessTech::kWifi;
  Continent continent = Continent::kEU;
  GeoPoint landmark_pos;
};

BurstSummary summarize(const MeasurementRecord& record);

struct StabilityPoint {
  std::size_t burst_prefix = 0;  // J
  double median_deviation_ms = 0.0;
};

struct StabilityCurve {
  std::vector<StabilityPoint> points;
};

/// Median over bursts of min(first J probes) - min(all probes), J = 1..B.
StabilityCurve stability_curve(std::span<const std::vector<double>> bursts);

// Canonical measurement CSV.

inline constexpr std::string_view kMeasurementHeader =
    "landmark_id,lat_start,lon_start,lat_end,lon_end,tech,continent,"
    "target_id,target_lat,target_lon,position_source,tech_changed,rtts_ms";

enum class MeasurementFormat { kCsv };

struct LineRejection {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string reason;
};

struct IngestResult {
  std::vector<MeasurementRecord> records;
  std::vector<LineRejection> rejections;
};

MeasurementRecord parse_measurement_line(std::string_view line);
std::string format_measurement_line(const MeasurementRecord& record);

IngestResult ingest_stream(std::istream& in);
IngestResult ingest(const std::filesystem::path& path,
                    MeasurementFormat format = MeasurementFormat::kCsv);
void write_measurements(const std::filesystem::path& path,
                        std::span<const MeasurementRecord> records);

// Side tables keyed by target id.

using TargetContinents = std::map<std::string, Continent>;
using GroundTruth = std::map<std::string, GeoPoint>;

TargetContinents read_target_continents(const std::filesystem::path& path);
void write_target_continents(const std::filesystem::path& path,
                             const TargetContinents& continents);
GroundTruth read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path,
                        const GroundTruth& truth);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view s);

}  // namespace lmgeo
