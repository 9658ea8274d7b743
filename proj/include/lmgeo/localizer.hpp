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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmgeo/calibration.hpp"
#include "lmgeo/geo.hpp"
#include "lmgeo/measurement.hpp"

namespace lmgeo {

struct LocalizationInput {
  std::string target_id;
  std::vector<BurstSummary> summaries;  // one per landmark
  std::optional<Continent> target_continent;
};

enum class LandmarkNote { kEmptyIntersection, kFilteredDistance, kModelFallback };

std::string_view to_string(LandmarkNote note);

struct LandmarkStatus {
  std::string landmark_id;
  LandmarkNote reason = LandmarkNote::kEmptyIntersection;
};

struct RegionDiagnostics {
  std::size_t vertex_count = 0;
  double area_km2 = 0.0;
  // Barycenter falls outside at least one used cap (crescent-shaped region).
  bool thin = false;
  // Region area below kSliverAreaKm2 at the end of the intersection.
  bool sliver = false;
  bool single_landmark = false;
  double single_radius_km = 0.0;
};

inline constexpr double kSliverAreaKm2 = 1.0;
// Largest radius handed to the geometry layer.
inline constexpr double kMaxCapRadiusKm = kHalfCircumferenceKm - 1.0;

struct LocalizationResult {
  GeoPoint estimate;
  std::vector<std::string> used_landmarks;     // in intersection order
  std::vector<LandmarkStatus> discarded;       // dropped constraints
  std::vector<LandmarkStatus> model_fallbacks; // still used, flagged only
  std::map<std::string, double> radii_km;
  RegionDiagnostics diagnostics;
};

struct LocalizeOptions {
  std::optional<double> filter_km;
  int n_points = kDefaultBoundaryPoints;
};

struct CapIntersection {
  GeoPoint estimate;
  Region region;
  std::vector<std::string> used;
  std::vector<std::string> discarded;
  RegionDiagnostics diagnostics;
};

/// Ordered soft-constraint intersection: caps sorted by radius (ties by
/// landmark id), the smallest seeds the region, every later cap either
/// narrows it or is discarded when the overlap is empty.
CapIntersection intersect_ordered(std::vector<SphericalCap> caps,
                                  int n_points = kDefaultBoundaryPoints);

LocalizationResult localize(const LocalizationInput& input,
                            const DelayDistanceModel& model,
                            const LocalizeOptions& options = {});

/// Position of the landmark with the smallest min-RTT.
GeoPoint closest_landmark(const LocalizationInput& input);

LocalizationInput same_continent_filter(const LocalizationInput& input,
                                        Continent target_continent);

}  // namespace lmgeo
