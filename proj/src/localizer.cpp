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

#include "lmgeo/localizer.hpp"

#include <algorithm>
#include <set>

#include "lmgeo/error.hpp"

namespace lmgeo {

namespace {

void check_input(const LocalizationInput& input) {
  if (input.summaries.empty()) {
    throw Error(ErrorCode::kNoLandmarks,
                "target " + input.target_id + " has no landmarks");
  }
  std::set<std::string_view> seen;
  for (const auto& s : input.summaries) {
    if (!seen.insert(s.landmark_id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate landmark " + s.landmark_id + " for target " +
                      input.target_id);
    }
  }
}

bool uses_continent(ModelKind kind) {
  return kind == ModelKind::kContinent || kind == ModelKind::kHybrid;
}

}  // namespace

std::string_view to_string(LandmarkNote note) {
  switch (note) {
    case LandmarkNote::kEmptyIntersection:
      return "EMPTY_INTERSECTION";
    case LandmarkNote::kFilteredDistance:
      return "FILTERED_DISTANCE";
    case LandmarkNote::kModelFallback:
      return "MODEL_FALLBACK_EXCLUDED";
  }
  return "EMPTY_INTERSECTION";
}

CapIntersection intersect_ordered(std::vector<SphericalCap> caps,
                                  int n_points) {
  if (caps.empty()) {
    throw Error(ErrorCode::kNoLandmarks, "no caps to intersect");
  }
  std::sort(caps.begin(), caps.end(), [](const auto& a, const auto& b) {
    if (a.radius_km != b.radius_km) return a.radius_km < b.radius_km;
    return a.landmark_id < b.landmark_id;
  });

  CapIntersection out;
  out.region = Region::from_cap(caps.front(), n_points);
  out.used.push_back(caps.front().landmark_id);
  for (std::size_t i = 1; i < caps.size(); ++i) {
    if (auto next = intersect(out.region, caps[i], n_points)) {
      out.region = std::move(*next);
      out.used.push_back(caps[i].landmark_id);
    } else {
      out.discarded.push_back(caps[i].landmark_id);
    }
  }

  auto& diag = out.diagnostics;
  diag.vertex_count = out.region.vertices.size();
  diag.area_km2 = out.region.area_km2();
  diag.sliver = diag.area_km2 < kSliverAreaKm2;
  if (caps.size() == 1) {
    diag.single_landmark = true;
    diag.single_radius_km = caps.front().radius_km;
    out.estimate = caps.front().center;
    return out;
  }
  out.estimate = barycenter(out.region);
  for (const auto& cap : out.region.source_caps) {
    if (!cap.contains(out.estimate, kGeoEpsKm)) {
      diag.thin = true;
      break;
    }
  }
  return out;
}

LocalizationResult localize(const LocalizationInput& input,
                            const DelayDistanceModel& model,
                            const LocalizeOptions& options) {
  check_input(input);
  LocalizationResult result;
  std::vector<SphericalCap> caps;
  for (const auto& s : input.summaries) {
    DistanceEstimate est;
    if (uses_continent(model.kind) && !input.target_continent) {
      est = {model.fallback.evaluate(s.min_rtt_ms), true};
    } else {
      const bool same = input.target_continent &&
                        *input.target_continent == s.continent;
      est = estimate_distance(model, s.min_rtt_ms, s.access_tech, same);
    }
    result.radii_km[s.landmark_id] = est.km;
    if (options.filter_km && est.km > *options.filter_km) {
      result.discarded.push_back(
          {s.landmark_id, LandmarkNote::kFilteredDistance});
      continue;
    }
    if (est.fell_back) {
      result.model_fallbacks.push_back(
          {s.landmark_id, LandmarkNote::kModelFallback});
    }
    caps.push_back(SphericalCap::make(
        s.landmark_pos, std::min(est.km, kMaxCapRadiusKm), s.landmark_id));
  }
  if (caps.empty()) {
    throw Error(ErrorCode::kNoLandmarks,
                "all landmarks of target " + input.target_id +
                    " were filtered out");
  }
  auto region = intersect_ordered(std::move(caps), options.n_points);
  result.estimate = region.estimate;
  result.used_landmarks = std::move(region.used);
  for (auto& id : region.discarded) {
    result.discarded.push_back({std::move(id), LandmarkNote::kEmptyIntersection});
  }
  result.diagnostics = region.diagnostics;
  return result;
}

GeoPoint closest_landmark(const LocalizationInput& input) {
  check_input(input);
  const auto best = std::min_element(
      input.summaries.begin(), input.summaries.end(),
      [](const auto& a, const auto& b) {
        if (a.min_rtt_ms != b.min_rtt_ms) return a.min_rtt_ms < b.min_rtt_ms;
        return a.landmark_id < b.landmark_id;
      });
  return best->landmark_pos;
}

LocalizationInput same_continent_filter(const LocalizationInput& input,
                                        Continent target_continent) {
  LocalizationInput out;
  out.target_id = input.target_id;
  out.target_continent = target_continent;
  for (const auto& s : input.summaries) {
    if (s.continent == target_continent) out.summaries.push_back(s);
  }
  if (out.summaries.empty()) {
    throw Error(ErrorCode::kNoLandmarks,
                "no landmark of target " + input.target_id +
                    " is in its continent");
  }
  return out;
}

}  // namespace lmgeo
