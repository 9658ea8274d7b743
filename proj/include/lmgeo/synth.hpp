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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lmgeo/geo.hpp"
#include "lmgeo/measurement.hpp"

namespace lmgeo {

enum class PlacementKind { kUniformSphere, kClustered };

struct ClusterCenter {
  Continent label = Continent::kEU;
  GeoPoint center;
  double weight = 1.0;
};

struct Placement {
  PlacementKind kind = PlacementKind::kClustered;
  std::vector<ClusterCenter> centers;
  double spread_km = 1500.0;

  /// One center per continent, weighted towards Europe and North America.
  static Placement default_clustered();
};

/// Ground-truth delay parameters of one access technology. A probe's RTT is
/// 2 * distance / km_per_ms + base latency + penalty + path shift + jitter,
/// where the path shift is drawn once per burst and the jitter per probe,
/// both exponential (zero mean disables them).
struct TechTruth {
  double base_latency_ms = 20.0;
  double km_per_ms = 80.0;
  double noise_mean_ms = 10.0;
  double path_noise_mean_ms = 0.0;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_landmarks = 100;
  std::size_t n_targets = 50;
  Placement placement = Placement::default_clustered();
  std::map<AccessTech, TechTruth> truth = default_truth();
  double intercontinental_penalty_ms = 40.0;
  std::size_t burst_length = 50;
  double loss_rate = 0.4;
  double mobility_rate = 0.0;
  // Probabilities of wifi, 3g, 4g.
  std::array<double, 3> tech_mix{0.6, 0.3, 0.1};
  // Each target draws the fraction of landmarks that probe it from
  // [participation_min, participation_max].
  double participation_min = 0.2;
  double participation_max = 1.0;

  static std::map<AccessTech, TechTruth> default_truth();
};

/// Throws Error(kInvalidArgument) with the offending field.
void validate_config(const SynthConfig& config);

std::string config_to_json(const SynthConfig& config);
/// Missing fields keep their defaults.
SynthConfig config_from_json(std::string_view json);

struct SynthOutput {
  std::vector<MeasurementRecord> records;
  GroundTruth truth;
  TargetContinents target_continents;
};

SynthOutput generate(const SynthConfig& config);

/// Nearest cluster center label (ties to the lexicographically first label),
/// or the fixed band table for uniform placement.
Continent continent_of(const GeoPoint& point, const Placement& placement);

/// Band table used for uniform placement and for targets without a label:
/// lon [-170, -30): na if lat >= 8 else sa; lon [-30, 60): eu if lat >= 35
/// else af; otherwise as if lat >= -10 else oc.
Continent continent_by_bands(const GeoPoint& point);

/// n complete bursts of length burst_length toward a target distance_km away.
std::vector<std::vector<double>> generate_bursts(const TechTruth& truth,
                                                 double distance_km,
                                                 std::size_t burst_length,
                                                 std::size_t n_bursts,
                                                 std::uint64_t seed);

}  // namespace lmgeo
