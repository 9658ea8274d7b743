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

#include "lmgeo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <random>
#include <set>

#include "lmgeo/error.hpp"

namespace lmgeo {

namespace {

using json = nlohmann::json;

constexpr std::array<AccessTech, 3> kMixOrder{AccessTech::kWifi, AccessTech::k3G,
                                              AccessTech::k4G};

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, "synth config: " + what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

std::string padded_id(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%05zu", prefix, i);
  return buf;
}

GeoPoint uniform_on_sphere(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> z_dist(-1.0, 1.0);
  std::uniform_real_distribution<double> lon_dist(-180.0, 180.0);
  const double z = z_dist(rng);
  const double lon = lon_dist(rng);
  return GeoPoint::make(std::asin(z) * 180.0 / kPi, lon);
}

GeoPoint place(const Placement& placement, std::mt19937_64& rng) {
  if (placement.kind == PlacementKind::kUniformSphere) {
    return uniform_on_sphere(rng);
  }
  std::vector<double> weights;
  for (const auto& c : placement.centers) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& center = placement.centers[pick(rng)];
  const double bearing = 360.0 * unit(rng);
  const double dist = placement.spread_km * std::sqrt(unit(rng));
  return destination(center.center, bearing, dist);
}

double exponential(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0.0;
  std::exponential_distribution<double> d(1.0 / mean);
  return d(rng);
}

json truth_to_json(const TechTruth& t) {
  return json{{"base_latency_ms", t.base_latency_ms},
              {"km_per_ms", t.km_per_ms},
              {"noise_mean_ms", t.noise_mean_ms},
              {"path_noise_mean_ms", t.path_noise_mean_ms}};
}

TechTruth truth_from_json(const json& j, TechTruth t) {
  t.base_latency_ms = j.value("base_latency_ms", t.base_latency_ms);
  t.km_per_ms = j.value("km_per_ms", t.km_per_ms);
  t.noise_mean_ms = j.value("noise_mean_ms", t.noise_mean_ms);
  t.path_noise_mean_ms = j.value("path_noise_mean_ms", t.path_noise_mean_ms);
  return t;
}

}  // namespace

Placement Placement::default_clustered() {
  Placement p;
  p.kind = PlacementKind::kClustered;
  p.spread_km = 1500.0;
  p.centers = {
      {Continent::kAF, GeoPoint::make(5.0, 20.0), 0.07},
      {Continent::kAS, GeoPoint::make(30.0, 105.0), 0.15},
      {Continent::kEU, GeoPoint::make(48.0, 10.0), 0.30},
      {Continent::kNA, GeoPoint::make(40.0, -95.0), 0.30},
      {Continent::kOC, GeoPoint::make(-28.0, 140.0), 0.10},
      {Continent::kSA, GeoPoint::make(-15.0, -58.0), 0.08},
  };
  return p;
}

std::map<AccessTech, TechTruth> SynthConfig::default_truth() {
  return {
      {AccessTech::kWifi, {20.0, 80.0, 8.0, 4.0}},
      {AccessTech::k3G, {60.0, 70.0, 25.0, 12.0}},
      {AccessTech::k4G, {35.0, 80.0, 15.0, 8.0}},
  };
}

void validate_config(const SynthConfig& c) {
  if (c.n_landmarks < 1) invalid("need at least one landmark");
  if (c.n_targets < 1) invalid("need at least one target");
  if (c.burst_length < 1) invalid("burst length must be >= 1");
  if (!is_probability(c.loss_rate) || c.loss_rate >= 1.0) {
    invalid("loss rate must be in [0, 1)");
  }
  if (!is_probability(c.mobility_rate)) invalid("mobility rate must be in [0, 1]");
  if (!is_probability(c.participation_min) ||
      !is_probability(c.participation_max) ||
      c.participation_min > c.participation_max) {
    invalid("participation range must satisfy 0 <= min <= max <= 1");
  }
  double mix = 0.0;
  for (std::size_t i = 0; i < c.tech_mix.size(); ++i) {
    if (!is_probability(c.tech_mix[i])) invalid("tech mix entries must be in [0, 1]");
    mix += c.tech_mix[i];
    if (c.tech_mix[i] > 0.0 && !c.truth.count(kMixOrder[i])) {
      invalid("missing truth parameters for " +
              std::string(to_string(kMixOrder[i])));
    }
  }
  if (std::abs(mix - 1.0) > 1e-9) invalid("tech mix must sum to 1");
  for (const auto& [tech, t] : c.truth) {
    if (!(t.km_per_ms > 0.0)) invalid("km_per_ms must be > 0");
    if (t.base_latency_ms < 0.0 || t.noise_mean_ms < 0.0 ||
        t.path_noise_mean_ms < 0.0) {
      invalid("latencies and noise means must be non-negative");
    }
  }
  if (c.intercontinental_penalty_ms < 0.0) invalid("penalty must be >= 0");
  if (c.placement.kind == PlacementKind::kClustered) {
    if (c.placement.centers.empty()) invalid("clustered placement needs centers");
    if (!(c.placement.spread_km >= 0.0)) invalid("spread must be >= 0");
    for (const auto& cc : c.placement.centers) {
      if (!(cc.weight > 0.0)) invalid("cluster weights must be > 0");
    }
  }
}

std::string config_to_json(const SynthConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["n_landmarks"] = c.n_landmarks;
  j["n_targets"] = c.n_targets;
  json placement;
  placement["kind"] =
      c.placement.kind == PlacementKind::kClustered ? "clustered" : "uniform";
  placement["spread_km"] = c.placement.spread_km;
  placement["centers"] = json::array();
  for (const auto& cc : c.placement.centers) {
    placement["centers"].push_back({{"label", to_string(cc.label)},
                                    {"lat", cc.center.lat},
                                    {"lon", cc.center.lon},
                                    {"weight", cc.weight}});
  }
  j["placement"] = placement;
  j["truth"] = json::object();
  for (const auto& [tech, t] : c.truth) {
    j["truth"][std::string(to_string(tech))] = truth_to_json(t);
  }
  j["intercontinental_penalty_ms"] = c.intercontinental_penalty_ms;
  j["burst_length"] = c.burst_length;
  j["loss_rate"] = c.loss_rate;
  j["mobility_rate"] = c.mobility_rate;
  j["tech_mix"] = {{"wifi", c.tech_mix[0]}, {"3g", c.tech_mix[1]}, {"4g", c.tech_mix[2]}};
  j["participation"] = {c.participation_min, c.participation_max};
  return j.dump(2) + "\n";
}

SynthConfig config_from_json(std::string_view text) {
  SynthConfig c;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) invalid("config must be a JSON object");
    static const std::set<std::string> known{
        "seed", "n_landmarks", "n_targets", "placement", "truth",
        "intercontinental_penalty_ms", "burst_length", "loss_rate",
        "mobility_rate", "tech_mix", "participation"};
    for (const auto& [key, val] : j.items()) {
      if (!known.count(key)) invalid("unknown config key '" + key + "'");
    }
    c.seed = j.value("seed", c.seed);
    c.n_landmarks = j.value("n_landmarks", c.n_landmarks);
    c.n_targets = j.value("n_targets", c.n_targets);
    if (j.contains("placement")) {
      const auto& p = j["placement"];
      const std::string kind = p.value("kind", std::string("clustered"));
      if (kind == "uniform") {
        c.placement.kind = PlacementKind::kUniformSphere;
      } else if (kind == "clustered") {
        c.placement.kind = PlacementKind::kClustered;
      } else {
        invalid("unknown placement '" + kind + "'");
      }
      c.placement.spread_km = p.value("spread_km", c.placement.spread_km);
      if (p.contains("centers")) {
        c.placement.centers.clear();
        for (const auto& cc : p["centers"]) {
          const auto label = parse_continent(cc.at("label").get<std::string>());
          if (!label) invalid("unknown continent label in centers");
          c.placement.centers.push_back(
              {*label,
               GeoPoint::make(cc.at("lat").get<double>(), cc.at("lon").get<double>()),
               cc.value("weight", 1.0)});
        }
      }
    }
    if (j.contains("truth")) {
      for (const auto& [key, val] : j["truth"].items()) {
        const auto tech = parse_tech(key);
        if (!tech) invalid("unknown tech '" + key + "' in truth");
        const TechTruth base =
            c.truth.count(*tech) ? c.truth.at(*tech) : TechTruth{};
        c.truth[*tech] = truth_from_json(val, base);
      }
    }
    c.intercontinental_penalty_ms =
        j.value("intercontinental_penalty_ms", c.intercontinental_penalty_ms);
    c.burst_length = j.value("burst_length", c.burst_length);
    c.loss_rate = j.value("loss_rate", c.loss_rate);
    c.mobility_rate = j.value("mobility_rate", c.mobility_rate);
    if (j.contains("tech_mix")) {
      const auto& m = j["tech_mix"];
      c.tech_mix = {m.value("wifi", 0.0), m.value("3g", 0.0), m.value("4g", 0.0)};
    }
    if (j.contains("participation")) {
      c.participation_min = j["participation"].at(0).get<double>();
      c.participation_max = j["participation"].at(1).get<double>();
    }
  } catch (const json::exception& e) {
    invalid(e.what());
  }
  return c;
}

Continent continent_by_bands(const GeoPoint& p) {
  if (p.lon >= -170.0 && p.lon < -30.0) {
    return p.lat >= 8.0 ? Continent::kNA : Continent::kSA;
  }
  if (p.lon >= -30.0 && p.lon < 60.0) {
    return p.lat >= 35.0 ? Continent::kEU : Continent::kAF;
  }
  return p.lat >= -10.0 ? Continent::kAS : Continent::kOC;
}

Continent continent_of(const GeoPoint& point, const Placement& placement) {
  if (placement.kind == PlacementKind::kUniformSphere ||
      placement.centers.empty()) {
    return continent_by_bands(point);
  }
  const ClusterCenter* best = nullptr;
  double best_d = 0.0;
  for (const auto& c : placement.centers) {
    const double d = great_circle_distance(point, c.center);
    if (!best || d < best_d ||
        (d == best_d && to_string(c.label) < to_string(best->label))) {
      best = &c;
      best_d = d;
    }
  }
  return best->label;
}

SynthOutput generate(const SynthConfig& config) {
  validate_config(config);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Site {
    std::string id;
    GeoPoint pos;
    Continent continent;
  };
  std::vector<Site> landmarks;
  for (std::size_t i = 0; i < config.n_landmarks; ++i) {
    const GeoPoint p = place(config.placement, rng);
    landmarks.push_back({padded_id('L', i), p, continent_of(p, config.placement)});
  }
  std::vector<Site> targets;
  for (std::size_t i = 0; i < config.n_targets; ++i) {
    const GeoPoint p = place(config.placement, rng);
    targets.push_back({padded_id('T', i), p, continent_of(p, config.placement)});
  }

  SynthOutput out;
  std::discrete_distribution<std::size_t> tech_pick(config.tech_mix.begin(),
                                                    config.tech_mix.end());
  for (const auto& t : targets) {
    out.truth[t.id] = t.pos;
    out.target_continents[t.id] = t.continent;
    const double participation =
        config.participation_min +
        (config.participation_max - config.participation_min) * unit(rng);
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
      if (unit(rng) < participation) chosen.push_back(i);
    }
    if (chosen.empty()) {
      std::uniform_int_distribution<std::size_t> any(0, landmarks.size() - 1);
      chosen.push_back(any(rng));
    }
    for (const std::size_t li : chosen) {
      const Site& l = landmarks[li];
      const AccessTech tech = kMixOrder[tech_pick(rng)];
      const TechTruth& truth = config.truth.at(tech);
      const double distance = great_circle_distance(l.pos, t.pos);
      double floor_rtt = 2.0 * distance / truth.km_per_ms + truth.base_latency_ms;
      if (l.continent != t.continent) {
        floor_rtt += config.intercontinental_penalty_ms;
      }
      const double path_shift = exponential(rng, truth.path_noise_mean_ms);

      MeasurementRecord r;
      r.landmark_id = l.id;
      r.start_pos = l.pos;
      r.end_pos = l.pos;
      if (config.mobility_rate > 0.0 && unit(rng) < config.mobility_rate) {
        r.end_pos = destination(l.pos, 360.0 * unit(rng), 6.0 + 14.0 * unit(rng));
      }
      r.access_tech = tech;
      r.continent = l.continent;
      r.target_id = t.id;
      r.target_pos = t.pos;
      for (std::size_t k = 0; k < config.burst_length; ++k) {
        const bool lost = config.loss_rate > 0.0 && unit(rng) < config.loss_rate;
        const double jitter = exponential(rng, truth.noise_mean_ms);
        if (!lost) r.rtts_ms.push_back(floor_rtt + path_shift + jitter);
      }
      if (r.rtts_ms.empty()) continue;
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<std::vector<double>> generate_bursts(const TechTruth& truth,
                                                 double distance_km,
                                                 std::size_t burst_length,
                                                 std::size_t n_bursts,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double floor_rtt =
      2.0 * distance_km / truth.km_per_ms + truth.base_latency_ms;
  std::vector<std::vector<double>> bursts(n_bursts);
  for (auto& b : bursts) {
    const double shift = exponential(rng, truth.path_noise_mean_ms);
    b.reserve(burst_length);
    for (std::size_t k = 0; k < burst_length; ++k) {
      b.push_back(floor_rtt + shift + exponential(rng, truth.noise_mean_ms));
    }
  }
  return bursts;
}

}  // namespace lmgeo
