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

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "lmgeo/error.hpp"
#include "lmgeo/localizer.hpp"

using namespace lmgeo;

namespace {

BurstSummary landmark(const std::string& id, double lat, double lon, double rtt,
                      Continent c = Continent::kEU) {
  BurstSummary s;
  s.landmark_id = id;
  s.target_id = "t";
  s.min_rtt_ms = rtt;
  s.n_probes = 10;
  s.continent = c;
  s.landmark_pos = GeoPoint::make(lat, lon);
  return s;
}

// Min-RTT that the linear baseline maps to radius_km.
double rtt_for(double radius_km) { return radius_km / kLinearBaselineKmPerMs; }

// Landmarks scattered around a hidden target with radii equal to the true
// distance times a slack factor, so every cap contains the target. With
// surround set the bearings are spread evenly around the target.
LocalizationInput around(std::mt19937_64& rng, const GeoPoint& target, int n,
                         double slack_max, bool surround = false) {
  std::uniform_real_distribution<double> dist(100.0, 2500.0), bearing(0.0, 360.0),
      slack(1.0, slack_max), jitter(-20.0, 20.0);
  LocalizationInput in;
  in.target_id = "t";
  for (int i = 0; i < n; ++i) {
    const double b = surround ? 360.0 * i / n + jitter(rng) : bearing(rng);
    const GeoPoint p = destination(target, b, dist(rng));
    const double r = great_circle_distance(p, target) * slack(rng) + 1.0;
    in.summaries.push_back(landmark("L" + std::to_string(i), p.lat, p.lon, rtt_for(r)));
  }
  return in;
}

GeoPoint random_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lat(-60.0, 60.0), lon(-180.0, 180.0);
  return GeoPoint::make(lat(rng), lon(rng));
}

}  // namespace

TEST_CASE("single landmark returns its position") {
  LocalizationInput in{"t", {landmark("A", 30, 30, 12.0)}, {}};
  const auto r = localize(in, linear_baseline_model());
  CHECK(r.estimate == GeoPoint::make(30, 30));
  CHECK(r.diagnostics.single_landmark);
  CHECK(r.diagnostics.single_radius_km == doctest::Approx(12.0 * kLinearBaselineKmPerMs));
  CHECK(r.used_landmarks == std::vector<std::string>{"A"});
}

TEST_CASE("a cap disjoint from the tighter ones is discarded") {
  LocalizationInput in;
  in.target_id = "t";
  in.summaries = {landmark("A", 0, 0, rtt_for(300)), landmark("B", 0, 3, rtt_for(400)),
                  landmark("C", 2, 1, rtt_for(350)), landmark("D", 20, 20, rtt_for(1000))};
  const auto r = localize(in, linear_baseline_model());
  CHECK(r.used_landmarks == std::vector<std::string>{"A", "C", "B"});
  REQUIRE(r.discarded.size() == 1);
  CHECK(r.discarded[0].landmark_id == "D");
  CHECK(r.discarded[0].reason == LandmarkNote::kEmptyIntersection);

  std::vector<SphericalCap> used;
  for (const auto& s : in.summaries) {
    if (s.landmark_id != "D") {
      used.push_back(SphericalCap::make(s.landmark_pos, s.min_rtt_ms * kLinearBaselineKmPerMs,
                                        s.landmark_id));
    }
  }
  const auto grid = grid_oracle(used, 0.02);
  REQUIRE(grid.has_value());
  CHECK(great_circle_distance(grid->centroid, r.estimate) < 25.0);
}

TEST_CASE("intersection of three caps agrees with a grid") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = around(rng, random_point(rng), 3, 1.6);
    const auto r = localize(in, linear_baseline_model());
    std::vector<SphericalCap> caps;
    for (const auto& s : in.summaries) {
      caps.push_back(SphericalCap::make(s.landmark_pos, s.min_rtt_ms * kLinearBaselineKmPerMs,
                                        s.landmark_id));
    }
    REQUIRE(r.discarded.empty());
    const auto grid = grid_oracle(caps, 0.05);
    REQUIRE(grid.has_value());
    CHECK(great_circle_distance(grid->centroid, r.estimate) < 25.0);
  }
}

TEST_CASE("closest landmark") {
  LocalizationInput in{"t",
                       {landmark("A", 10, 10, 20.0), landmark("B", 20, 20, 15.0),
                        landmark("C", 30, 30, 40.0)},
                       {}};
  CHECK(closest_landmark(in) == GeoPoint::make(20, 20));
  LocalizationInput one{"t", {landmark("A", 10, 10, 20.0)}, {}};
  CHECK(closest_landmark(one) == GeoPoint::make(10, 10));
  LocalizationInput tie{"t", {landmark("B", 20, 20, 15.0), landmark("A", 10, 10, 15.0)}, {}};
  CHECK(closest_landmark(tie) == GeoPoint::make(10, 10));
  CHECK_THROWS_AS(closest_landmark(LocalizationInput{}), Error);
}

TEST_CASE("same continent filter") {
  LocalizationInput in{"t",
                       {landmark("A", 48, 2, 10, Continent::kEU),
                        landmark("B", 52, 13, 12, Continent::kEU),
                        landmark("C", 40, -74, 60, Continent::kNA)},
                       {}};
  const auto eu = same_continent_filter(in, Continent::kEU);
  CHECK(eu.summaries.size() == 2);
  CHECK(eu.target_continent == Continent::kEU);
  CHECK(in.summaries.size() == 3);
  const auto na = same_continent_filter(in, Continent::kNA);
  CHECK(na.summaries.size() == 1);
  try {
    same_continent_filter(in, Continent::kAS);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoLandmarks);
  }
}

TEST_CASE("invalid inputs") {
  LocalizationInput dup{"t", {landmark("A", 0, 0, 10), landmark("A", 1, 1, 12)}, {}};
  try {
    localize(dup, linear_baseline_model());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidArgument);
  }
  try {
    localize(LocalizationInput{}, linear_baseline_model());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoLandmarks);
  }
}

TEST_CASE("distance filter drops long radii") {
  LocalizationInput in{"t",
                       {landmark("A", 0, 0, rtt_for(300)), landmark("B", 0, 3, rtt_for(400)),
                        landmark("C", 5, 5, rtt_for(1200))},
                       {}};
  LocalizeOptions opts;
  opts.filter_km = 500.0;
  const auto r = localize(in, linear_baseline_model(), opts);
  CHECK(r.used_landmarks == std::vector<std::string>{"A", "B"});
  REQUIRE(r.discarded.size() == 1);
  CHECK(r.discarded[0].reason == LandmarkNote::kFilteredDistance);
  opts.filter_km = 100.0;
  try {
    localize(in, linear_baseline_model(), opts);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNoLandmarks);
  }
}

TEST_CASE("property: landmark order does not matter") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto in = around(rng, random_point(rng), 2 + trial % 6, 2.0);
    const auto a = localize(in, linear_baseline_model());
    std::shuffle(in.summaries.begin(), in.summaries.end(), rng);
    const auto b = localize(in, linear_baseline_model());
    CHECK(a.estimate == b.estimate);
    CHECK(a.used_landmarks == b.used_landmarks);
  }
}

TEST_CASE("property: every landmark is used, filtered or discarded exactly once") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> filter(300.0, 3000.0);
  for (int trial = 0; trial < 60; ++trial) {
    auto in = around(rng, random_point(rng), 3 + trial % 8, 3.0);
    // A cap that usually misses the target.
    in.summaries.push_back(landmark("far", 0, 0, rtt_for(50)));
    LocalizeOptions opts;
    if (trial % 2 == 0) opts.filter_km = filter(rng);
    LocalizationResult r;
    try {
      r = localize(in, linear_baseline_model(), opts);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNoLandmarks);
      continue;
    }
    std::multiset<std::string> seen(r.used_landmarks.begin(), r.used_landmarks.end());
    for (const auto& d : r.discarded) {
      seen.insert(d.landmark_id);
      if (d.reason == LandmarkNote::kFilteredDistance) {
        CHECK(r.radii_km.at(d.landmark_id) > *opts.filter_km);
      }
    }
    CHECK(seen.size() == in.summaries.size());
    CHECK(std::set<std::string>(seen.begin(), seen.end()).size() == seen.size());
    for (const auto& id : r.used_landmarks) {
      if (opts.filter_km) CHECK(r.radii_km.at(id) <= *opts.filter_km);
    }
  }
}

TEST_CASE("property: discarded caps miss the final region and used caps hold it") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> r(200.0, 3000.0), frac(0.0, 1.6),
      bearing(0.0, 360.0);
  int with_discards = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const GeoPoint anchor = random_point(rng);
    std::vector<SphericalCap> caps;
    for (int i = 0; i < 2 + trial % 5; ++i) {
      const double radius = r(rng);
      caps.push_back(SphericalCap::make(destination(anchor, bearing(rng), frac(rng) * radius),
                                        radius, "c" + std::to_string(i)));
    }
    const auto out = intersect_ordered(caps);
    if (!out.discarded.empty()) ++with_discards;
    for (const auto& id : out.discarded) {
      const auto it = std::find_if(caps.begin(), caps.end(),
                                   [&](const auto& c) { return c.landmark_id == id; });
      CHECK_FALSE(intersect(out.region, *it).has_value());
    }
    for (const auto& cap : out.region.source_caps) {
      for (const auto& v : out.region.vertices) CHECK(cap.contains(v));
    }
    CHECK(out.used.size() + out.discarded.size() == caps.size());
  }
  CHECK(with_discards > 0);
}

TEST_CASE("property: an exact model with enclosing landmarks lands near the truth") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const GeoPoint target = random_point(rng);
    const auto in = around(rng, target, 3 + trial % 6, 1.0, true);
    const auto r = localize(in, linear_baseline_model());
    CHECK(great_circle_distance(r.estimate, target) < 25.0);
  }
}

TEST_CASE("model fallbacks are flagged but kept") {
  DelayDistanceModel m = linear_baseline_model();
  m.kind = ModelKind::kContinent;
  LocalizationInput in{"t", {landmark("A", 0, 0, 5), landmark("B", 0, 1, 5)}, {}};
  const auto r = localize(in, m);
  CHECK(r.model_fallbacks.size() == 2);
  CHECK(r.used_landmarks.size() == 2);
  CHECK(r.discarded.empty());
}
