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
#include <optional>
#include <string>
#include <vector>

namespace lmgeo {

// Spherical Earth, IUGG mean radius.
inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfCircumferenceKm = kPi * kEarthRadiusKm;
// Boundary tolerance shared by every geometric predicate.
inline constexpr double kGeoEpsKm = 0.1;
inline constexpr int kDefaultBoundaryPoints = 720;

/// Latitude/longitude in degrees. Construct through make() to get the
/// range check and longitude normalization into (-180, 180].
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  static GeoPoint make(double lat, double lon);

  bool operator==(const GeoPoint&) const = default;
};

double normalize_lon(double lon);

using Vec3 = std::array<double, 3>;

Vec3 to_unit(const GeoPoint& p);
GeoPoint from_unit(const Vec3& v);

double great_circle_distance(const GeoPoint& a, const GeoPoint& b);

/// Initial bearing from a to b, degrees clockwise from north in [0, 360).
double initial_bearing(const GeoPoint& a, const GeoPoint& b);

/// Point reached travelling distance_km from origin along bearing_deg.
GeoPoint destination(const GeoPoint& origin, double bearing_deg,
                     double distance_km);

struct SphericalCap {
  GeoPoint center;
  double radius_km = 0.0;
  std::string landmark_id;

  static SphericalCap make(const GeoPoint& center, double radius_km,
                           std::string landmark_id = {});

  bool contains(const GeoPoint& p, double tolerance_km = kGeoEpsKm) const;
};

/// Boundary of a cap sampled at n_points equally spaced bearings, starting
/// north of the center and increasing clockwise.
std::vector<GeoPoint> cap_boundary(const SphericalCap& cap, int n_points);

/// Closed spherical polygon. Vertices run clockwise seen from outside the
/// sphere (interior on the right), matching cap_boundary order.
struct Region {
  std::vector<GeoPoint> vertices;
  std::vector<SphericalCap> source_caps;

  static Region from_cap(const SphericalCap& cap,
                         int n_points = kDefaultBoundaryPoints);

  std::vector<std::string> source_ids() const;
  double area_km2() const;
  bool contains(const GeoPoint& p) const;
};

/// Clips region to cap. Returns nullopt when the two do not overlap.
/// n_points sets the angular step used when walking along the cap boundary.
std::optional<Region> intersect(const Region& region, const SphericalCap& cap,
                                int n_points = kDefaultBoundaryPoints);

/// Area-weighted spherical centroid. Throws kGeometry when the vertex mean
/// direction vanishes.
GeoPoint barycenter(const Region& region);

struct GridEstimate {
  double area_km2 = 0.0;
  GeoPoint centroid;
  long cells = 0;
};

/// Brute-force membership over a lat-lon grid covering the smallest cap.
std::optional<GridEstimate> grid_oracle(const std::vector<SphericalCap>& caps,
                                        double resolution_deg);

}  // namespace lmgeo
