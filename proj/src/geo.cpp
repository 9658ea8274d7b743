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

#include "lmgeo/geo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lmgeo/error.hpp"

namespace lmgeo {

namespace {

constexpr double kDeg = kPi / 180.0;

double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

Vec3 add(const Vec3& a, const Vec3& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

Vec3 scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 normalized(const Vec3& a) { return scale(a, 1.0 / norm(a)); }

// Local north/east basis at a unit vector. At the poles east is fixed to +y.
void local_frame(const Vec3& c, Vec3& north, Vec3& east) {
  Vec3 e{-c[1], c[0], 0.0};
  const double n = norm(e);
  if (n < 1e-12) {
    e = {0.0, 1.0, 0.0};
  } else {
    e = scale(e, 1.0 / n);
  }
  east = e;
  north = cross(c, e);
}

Vec3 point_at(const Vec3& c, const Vec3& north, const Vec3& east,
              double bearing_rad, double angle_rad) {
  const Vec3 dir = add(scale(north, std::cos(bearing_rad)),
                       scale(east, std::sin(bearing_rad)));
  return normalized(add(scale(c, std::cos(angle_rad)),
                        scale(dir, std::sin(angle_rad))));
}

double bearing_of(const Vec3& north, const Vec3& east, const Vec3& p) {
  double b = std::atan2(dot(p, east), dot(p, north)) / kDeg;
  if (b < 0.0) b += 360.0;
  if (b >= 360.0) b -= 360.0;
  return b;
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

Vec3 slerp(const Vec3& a, const Vec3& b, double theta, double t) {
  if (theta < 1e-15) return a;
  const double s = std::sin(theta);
  return normalized(add(scale(a, std::sin((1.0 - t) * theta) / s),
                        scale(b, std::sin(t * theta) / s)));
}

// Signed spherical excess of triangle (a, b, c); positive when
// counter-clockwise seen from outside.
double signed_excess(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double triple = dot(a, cross(b, c));
  const double denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
  return 2.0 * std::atan2(triple, denom);
}

std::vector<Vec3> unit_vertices(const Region& region) {
  std::vector<Vec3> out;
  out.reserve(region.vertices.size());
  for (const auto& v : region.vertices) out.push_back(to_unit(v));
  return out;
}

bool winding_contains(const std::vector<Vec3>& poly, const Vec3& p) {
  if (poly.size() < 3) return false;
  double total = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& a = poly[i];
    const Vec3& b = poly[(i + 1) % n];
    const Vec3 ta = add(a, scale(p, -dot(a, p)));
    const Vec3 tb = add(b, scale(p, -dot(b, p)));
    total += std::atan2(dot(p, cross(ta, tb)), dot(ta, tb));
  }
  return std::abs(total) > kPi;
}

}  // namespace

double normalize_lon(double lon) {
  double x = std::fmod(lon, 360.0);
  if (x <= -180.0) x += 360.0;
  if (x > 180.0) x -= 360.0;
  return x;
}

GeoPoint GeoPoint::make(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 ||
      lat > 90.0) {
    std::ostringstream msg;
    msg << "invalid coordinates (" << lat << ", " << lon << ")";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  return GeoPoint{lat, normalize_lon(lon)};
}

Vec3 to_unit(const GeoPoint& p) {
  const double lat = p.lat * kDeg;
  const double lon = p.lon * kDeg;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
          std::sin(lat)};
}

GeoPoint from_unit(const Vec3& v) {
  const double n = norm(v);
  const double lat = std::asin(std::clamp(v[2] / n, -1.0, 1.0)) / kDeg;
  const double lon = std::atan2(v[1], v[0]) / kDeg;
  return GeoPoint{lat, normalize_lon(lon)};
}

double great_circle_distance(const GeoPoint& a, const GeoPoint& b) {
  // Haversine.
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h =
      s1 * s1 + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double initial_bearing(const GeoPoint& a, const GeoPoint& b) {
  const Vec3 c = to_unit(a);
  Vec3 north, east;
  local_frame(c, north, east);
  return bearing_of(north, east, to_unit(b));
}

GeoPoint destination(const GeoPoint& origin, double bearing_deg,
                     double distance_km) {
  const Vec3 c = to_unit(origin);
  Vec3 north, east;
  local_frame(c, north, east);
  return from_unit(point_at(c, north, east, bearing_deg * kDeg,
                            distance_km / kEarthRadiusKm));
}

SphericalCap SphericalCap::make(const GeoPoint& center, double radius_km,
                                std::string landmark_id) {
  if (!(radius_km > 0.0) || radius_km > kHalfCircumferenceKm) {
    std::ostringstream msg;
    msg << "cap radius " << radius_km << " km outside (0, "
        << kHalfCircumferenceKm << "]";
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }
  return SphericalCap{center, radius_km, std::move(landmark_id)};
}

bool SphericalCap::contains(const GeoPoint& p, double tolerance_km) const {
  return great_circle_distance(center, p) <= radius_km + tolerance_km;
}

std::vector<GeoPoint> cap_boundary(const SphericalCap& cap, int n_points) {
  if (n_points < 8) {
    throw Error(ErrorCode::kInvalidArgument,
                "cap boundary needs at least 8 points");
  }
  if (cap.radius_km >= kHalfCircumferenceKm - kGeoEpsKm) {
    throw Error(ErrorCode::kGeometry, "cap covers the whole sphere");
  }
  const Vec3 c = to_unit(cap.center);
  Vec3 north, east;
  local_frame(c, north, east);
  const double angle = cap.radius_km / kEarthRadiusKm;
  std::vector<GeoPoint> out;
  out.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double bearing = 2.0 * kPi * i / n_points;
    out.push_back(from_unit(point_at(c, north, east, bearing, angle)));
  }
  return out;
}

Region Region::from_cap(const SphericalCap& cap, int n_points) {
  return Region{cap_boundary(cap, n_points), {cap}};
}

std::vector<std::string> Region::source_ids() const {
  std::vector<std::string> ids;
  ids.reserve(source_caps.size());
  for (const auto& c : source_caps) ids.push_back(c.landmark_id);
  return ids;
}

double Region::area_km2() const {
  if (vertices.size() < 3) return 0.0;
  const auto poly = unit_vertices(*this);
  Vec3 sum{0.0, 0.0, 0.0};
  for (const auto& v : poly) sum = add(sum, v);
  const Vec3 m = normalized(sum);
  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    total += signed_excess(m, poly[i], poly[(i + 1) % poly.size()]);
  }
  return std::abs(total) * kEarthRadiusKm * kEarthRadiusKm;
}

bool Region::contains(const GeoPoint& p) const {
  return winding_contains(unit_vertices(*this), to_unit(p));
}

std::optional<Region> intersect(const Region& region, const SphericalCap& cap,
                                int n_points) {
  const std::size_t n = region.vertices.size();
  if (n < 3) return std::nullopt;

  const Vec3 c = to_unit(cap.center);
  Vec3 north, east;
  local_frame(c, north, east);
  // Vertices count as inside up to r + eps; new boundary points are placed at
  // r + eps/2 so they stay strictly within tolerance.
  const double cos_rho = std::cos((cap.radius_km + kGeoEpsKm) / kEarthRadiusKm);
  const double rho = (cap.radius_km + 0.5 * kGeoEpsKm) / kEarthRadiusKm;
  const double cos_edge = std::cos(rho);

  const auto poly = unit_vertices(region);
  std::vector<char> inside(n);
  std::size_t n_inside = 0;
  std::size_t first_inside = n;
  for (std::size_t i = 0; i < n; ++i) {
    inside[i] = dot(poly[i], c) >= cos_rho;
    if (inside[i]) {
      ++n_inside;
      if (first_inside == n) first_inside = i;
    }
  }

  Region out;
  out.source_caps = region.source_caps;
  out.source_caps.push_back(cap);

  if (n_inside == n) {
    out.vertices = region.vertices;
    return out;
  }
  if (n_inside == 0) {
    // No vertex inside and, with vertex-based crossings, no crossing either:
    // the cap is disjoint from the region or lies wholly within it.
    if (winding_contains(poly, c)) {
      out.vertices = cap_boundary(cap, n_points);
      return out;
    }
    return std::nullopt;
  }

  // Crossing of the edge a(inside) -> b(outside) with the cap boundary.
  auto crossing = [&](const Vec3& a, const Vec3& b) {
    const double theta = angle_between(a, b);
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 80 && (hi - lo) * theta * kEarthRadiusKm > 1e-6;
         ++it) {
      const double mid = 0.5 * (lo + hi);
      if (dot(slerp(a, b, theta, mid), c) >= cos_edge) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return slerp(a, b, theta, lo);
  };

  const double step = 360.0 / n_points;
  std::vector<Vec3> result;
  result.reserve(n + static_cast<std::size_t>(n_points));
  std::optional<Vec3> exit_point;

  auto append_arc = [&](const Vec3& from, const Vec3& to) {
    const double b_from = bearing_of(north, east, from);
    const double b_to = bearing_of(north, east, to);
    double span = std::fmod(b_to - b_from + 360.0, 360.0);
    if (span > 180.0) {
      // A long arc is legitimate only when it runs through the region.
      const Vec3 mid =
          point_at(c, north, east, (b_from + span / 2.0) * kDeg, rho);
      if (!winding_contains(poly, mid)) span = 0.0;
    }
    for (double b = step * (std::floor(b_from / step) + 1.0);
         b < b_from + span - 1e-9; b += step) {
      result.push_back(point_at(c, north, east, b * kDeg, rho));
    }
  };

  result.push_back(poly[first_inside]);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (first_inside + k) % n;
    const std::size_t j = (i + 1) % n;
    if (inside[i] && inside[j]) {
      if (j != first_inside) result.push_back(poly[j]);
    } else if (inside[i] && !inside[j]) {
      exit_point = crossing(poly[i], poly[j]);
      result.push_back(*exit_point);
    } else if (!inside[i] && inside[j]) {
      const Vec3 entry = crossing(poly[j], poly[i]);
      if (exit_point) append_arc(*exit_point, entry);
      exit_point.reset();
      result.push_back(entry);
      if (j != first_inside) result.push_back(poly[j]);
    }
  }

  std::vector<GeoPoint> verts;
  verts.reserve(result.size());
  const double min_sep = 1e-4 / kEarthRadiusKm;
  for (const auto& v : result) {
    if (!verts.empty() && angle_between(to_unit(verts.back()), v) < min_sep) {
      continue;
    }
    verts.push_back(from_unit(v));
  }
  while (verts.size() > 1 &&
         angle_between(to_unit(verts.back()), to_unit(verts.front())) <
             min_sep) {
    verts.pop_back();
  }
  if (verts.size() < 3) return std::nullopt;
  out.vertices = std::move(verts);
  return out;
}

GeoPoint barycenter(const Region& region) {
  if (region.vertices.size() < 3) {
    throw Error(ErrorCode::kGeometry, "barycenter needs at least 3 vertices");
  }
  const auto poly = unit_vertices(region);
  Vec3 sum{0.0, 0.0, 0.0};
  for (const auto& v : poly) sum = add(sum, v);
  if (norm(sum) / static_cast<double>(poly.size()) < 1e-9) {
    throw Error(ErrorCode::kGeometry,
                "region vertices spread antipodally, no barycenter");
  }
  const Vec3 m = normalized(sum);
  Vec3 acc{0.0, 0.0, 0.0};
  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec3& a = poly[i];
    const Vec3& b = poly[(i + 1) % poly.size()];
    const double e = signed_excess(m, a, b);
    total += e;
    acc = add(acc, scale(normalized(add(add(m, a), b)), e));
  }
  if (total < 0.0) acc = scale(acc, -1.0);
  if (norm(acc) < 1e-18) return from_unit(m);
  return from_unit(acc);
}

std::optional<GridEstimate> grid_oracle(const std::vector<SphericalCap>& caps,
                                        double resolution_deg) {
  if (!(resolution_deg > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "grid resolution must be > 0");
  }
  if (caps.empty()) return std::nullopt;

  const auto smallest = std::min_element(
      caps.begin(), caps.end(),
      [](const auto& a, const auto& b) { return a.radius_km < b.radius_km; });
  const double r_deg = smallest->radius_km / kEarthRadiusKm / kDeg;
  const double clat = smallest->center.lat;
  const double clon = smallest->center.lon;

  const int n_lat =
      static_cast<int>(std::ceil(2.0 * r_deg / resolution_deg)) + 2;
  const double lat_start = clat - n_lat * resolution_deg / 2.0;
  double half_lon = 180.0;
  if (clat + r_deg < 90.0 && clat - r_deg > -90.0) {
    const double s = std::sin(r_deg * kDeg) / std::cos(clat * kDeg);
    if (s < 1.0) half_lon = std::asin(s) / kDeg + resolution_deg;
  }
  const int n_lon = std::min(
      static_cast<int>(std::ceil(2.0 * half_lon / resolution_deg)),
      static_cast<int>(std::floor(360.0 / resolution_deg)));
  const double lon_start = clon - n_lon * resolution_deg / 2.0;

  std::vector<Vec3> centers;
  std::vector<double> cos_radius;
  for (const auto& cap : caps) {
    centers.push_back(to_unit(cap.center));
    cos_radius.push_back(std::cos(cap.radius_km / kEarthRadiusKm));
  }

  std::vector<double> lon_cos(n_lon), lon_sin(n_lon);
  for (int j = 0; j < n_lon; ++j) {
    const double lon = (lon_start + (j + 0.5) * resolution_deg) * kDeg;
    lon_cos[j] = std::cos(lon);
    lon_sin[j] = std::sin(lon);
  }

  const double r2 = kEarthRadiusKm * kEarthRadiusKm;
  const double dlon_rad = resolution_deg * kDeg;
  Vec3 acc{0.0, 0.0, 0.0};
  double area = 0.0;
  long cells = 0;
  for (int i = 0; i < n_lat; ++i) {
    const double lat = lat_start + (i + 0.5) * resolution_deg;
    if (lat <= -90.0 || lat >= 90.0) continue;
    const double lo = std::max(-90.0, lat - resolution_deg / 2.0) * kDeg;
    const double hi = std::min(90.0, lat + resolution_deg / 2.0) * kDeg;
    const double cell_area = r2 * dlon_rad * (std::sin(hi) - std::sin(lo));
    const double cl = std::cos(lat * kDeg);
    const double sl = std::sin(lat * kDeg);
    for (int j = 0; j < n_lon; ++j) {
      const Vec3 p{cl * lon_cos[j], cl * lon_sin[j], sl};
      bool member = true;
      for (std::size_t k = 0; k < centers.size() && member; ++k) {
        member = dot(p, centers[k]) >= cos_radius[k];
      }
      if (!member) continue;
      ++cells;
      area += cell_area;
      acc = add(acc, scale(p, cell_area));
    }
  }
  if (cells == 0) return std::nullopt;
  return GridEstimate{area, from_unit(acc), cells};
}

}  // namespace lmgeo
