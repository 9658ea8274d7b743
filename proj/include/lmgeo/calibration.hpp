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

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmgeo/measurement.hpp"

namespace lmgeo {

enum class ModelKind { kGlobal, kContinent, kTechnology, kHybrid, kLinearBaseline };

std::string_view to_string(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct CalibrationSample {
  double min_rtt_ms = 0.0;
  double distance_km = 0.0;
  AccessTech tech = AccessTech::kWifi;
  bool same_continent = true;
};

inline constexpr double kDistanceFloorKm = 1.0;
inline constexpr std::size_t kMinSubmodelSamples = 50;
inline constexpr double kSpeedOfLightKmPerMs = 299.792458;
// 4/9 of light speed applied to the one-way delay (RTT / 2).
inline constexpr double kLinearBaselineKmPerMs =
    (4.0 / 9.0) * kSpeedOfLightKmPerMs / 2.0;

struct FitRange {
  double min_delay_ms = 0.0;
  double max_delay_ms = 0.0;

  bool operator==(const FitRange&) const = default;
};

struct Cutoff {
  double delay_ms = 0.0;
  double distance_km = 0.0;
};

/// Polynomial in delay (ascending powers) clamped to its increasing part.
struct PolynomialFit {
  std::vector<double> coefficients;
  double delay_cutoff_ms = 0.0;
  double distance_at_cutoff_km = 0.0;
  FitRange fit_range;
  std::size_t n_samples = 0;

  /// Raw polynomial value, no clamping.
  double polynomial(double delay_ms) const;
  double derivative(double delay_ms) const;

  /// Distance estimate: constant past the cutoff, linear continuation below
  /// the training range, never below kDistanceFloorKm.
  double evaluate(double delay_ms) const;

  bool operator==(const PolynomialFit&) const = default;
};

double evaluate_polynomial(std::span<const double> coefficients, double x);

/// First delay in (range.min, range.max] where the derivative stops being
/// strictly positive, or range.max. Throws kNonPhysical if the derivative is
/// not positive at range.min.
Cutoff compute_cutoff(std::span<const double> coefficients, FitRange range);

/// Ordinary least-squares coefficients (ascending powers). Throws
/// kInsufficientData for too few samples or a rank-deficient design.
std::vector<double> least_squares_coefficients(
    std::span<const CalibrationSample> samples, int degree);

PolynomialFit fit_polynomial(std::span<const CalibrationSample> samples,
                             int degree);

struct FitOptions {
  int degree = 3;
  std::size_t min_submodel_samples = kMinSubmodelSamples;
  bool fit_on_bin_medians = false;
  double bin_width_ms = 25.0;
};

struct DelayDistanceModel {
  ModelKind kind = ModelKind::kGlobal;
  int degree = 1;
  std::map<std::string, PolynomialFit> sub_models;
  PolynomialFit fallback;
  // Sub-model keys that were replaced by the fallback, with the reason.
  std::map<std::string, std::string> fallbacks;

  bool operator==(const DelayDistanceModel&) const = default;
};

/// Sub-model key for a landmark, or nullopt when the kind has no key for it
/// (unlabelled technology under technology-keyed kinds).
std::optional<std::string> model_key(ModelKind kind, AccessTech tech,
                                     bool same_continent);

std::vector<std::string> expected_keys(ModelKind kind);

DelayDistanceModel fit(std::span<const CalibrationSample> samples,
                       ModelKind kind, const FitOptions& options = {});

DelayDistanceModel linear_baseline_model();

struct DistanceEstimate {
  double km = 0.0;
  bool fell_back = false;
};

DistanceEstimate estimate_distance(const DelayDistanceModel& model,
                                   double min_rtt_ms, AccessTech tech,
                                   bool same_continent);

struct DelayBin {
  double delay_low_ms = 0.0;
  double delay_high_ms = 0.0;
  std::size_t count = 0;
  std::optional<double> median_distance_km;
  std::optional<double> stddev_km;
};

struct BinDiagnostics {
  std::vector<DelayBin> bins;
};

BinDiagnostics bin_diagnostics(std::span<const CalibrationSample> samples,
                               double bin_width_ms);
void write_bin_diagnostics(const std::filesystem::path& path,
                           const BinDiagnostics& diagnostics);

std::string serialize_model(const DelayDistanceModel& model);
DelayDistanceModel deserialize_model(std::string_view json);
void save_model(const std::filesystem::path& path,
                const DelayDistanceModel& model);
DelayDistanceModel load_model(const std::filesystem::path& path);

}  // namespace lmgeo
