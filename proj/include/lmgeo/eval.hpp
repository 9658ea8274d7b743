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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lmgeo/calibration.hpp"
#include "lmgeo/localizer.hpp"
#include "lmgeo/measurement.hpp"

namespace lmgeo {

/// Groups records by target (sorted by id) into localizer inputs holding the
/// accepted bursts. The target continent comes from the table, else from the
/// band table applied to the recorded target position, else stays unset.
std::vector<LocalizationInput> group_by_target(
    std::span<const MeasurementRecord> records,
    const TargetContinents& continents, bool require_tech);

struct FoldPlan {
  std::size_t k = 10;
  std::map<std::string, std::size_t> assignment;  // target id -> fold
};

/// Shuffles the sorted target ids with the seed and deals them round-robin.
FoldPlan make_fold_plan(std::vector<std::string> target_ids, std::size_t k,
                        std::uint64_t seed);

struct EvalOptions {
  FitOptions fit;
  LocalizeOptions localize;  // filter_km is ignored by cross_validate_grid
  bool same_continent_only = false;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  TargetContinents target_continents;
};

struct TargetResult {
  std::string target_id;
  std::size_t fold = 0;
  GeoPoint truth;
  std::optional<GeoPoint> estimate;
  std::optional<double> error_km;
  std::optional<double> closest_error_km;
  std::size_t n_landmarks = 0;  // candidates offered to the localizer
  std::size_t n_used = 0;
  std::size_t n_discarded = 0;
  double avg_landmark_distance_km = 0.0;
  std::string failure;  // empty on success
};

struct FoldStatus {
  std::size_t fold = 0;
  std::size_t n_targets = 0;
  std::size_t n_train_samples = 0;
  bool skipped = false;
  std::string reason;
  std::set<std::string> training_targets;
};

struct EvaluationReport {
  ModelKind kind = ModelKind::kGlobal;
  std::optional<double> filter_km;
  bool same_continent_only = false;
  std::vector<TargetResult> targets;  // sorted by target id
  std::vector<FoldStatus> folds;
  std::map<std::string, std::size_t> rejections;  // verdict -> count
  std::size_t n_evaluated = 0;
  std::optional<double> median_error_km;
  std::optional<double> median_closest_error_km;

  std::vector<double> errors() const;
  std::vector<double> closest_errors() const;  // same targets as errors()
};

EvaluationReport cross_validate(std::span<const MeasurementRecord> records,
                                ModelKind kind, const EvalOptions& options);

/// One report per (kind, filter) pair, kinds outer. Folds are fitted once per
/// kind and reused across filters. nullopt in filters means unfiltered.
std::vector<EvaluationReport> cross_validate_grid(
    std::span<const MeasurementRecord> records,
    std::span<const ModelKind> kinds,
    std::span<const std::optional<double>> filters, const EvalOptions& options);

struct CdfPoint {
  double error_km = 0.0;
  double fraction = 0.0;
};

std::vector<CdfPoint> error_cdf(std::span<const double> errors);

enum class GroupBy { kAvgLandmarkDistance, kLandmarkCount };

struct GroupedSample {
  double key = 0.0;
  double error_km = 0.0;
};

std::vector<GroupedSample> grouping_samples(const EvaluationReport& report,
                                            GroupBy group_by, bool closest);

struct ErrorBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
  std::optional<double> median_error_km;
};

std::vector<ErrorBin> grouped_error(std::span<const GroupedSample> samples,
                                    double bin_width);

struct RatioBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
  std::optional<double> ratio;  // nullopt when either median is missing or zero
};

std::vector<RatioBin> baseline_ratio(std::span<const GroupedSample> method,
                                     std::span<const GroupedSample> closest,
                                     double bin_width);

inline constexpr double kDefaultCountBinWidth = 10.0;
inline constexpr double kDefaultDistanceBinWidthKm = 500.0;

/// Writes cdf_<tag>.csv, grouped_distance_<tag>.csv, grouped_count_<tag>.csv,
/// ratio_<tag>.csv and targets_<tag>.csv into dir.
void write_report_files(const std::filesystem::path& dir, const std::string& tag,
                        const EvaluationReport& report,
                        double count_bin_width = kDefaultCountBinWidth,
                        double distance_bin_width = kDefaultDistanceBinWidthKm);

std::string report_tag(const EvaluationReport& report);

/// JSON summary of medians per (model, filter) configuration.
std::string summary_json(std::span<const EvaluationReport> reports);

}  // namespace lmgeo
