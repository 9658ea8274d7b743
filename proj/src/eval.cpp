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

#include "lmgeo/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>
#include <thread>

#include "lmgeo/error.hpp"
#include "lmgeo/stats.hpp"
#include "lmgeo/synth.hpp"

namespace lmgeo {

namespace {

using json = nlohmann::json;

bool requires_tech(ModelKind kind) {
  return kind == ModelKind::kTechnology || kind == ModelKind::kHybrid;
}

struct TargetData {
  std::string id;
  GeoPoint truth;
  Continent continent = Continent::kEU;
  std::vector<const MeasurementRecord*> records;
};

struct Dataset {
  std::vector<TargetData> targets;  // sorted by id
  std::map<std::string, std::size_t> index;
  std::size_t missing_truth = 0;
};

Dataset build_dataset(std::span<const MeasurementRecord> records,
                      const TargetContinents& continents) {
  Dataset ds;
  std::map<std::string, TargetData> by_id;
  for (const auto& r : records) {
    if (!r.target_pos) {
      ++ds.missing_truth;
      continue;
    }
    auto& t = by_id[r.target_id];
    if (t.records.empty()) {
      t.id = r.target_id;
      t.truth = *r.target_pos;
      const auto it = continents.find(r.target_id);
      t.continent = it != continents.end() ? it->second
                                           : continent_by_bands(*r.target_pos);
    }
    t.records.push_back(&r);
  }
  for (auto& [id, t] : by_id) {
    ds.index[id] = ds.targets.size();
    ds.targets.push_back(std::move(t));
  }
  return ds;
}

// Accepted bursts, one summary per landmark (lowest min-RTT when a landmark
// measured the same target more than once).
std::vector<BurstSummary> merge_summaries(
    std::span<const MeasurementRecord* const> records, bool require_tech) {
  std::map<std::string, BurstSummary> best;
  for (const auto* r : records) {
    if (validate(*r, require_tech) != Verdict::kAccepted) continue;
    BurstSummary s = summarize(*r);
    auto it = best.find(s.landmark_id);
    if (it == best.end()) {
      best.emplace(s.landmark_id, std::move(s));
    } else if (s.min_rtt_ms < it->second.min_rtt_ms) {
      it->second = std::move(s);
    }
  }
  std::vector<BurstSummary> out;
  for (auto& [id, s] : best) out.push_back(std::move(s));
  return out;
}

LocalizationInput make_input(const TargetData& t, bool require_tech) {
  LocalizationInput input;
  input.target_id = t.id;
  input.target_continent = t.continent;
  input.summaries = merge_summaries(t.records, require_tech);
  return input;
}

struct FoldOutcome {
  FoldStatus status;
  std::vector<std::vector<TargetResult>> per_filter;
};

FoldOutcome run_fold(const Dataset& ds, const FoldPlan& plan, std::size_t fold,
                     ModelKind kind,
                     std::span<const std::optional<double>> filters,
                     const EvalOptions& options) {
  const bool need_tech = requires_tech(kind);
  FoldOutcome out;
  out.status.fold = fold;
  out.per_filter.resize(filters.size());

  std::vector<CalibrationSample> samples;
  std::vector<const TargetData*> tests;
  for (const auto& t : ds.targets) {
    if (plan.assignment.at(t.id) == fold) {
      tests.push_back(&t);
      continue;
    }
    out.status.training_targets.insert(t.id);
    for (const auto* r : t.records) {
      if (validate(*r, need_tech) != Verdict::kAccepted) continue;
      const auto s = summarize(*r);
      samples.push_back({s.min_rtt_ms, great_circle_distance(s.landmark_pos, t.truth),
                         s.access_tech, s.continent == t.continent});
    }
  }
  out.status.n_targets = tests.size();
  out.status.n_train_samples = samples.size();

  std::optional<DelayDistanceModel> model;
  try {
    model = fit(samples, kind, options.fit);
  } catch (const Error& e) {
    out.status.skipped = true;
    out.status.reason = e.what();
  }

  for (const auto* t : tests) {
    TargetResult base;
    base.target_id = t->id;
    base.fold = fold;
    base.truth = t->truth;
    LocalizationInput input = make_input(*t, need_tech);
    std::string failure;
    if (out.status.skipped) failure = "FOLD_SKIPPED";
    if (failure.empty() && input.summaries.empty()) failure = "NO_LANDMARKS";
    if (failure.empty() && options.same_continent_only) {
      try {
        input = same_continent_filter(input, t->continent);
      } catch (const Error&) {
        failure = "NO_LANDMARKS";
      }
    }
    if (failure.empty()) {
      base.n_landmarks = input.summaries.size();
      double sum = 0.0;
      for (const auto& s : input.summaries) {
        sum += great_circle_distance(s.landmark_pos, t->truth);
      }
      base.avg_landmark_distance_km = sum / static_cast<double>(input.summaries.size());
      base.closest_error_km =
          great_circle_distance(closest_landmark(input), t->truth);
    }
    for (std::size_t fi = 0; fi < filters.size(); ++fi) {
      TargetResult r = base;
      r.failure = failure;
      if (r.failure.empty()) {
        LocalizeOptions lo = options.localize;
        lo.filter_km = filters[fi];
        try {
          const auto res = localize(input, *model, lo);
          r.estimate = res.estimate;
          r.error_km = great_circle_distance(res.estimate, t->truth);
          r.n_used = res.used_landmarks.size();
          r.n_discarded = res.discarded.size();
        } catch (const Error& e) {
          r.failure = e.code() == ErrorCode::kNoLandmarks ? "NO_LANDMARKS"
                                                          : e.what();
        }
      }
      out.per_filter[fi].push_back(std::move(r));
    }
  }
  return out;
}

std::string filter_label(const std::optional<double>& f) {
  return f ? format_double(*f) : "inf";
}

}  // namespace

std::vector<LocalizationInput> group_by_target(
    std::span<const MeasurementRecord> records,
    const TargetContinents& continents, bool require_tech) {
  std::map<std::string, std::vector<const MeasurementRecord*>> by_target;
  for (const auto& r : records) by_target[r.target_id].push_back(&r);
  std::vector<LocalizationInput> out;
  for (const auto& [id, recs] : by_target) {
    LocalizationInput input;
    input.target_id = id;
    if (const auto it = continents.find(id); it != continents.end()) {
      input.target_continent = it->second;
    } else if (recs.front()->target_pos) {
      input.target_continent = continent_by_bands(*recs.front()->target_pos);
    }
    input.summaries = merge_summaries(recs, require_tech);
    out.push_back(std::move(input));
  }
  return out;
}

FoldPlan make_fold_plan(std::vector<std::string> target_ids, std::size_t k,
                        std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be >= 2");
  std::sort(target_ids.begin(), target_ids.end());
  target_ids.erase(std::unique(target_ids.begin(), target_ids.end()),
                   target_ids.end());
  if (target_ids.size() < k) {
    throw Error(ErrorCode::kInsufficientData,
                "need at least " + std::to_string(k) + " targets for " +
                    std::to_string(k) + "-fold cross-validation, got " +
                    std::to_string(target_ids.size()));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(target_ids.begin(), target_ids.end(), rng);
  FoldPlan plan;
  plan.k = k;
  for (std::size_t i = 0; i < target_ids.size(); ++i) {
    plan.assignment[target_ids[i]] = i % k;
  }
  return plan;
}

std::vector<double> EvaluationReport::errors() const {
  std::vector<double> out;
  for (const auto& t : targets) {
    if (t.error_km) out.push_back(*t.error_km);
  }
  return out;
}

std::vector<double> EvaluationReport::closest_errors() const {
  std::vector<double> out;
  for (const auto& t : targets) {
    if (t.error_km && t.closest_error_km) out.push_back(*t.closest_error_km);
  }
  return out;
}

std::vector<EvaluationReport> cross_validate_grid(
    std::span<const MeasurementRecord> records,
    std::span<const ModelKind> kinds,
    std::span<const std::optional<double>> filters,
    const EvalOptions& options) {
  if (kinds.empty() || filters.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "nothing to evaluate");
  }
  const Dataset ds = build_dataset(records, options.target_continents);
  std::vector<std::string> ids;
  for (const auto& t : ds.targets) ids.push_back(t.id);
  const FoldPlan plan = make_fold_plan(ids, options.k, options.seed);

  std::vector<EvaluationReport> reports;
  for (const ModelKind kind : kinds) {
    std::vector<FoldOutcome> outcomes(plan.k);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t f = next++; f < plan.k; f = next++) {
        outcomes[f] = run_fold(ds, plan, f, kind, filters, options);
      }
    };
    const unsigned n_threads =
        std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(plan.k)));
    if (n_threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    std::map<std::string, std::size_t> rejections;
    for (const auto& r : records) {
      const Verdict v = validate(r, requires_tech(kind));
      if (v != Verdict::kAccepted) ++rejections[std::string(to_string(v))];
    }
    if (ds.missing_truth) rejections["NO_GROUND_TRUTH"] = ds.missing_truth;

    for (std::size_t fi = 0; fi < filters.size(); ++fi) {
      EvaluationReport rep;
      rep.kind = kind;
      rep.filter_km = filters[fi];
      rep.same_continent_only = options.same_continent_only;
      rep.rejections = rejections;
      for (auto& o : outcomes) {
        rep.folds.push_back(o.status);
        for (const auto& t : o.per_filter[fi]) rep.targets.push_back(t);
      }
      std::sort(rep.targets.begin(), rep.targets.end(),
                [](const auto& a, const auto& b) { return a.target_id < b.target_id; });
      const auto errs = rep.errors();
      rep.n_evaluated = errs.size();
      if (!errs.empty()) {
        rep.median_error_km = median(errs);
        rep.median_closest_error_km = median(rep.closest_errors());
      }
      reports.push_back(std::move(rep));
    }
  }
  return reports;
}

EvaluationReport cross_validate(std::span<const MeasurementRecord> records,
                                ModelKind kind, const EvalOptions& options) {
  const ModelKind kinds[] = {kind};
  const std::optional<double> filters[] = {options.localize.filter_km};
  return std::move(cross_validate_grid(records, kinds, filters, options).front());
}

std::vector<CdfPoint> error_cdf(std::span<const double> errors) {
  if (errors.empty()) {
    throw Error(ErrorCode::kInsufficientData, "CDF of empty error set");
  }
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  out.reserve(sorted.size());
  const auto n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.push_back({sorted[i], static_cast<double>(i + 1) / n});
  }
  return out;
}

std::vector<GroupedSample> grouping_samples(const EvaluationReport& report,
                                            GroupBy group_by, bool closest) {
  std::vector<GroupedSample> out;
  for (const auto& t : report.targets) {
    if (!t.error_km || !t.closest_error_km) continue;
    const double key = group_by == GroupBy::kLandmarkCount
                           ? static_cast<double>(t.n_landmarks)
                           : t.avg_landmark_distance_km;
    out.push_back({key, closest ? *t.closest_error_km : *t.error_km});
  }
  return out;
}

std::vector<ErrorBin> grouped_error(std::span<const GroupedSample> samples,
                                    double bin_width) {
  if (!(bin_width > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bin width must be > 0");
  }
  std::vector<ErrorBin> out;
  if (samples.empty()) return out;
  std::map<long, std::vector<double>> bins;
  for (const auto& s : samples) {
    bins[static_cast<long>(std::floor(s.key / bin_width))].push_back(s.error_km);
  }
  for (long k = bins.begin()->first; k <= bins.rbegin()->first; ++k) {
    ErrorBin b;
    b.low = static_cast<double>(k) * bin_width;
    b.high = static_cast<double>(k + 1) * bin_width;
    if (const auto it = bins.find(k); it != bins.end()) {
      b.count = it->second.size();
      b.median_error_km = median(it->second);
    }
    out.push_back(b);
  }
  return out;
}

std::vector<RatioBin> baseline_ratio(std::span<const GroupedSample> method,
                                     std::span<const GroupedSample> closest,
                                     double bin_width) {
  if (method.size() != closest.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "method and baseline results cover different targets");
  }
  for (std::size_t i = 0; i < method.size(); ++i) {
    if (method[i].key != closest[i].key) {
      throw Error(ErrorCode::kInvalidArgument,
                  "method and baseline results are not aligned");
    }
  }
  const auto m = grouped_error(method, bin_width);
  const auto c = grouped_error(closest, bin_width);
  std::vector<RatioBin> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    RatioBin r{m[i].low, m[i].high, m[i].count, std::nullopt};
    if (m[i].median_error_km && c[i].median_error_km &&
        *c[i].median_error_km > 0.0) {
      r.ratio = *m[i].median_error_km / *c[i].median_error_km;
    }
    out.push_back(r);
  }
  return out;
}

std::string report_tag(const EvaluationReport& report) {
  return std::string(to_string(report.kind)) + "_" + filter_label(report.filter_km);
}

void write_report_files(const std::filesystem::path& dir, const std::string& tag,
                        const EvaluationReport& report, double count_bin_width,
                        double distance_bin_width) {
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / name).string());
    return out;
  };
  const auto errs = report.errors();
  {
    auto out = open("cdf_" + tag + ".csv");
    out << "error_km,fraction\n";
    if (!errs.empty()) {
      for (const auto& p : error_cdf(errs)) {
        out << format_double(p.error_km) << ',' << format_double(p.fraction) << '\n';
      }
    }
  }
  auto write_grouped = [&](const std::string& name, GroupBy by, double width) {
    auto out = open(name);
    out << "bin_low,bin_high,count,median_error_km\n";
    for (const auto& b : grouped_error(grouping_samples(report, by, false), width)) {
      out << format_double(b.low) << ',' << format_double(b.high) << ','
          << b.count << ','
          << (b.median_error_km ? format_double(*b.median_error_km) : "") << '\n';
    }
  };
  write_grouped("grouped_distance_" + tag + ".csv", GroupBy::kAvgLandmarkDistance,
                distance_bin_width);
  write_grouped("grouped_count_" + tag + ".csv", GroupBy::kLandmarkCount,
                count_bin_width);
  {
    auto out = open("ratio_" + tag + ".csv");
    out << "bin_low,bin_high,ratio\n";
    const auto method = grouping_samples(report, GroupBy::kLandmarkCount, false);
    const auto closest = grouping_samples(report, GroupBy::kLandmarkCount, true);
    for (const auto& b : baseline_ratio(method, closest, count_bin_width)) {
      out << format_double(b.low) << ',' << format_double(b.high) << ','
          << (b.ratio ? format_double(*b.ratio) : "") << '\n';
    }
  }
  {
    auto out = open("targets_" + tag + ".csv");
    out << "target_id,fold,true_lat,true_lon,est_lat,est_lon,error_km,"
           "closest_error_km,n_landmarks,n_used,n_discarded,"
           "avg_landmark_distance_km,failure\n";
    for (const auto& t : report.targets) {
      out << t.target_id << ',' << t.fold << ',' << format_double(t.truth.lat)
          << ',' << format_double(t.truth.lon) << ','
          << (t.estimate ? format_double(t.estimate->lat) : "") << ','
          << (t.estimate ? format_double(t.estimate->lon) : "") << ','
          << (t.error_km ? format_double(*t.error_km) : "") << ','
          << (t.closest_error_km ? format_double(*t.closest_error_km) : "")
          << ',' << t.n_landmarks << ',' << t.n_used << ',' << t.n_discarded
          << ',' << format_double(t.avg_landmark_distance_km) << ','
          << t.failure << '\n';
    }
  }
}

std::string summary_json(std::span<const EvaluationReport> reports) {
  json configs = json::array();
  for (const auto& r : reports) {
    json c;
    c["model"] = to_string(r.kind);
    c["filter_km"] = r.filter_km ? json(*r.filter_km) : json(nullptr);
    c["same_continent_only"] = r.same_continent_only;
    c["n_targets"] = r.targets.size();
    c["n_evaluated"] = r.n_evaluated;
    c["n_failed"] = r.targets.size() - r.n_evaluated;
    c["median_error_km"] =
        r.median_error_km ? json(*r.median_error_km) : json(nullptr);
    c["median_closest_error_km"] = r.median_closest_error_km
                                       ? json(*r.median_closest_error_km)
                                       : json(nullptr);
    json skipped = json::array();
    for (const auto& f : r.folds) {
      if (f.skipped) skipped.push_back({{"fold", f.fold}, {"reason", f.reason}});
    }
    c["skipped_folds"] = skipped;
    c["rejections"] = r.rejections;
    configs.push_back(c);
  }
  return json{{"configurations", configs}}.dump(2) + "\n";
}

}  // namespace lmgeo
