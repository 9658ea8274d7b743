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

#include "lmgeo/lmgeo.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <new>
#include <set>
#include <string>
#include <vector>

#include "lmgeo/calibration.hpp"
#include "lmgeo/error.hpp"
#include "lmgeo/eval.hpp"
#include "lmgeo/localizer.hpp"
#include "lmgeo/measurement.hpp"
#include "lmgeo/synth.hpp"

struct lmgeo_dataset {
  lmgeo::IngestResult ingest;
  lmgeo::TargetContinents continents;
};

struct lmgeo_model {
  lmgeo::DelayDistanceModel model;
  std::vector<std::pair<std::string, std::string>> fallbacks;
};

struct lmgeo_localization {
  struct Row {
    std::string target_id;
    bool ok = false;
    lmgeo::GeoPoint estimate;
    std::size_t n_used = 0;
    std::size_t n_discarded = 0;
    std::string reason;
  };
  std::vector<Row> rows;
};

namespace {

using json = nlohmann::json;
using lmgeo::Error;
using lmgeo::ErrorCode;

thread_local std::string g_last_error;

lmgeo_status fail(lmgeo_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

lmgeo_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return LMGEO_ERR_INVALID_ARGUMENT;
    case ErrorCode::kIo: return LMGEO_ERR_IO;
    case ErrorCode::kParse: return LMGEO_ERR_PARSE;
    case ErrorCode::kInsufficientData: return LMGEO_ERR_INSUFFICIENT_DATA;
    case ErrorCode::kNonPhysical: return LMGEO_ERR_NON_PHYSICAL;
    case ErrorCode::kNoLandmarks: return LMGEO_ERR_NO_LANDMARKS;
    case ErrorCode::kGeometry: return LMGEO_ERR_GEOMETRY;
  }
  return LMGEO_ERR_INTERNAL;
}

template <typename F>
lmgeo_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return LMGEO_OK;
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(LMGEO_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LMGEO_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LMGEO_ERR_INTERNAL, e.what());
  }
}

void invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

void require(const void* p, const char* name) {
  if (p == nullptr) invalid(std::string(name) + " must not be NULL");
}

json parse_options(const char* text, const std::set<std::string>& known) {
  if (text == nullptr || *text == '\0') return json::object();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    invalid(std::string("options are not valid JSON: ") + e.what());
  }
  if (!j.is_object()) invalid("options must be a JSON object");
  for (const auto& [key, val] : j.items()) {
    if (!known.count(key)) invalid("unknown option '" + key + "'");
  }
  return j;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

lmgeo::ModelKind kind_from(const json& j) {
  const auto name = j.get<std::string>();
  const auto kind = lmgeo::parse_model_kind(name);
  if (!kind) invalid("unknown model kind '" + name + "'");
  return *kind;
}

int positive_int(const json& j, const char* name) {
  const auto v = j.get<long long>();
  if (v < 1) invalid(std::string(name) + " must be positive");
  return static_cast<int>(v);
}

std::optional<double> filter_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  const double v = j.get<double>();
  if (!(v > 0.0)) invalid("filter_km must be positive");
  return v;
}

lmgeo::FitOptions fit_options_from(const json& j) {
  lmgeo::FitOptions fo;
  if (j.contains("degree")) fo.degree = positive_int(j["degree"], "degree");
  if (j.contains("min_submodel_samples")) {
    fo.min_submodel_samples = static_cast<std::size_t>(
        positive_int(j["min_submodel_samples"], "min_submodel_samples"));
  }
  if (j.contains("fit_on_bin_medians")) {
    fo.fit_on_bin_medians = j["fit_on_bin_medians"].get<bool>();
  }
  if (j.contains("bin_width_ms")) {
    fo.bin_width_ms = j["bin_width_ms"].get<double>();
    if (!(fo.bin_width_ms > 0.0)) invalid("bin_width_ms must be positive");
  }
  return fo;
}

bool requires_tech(lmgeo::ModelKind kind) {
  return kind == lmgeo::ModelKind::kTechnology ||
         kind == lmgeo::ModelKind::kHybrid;
}

// Calibration pairs from records whose target position is known.
std::vector<lmgeo::CalibrationSample> calibration_samples(
    const lmgeo_dataset& ds, bool require_tech) {
  std::vector<lmgeo::CalibrationSample> out;
  for (const auto& r : ds.ingest.records) {
    if (!r.target_pos) continue;
    if (lmgeo::validate(r, require_tech) != lmgeo::Verdict::kAccepted) continue;
    const auto s = lmgeo::summarize(r);
    const auto it = ds.continents.find(r.target_id);
    const auto target_continent = it != ds.continents.end()
                                      ? it->second
                                      : lmgeo::continent_by_bands(*r.target_pos);
    out.push_back({s.min_rtt_ms,
                   lmgeo::great_circle_distance(s.landmark_pos, *r.target_pos),
                   s.access_tech, s.continent == target_continent});
  }
  return out;
}

lmgeo_model* wrap_model(lmgeo::DelayDistanceModel model) {
  auto* m = new lmgeo_model{std::move(model), {}};
  for (const auto& [key, reason] : m->model.fallbacks) {
    m->fallbacks.emplace_back(key, reason);
  }
  return m;
}

}  // namespace

extern "C" {

const char* lmgeo_version(void) { return "1.0.0"; }

const char* lmgeo_status_string(lmgeo_status status) {
  switch (status) {
    case LMGEO_OK: return "ok";
    case LMGEO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case LMGEO_ERR_IO: return "i/o error";
    case LMGEO_ERR_PARSE: return "parse error";
    case LMGEO_ERR_INSUFFICIENT_DATA: return "insufficient data";
    case LMGEO_ERR_NON_PHYSICAL: return "non-physical model";
    case LMGEO_ERR_NO_LANDMARKS: return "no landmarks";
    case LMGEO_ERR_GEOMETRY: return "geometry error";
    case LMGEO_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* lmgeo_last_error(void) { return g_last_error.c_str(); }

void lmgeo_string_free(char* s) { std::free(s); }

lmgeo_status lmgeo_great_circle_km(double lat1, double lon1, double lat2,
                                   double lon2, double* out_km) {
  return guarded([&] {
    require(out_km, "out_km");
    *out_km = lmgeo::great_circle_distance(lmgeo::GeoPoint::make(lat1, lon1),
                                           lmgeo::GeoPoint::make(lat2, lon2));
  });
}

lmgeo_status lmgeo_dataset_load(const char* path, lmgeo_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto ds = std::make_unique<lmgeo_dataset>();
    ds->ingest = lmgeo::ingest(path);
    *out = ds.release();
  });
}

lmgeo_status lmgeo_dataset_save(const lmgeo_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(path, "path");
    lmgeo::write_measurements(path, dataset->ingest.records);
  });
}

size_t lmgeo_dataset_record_count(const lmgeo_dataset* dataset) {
  return dataset ? dataset->ingest.records.size() : 0;
}

size_t lmgeo_dataset_rejection_count(const lmgeo_dataset* dataset) {
  return dataset ? dataset->ingest.rejections.size() : 0;
}

lmgeo_status lmgeo_dataset_rejection(const lmgeo_dataset* dataset, size_t index,
                                     size_t* line, const char** reason) {
  return guarded([&] {
    require(dataset, "dataset");
    if (index >= dataset->ingest.rejections.size()) invalid("index out of range");
    const auto& r = dataset->ingest.rejections[index];
    if (line) *line = r.line;
    if (reason) *reason = r.reason.c_str();
  });
}

lmgeo_status lmgeo_dataset_load_target_continents(lmgeo_dataset* dataset,
                                                  const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(path, "path");
    dataset->continents = lmgeo::read_target_continents(path);
  });
}

void lmgeo_dataset_free(lmgeo_dataset* dataset) { delete dataset; }

lmgeo_status lmgeo_synth_resolve_config(const char* config_json,
                                        char** out_json) {
  return guarded([&] {
    require(out_json, "out_json");
    *out_json = nullptr;
    const auto config = lmgeo::config_from_json(
        config_json && *config_json ? config_json : "{}");
    lmgeo::validate_config(config);
    *out_json = dup_string(lmgeo::config_to_json(config));
  });
}

lmgeo_status lmgeo_generate(const char* config_json, const char* out_dir) {
  return guarded([&] {
    require(out_dir, "out_dir");
    const auto config = lmgeo::config_from_json(
        config_json && *config_json ? config_json : "{}");
    lmgeo::validate_config(config);
    const auto output = lmgeo::generate(config);
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
    lmgeo::write_measurements(dir / "measurements.csv", output.records);
    lmgeo::write_ground_truth(dir / "ground_truth.csv", output.truth);
    lmgeo::write_target_continents(dir / "target_continents.csv",
                                   output.target_continents);
    std::ofstream cfg(dir / "config.json");
    cfg << lmgeo::config_to_json(config) << '\n';
    if (!cfg) throw Error(ErrorCode::kIo, "cannot write config.json");
  });
}

lmgeo_status lmgeo_generate_dataset(const char* config_json,
                                    lmgeo_dataset** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    const auto config = lmgeo::config_from_json(
        config_json && *config_json ? config_json : "{}");
    lmgeo::validate_config(config);
    auto output = lmgeo::generate(config);
    auto ds = std::make_unique<lmgeo_dataset>();
    ds->ingest.records = std::move(output.records);
    ds->continents = std::move(output.target_continents);
    *out = ds.release();
  });
}

lmgeo_status lmgeo_model_fit(const lmgeo_dataset* dataset,
                             const char* options_json, lmgeo_model** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = nullptr;
    const json j = parse_options(
        options_json, {"kind", "degree", "min_submodel_samples",
                       "fit_on_bin_medians", "bin_width_ms"});
    const auto kind =
        j.contains("kind") ? kind_from(j["kind"]) : lmgeo::ModelKind::kGlobal;
    const auto fo = fit_options_from(j);
    if (kind == lmgeo::ModelKind::kLinearBaseline) {
      *out = wrap_model(lmgeo::linear_baseline_model());
      return;
    }
    const auto samples = calibration_samples(*dataset, requires_tech(kind));
    *out = wrap_model(lmgeo::fit(samples, kind, fo));
  });
}

lmgeo_status lmgeo_model_linear_baseline(lmgeo_model** out) {
  return guarded([&] {
    require(out, "out");
    *out = wrap_model(lmgeo::linear_baseline_model());
  });
}

lmgeo_status lmgeo_model_load(const char* path, lmgeo_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = wrap_model(lmgeo::load_model(path));
  });
}

lmgeo_status lmgeo_model_save(const lmgeo_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    lmgeo::save_model(path, model->model);
  });
}

lmgeo_status lmgeo_model_to_json(const lmgeo_model* model, char** out_json) {
  return guarded([&] {
    require(model, "model");
    require(out_json, "out_json");
    *out_json = dup_string(lmgeo::serialize_model(model->model));
  });
}

lmgeo_status lmgeo_model_estimate(const lmgeo_model* model, double min_rtt_ms,
                                  lmgeo_tech tech, int same_continent,
                                  double* out_km, int* out_fell_back) {
  return guarded([&] {
    require(model, "model");
    require(out_km, "out_km");
    lmgeo::AccessTech t = lmgeo::AccessTech::kOtherNa;
    switch (tech) {
      case LMGEO_TECH_WIFI: t = lmgeo::AccessTech::kWifi; break;
      case LMGEO_TECH_3G: t = lmgeo::AccessTech::k3G; break;
      case LMGEO_TECH_4G: t = lmgeo::AccessTech::k4G; break;
      case LMGEO_TECH_NA: t = lmgeo::AccessTech::kOtherNa; break;
      default: invalid("unknown access technology");
    }
    const auto est =
        lmgeo::estimate_distance(model->model, min_rtt_ms, t, same_continent != 0);
    *out_km = est.km;
    if (out_fell_back) *out_fell_back = est.fell_back ? 1 : 0;
  });
}

size_t lmgeo_model_fallback_count(const lmgeo_model* model) {
  return model ? model->fallbacks.size() : 0;
}

lmgeo_status lmgeo_model_fallback(const lmgeo_model* model, size_t index,
                                  const char** key, const char** reason) {
  return guarded([&] {
    require(model, "model");
    if (index >= model->fallbacks.size()) invalid("index out of range");
    if (key) *key = model->fallbacks[index].first.c_str();
    if (reason) *reason = model->fallbacks[index].second.c_str();
  });
}

void lmgeo_model_free(lmgeo_model* model) { delete model; }

lmgeo_status lmgeo_write_bin_diagnostics(const lmgeo_dataset* dataset,
                                         double bin_width_ms, const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(path, "path");
    if (!(bin_width_ms > 0.0)) invalid("bin width must be positive");
    const auto samples = calibration_samples(*dataset, false);
    lmgeo::write_bin_diagnostics(path,
                                 lmgeo::bin_diagnostics(samples, bin_width_ms));
  });
}

lmgeo_status lmgeo_localize(const lmgeo_dataset* dataset,
                            const lmgeo_model* model, const char* options_json,
                            lmgeo_localization** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = nullptr;
    const json j = parse_options(
        options_json, {"filter_km", "baseline", "same_continent_only", "n_points"});
    lmgeo::LocalizeOptions lo;
    if (j.contains("filter_km")) lo.filter_km = filter_from(j["filter_km"]);
    if (j.contains("n_points")) lo.n_points = positive_int(j["n_points"], "n_points");
    const std::string baseline = j.value("baseline", std::string("none"));
    if (baseline != "none" && baseline != "closest") {
      invalid("baseline must be 'none' or 'closest'");
    }
    const bool closest = baseline == "closest";
    if (!closest) require(model, "model");
    const bool same_only = j.value("same_continent_only", false);
    const bool need_tech = model && requires_tech(model->model.kind);

    auto results = std::make_unique<lmgeo_localization>();
    for (auto& input : lmgeo::group_by_target(dataset->ingest.records,
                                              dataset->continents, need_tech)) {
      lmgeo_localization::Row row;
      row.target_id = input.target_id;
      try {
        if (same_only) {
          if (!input.target_continent) {
            throw Error(ErrorCode::kNoLandmarks, "target continent unknown");
          }
          input = lmgeo::same_continent_filter(input, *input.target_continent);
        }
        if (input.summaries.empty()) {
          throw Error(ErrorCode::kNoLandmarks, "no accepted measurements");
        }
        if (closest) {
          row.estimate = lmgeo::closest_landmark(input);
          row.n_used = 1;
        } else {
          const auto res = lmgeo::localize(input, model->model, lo);
          row.estimate = res.estimate;
          row.n_used = res.used_landmarks.size();
          row.n_discarded = res.discarded.size();
        }
        row.ok = true;
      } catch (const Error& e) {
        row.reason = e.code() == ErrorCode::kNoLandmarks
                         ? "NO_LANDMARKS"
                         : std::string(lmgeo::to_string(e.code()));
      }
      results->rows.push_back(std::move(row));
    }
    *out = results.release();
  });
}

size_t lmgeo_localization_count(const lmgeo_localization* results) {
  return results ? results->rows.size() : 0;
}

lmgeo_status lmgeo_localization_get(const lmgeo_localization* results,
                                    size_t index, lmgeo_target_estimate* out) {
  return guarded([&] {
    require(results, "results");
    require(out, "out");
    if (index >= results->rows.size()) invalid("index out of range");
    const auto& r = results->rows[index];
    out->target_id = r.target_id.c_str();
    out->ok = r.ok ? 1 : 0;
    out->lat = r.estimate.lat;
    out->lon = r.estimate.lon;
    out->n_used = r.n_used;
    out->n_discarded = r.n_discarded;
    out->reason = r.reason.c_str();
  });
}

lmgeo_status lmgeo_localization_write_csv(const lmgeo_localization* results,
                                          const char* path) {
  return guarded([&] {
    require(results, "results");
    require(path, "path");
    std::ofstream f(path);
    if (!f) throw Error(ErrorCode::kIo, std::string("cannot write ") + path);
    f << "target_id,lat,lon,n_used,n_discarded,reason\n";
    for (const auto& r : results->rows) {
      f << r.target_id << ',';
      if (r.ok) {
        f << lmgeo::format_double(r.estimate.lat) << ','
          << lmgeo::format_double(r.estimate.lon);
      } else {
        f << ',';
      }
      f << ',' << r.n_used << ',' << r.n_discarded << ',' << r.reason << '\n';
    }
    if (!f) throw Error(ErrorCode::kIo, std::string("cannot write ") + path);
  });
}

void lmgeo_localization_free(lmgeo_localization* results) { delete results; }

lmgeo_status lmgeo_evaluate(const lmgeo_dataset* dataset,
                            const char* options_json, const char* out_dir,
                            char** out_summary_json) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out_dir, "out_dir");
    if (out_summary_json) *out_summary_json = nullptr;
    const json j = parse_options(
        options_json,
        {"models", "filters", "k", "seed", "degree", "min_submodel_samples",
         "same_continent_only", "jobs", "n_points", "count_bin_width",
         "distance_bin_width_km"});
    if (!j.contains("seed")) invalid("seed is required");

    lmgeo::EvalOptions eo;
    eo.seed = j["seed"].get<std::uint64_t>();
    eo.fit = fit_options_from(j);
    if (j.contains("k")) eo.k = static_cast<std::size_t>(positive_int(j["k"], "k"));
    if (j.contains("jobs")) {
      eo.jobs = static_cast<unsigned>(positive_int(j["jobs"], "jobs"));
    }
    if (j.contains("n_points")) {
      eo.localize.n_points = positive_int(j["n_points"], "n_points");
    }
    eo.same_continent_only = j.value("same_continent_only", false);
    eo.target_continents = dataset->continents;

    std::vector<lmgeo::ModelKind> kinds{lmgeo::ModelKind::kGlobal};
    if (j.contains("models")) {
      kinds.clear();
      for (const auto& m : j["models"]) kinds.push_back(kind_from(m));
      if (kinds.empty()) invalid("models must not be empty");
    }
    std::vector<std::optional<double>> filters{std::nullopt};
    if (j.contains("filters")) {
      filters.clear();
      for (const auto& f : j["filters"]) filters.push_back(filter_from(f));
      if (filters.empty()) invalid("filters must not be empty");
    }
    const double count_width = j.value("count_bin_width", lmgeo::kDefaultCountBinWidth);
    const double dist_width =
        j.value("distance_bin_width_km", lmgeo::kDefaultDistanceBinWidthKm);
    if (!(count_width > 0.0) || !(dist_width > 0.0)) {
      invalid("bin widths must be positive");
    }

    const auto reports = lmgeo::cross_validate_grid(dataset->ingest.records,
                                                    kinds, filters, eo);
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
    for (const auto& report : reports) {
      lmgeo::write_report_files(dir, lmgeo::report_tag(report), report,
                                count_width, dist_width);
    }
    const std::string summary = lmgeo::summary_json(reports);
    std::ofstream f(dir / "summary.json");
    f << summary << '\n';
    if (!f) throw Error(ErrorCode::kIo, "cannot write summary.json");
    if (out_summary_json) *out_summary_json = dup_string(summary);
  });
}

}  // extern "C"
