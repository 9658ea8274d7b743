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

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lmgeo/lmgeo.h"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CliError {
  int exit_code;
  std::string message;
};

void check(lmgeo_status status, const std::string& what) {
  if (status == LMGEO_OK) return;
  const int code =
      status == LMGEO_ERR_INVALID_ARGUMENT ? kExitUsage : kExitFailure;
  throw CliError{code, what + ": " + lmgeo_status_string(status) + ": " +
                           lmgeo_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  lmgeo_string_free(s);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text << '\n';
  if (!f) throw CliError{kExitFailure, "cannot write " + path.string()};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError{kExitFailure, "cannot create " + dir.string()};
}

struct Dataset {
  lmgeo_dataset* handle = nullptr;
  ~Dataset() { lmgeo_dataset_free(handle); }
};

struct Model {
  lmgeo_model* handle = nullptr;
  ~Model() { lmgeo_model_free(handle); }
};

// Loads measurements and, when present, the target continent table that sits
// next to them (or the explicit one).
void load_dataset(Dataset& ds, const std::string& input,
                  const std::string& continents_path) {
  check(lmgeo_dataset_load(input.c_str(), &ds.handle), "loading " + input);
  const std::size_t rejected = lmgeo_dataset_rejection_count(ds.handle);
  for (std::size_t i = 0; i < rejected; ++i) {
    std::size_t line = 0;
    const char* reason = nullptr;
    lmgeo_dataset_rejection(ds.handle, i, &line, &reason);
    std::cerr << "warning: " << input << ":" << line << ": " << reason << '\n';
  }
  fs::path side = continents_path;
  if (side.empty()) {
    const fs::path guess = fs::path(input).parent_path() / "target_continents.csv";
    if (fs::exists(guess)) side = guess;
  }
  if (!side.empty()) {
    check(lmgeo_dataset_load_target_continents(ds.handle, side.c_str()),
          "loading " + side.string());
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct GenerateArgs {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> landmarks;
  std::optional<std::size_t> targets;
  std::optional<double> loss_rate;
  std::optional<double> mobility_rate;
  std::optional<std::size_t> burst;
  std::string placement;
  std::string config;
  std::string out = "data";
};

int run_generate(const GenerateArgs& a) {
  json cfg = json::object();
  if (!a.config.empty()) {
    std::ifstream f(a.config);
    if (!f) throw CliError{kExitFailure, "cannot read " + a.config};
    try {
      cfg = json::parse(f);
    } catch (const json::exception& e) {
      throw CliError{kExitUsage, a.config + ": " + e.what()};
    }
  }
  if (a.seed) cfg["seed"] = *a.seed;
  if (a.landmarks) cfg["n_landmarks"] = *a.landmarks;
  if (a.targets) cfg["n_targets"] = *a.targets;
  if (a.loss_rate) cfg["loss_rate"] = *a.loss_rate;
  if (a.mobility_rate) cfg["mobility_rate"] = *a.mobility_rate;
  if (a.burst) cfg["burst_length"] = *a.burst;
  if (!a.placement.empty()) {
    if (!cfg.contains("placement")) cfg["placement"] = json::object();
    cfg["placement"]["kind"] = a.placement;
  }
  if (!cfg.contains("seed")) throw CliError{kExitUsage, "--seed is required"};
  check(lmgeo_generate(cfg.dump().c_str(), a.out.c_str()), "generate");
  std::cout << "wrote " << (fs::path(a.out) / "measurements.csv").string() << '\n';
  return kExitOk;
}

struct CalibrateArgs {
  std::string input;
  std::string kind = "global";
  int degree = 3;
  std::size_t min_samples = 50;
  bool bin_medians = false;
  double bin_width = 25.0;
  std::string out = "model.json";
  std::string continents;
};

int run_calibrate(const CalibrateArgs& a) {
  Dataset ds;
  load_dataset(ds, a.input, a.continents);
  const json opts{{"kind", a.kind},
                  {"degree", a.degree},
                  {"min_submodel_samples", a.min_samples},
                  {"fit_on_bin_medians", a.bin_medians},
                  {"bin_width_ms", a.bin_width}};
  Model m;
  check(lmgeo_model_fit(ds.handle, opts.dump().c_str(), &m.handle), "calibrate");
  const std::size_t nfb = lmgeo_model_fallback_count(m.handle);
  for (std::size_t i = 0; i < nfb; ++i) {
    const char* key = nullptr;
    const char* reason = nullptr;
    lmgeo_model_fallback(m.handle, i, &key, &reason);
    std::cerr << "warning: sub-model '" << key << "' uses the global fit ("
              << reason << ")\n";
  }
  const fs::path out(a.out);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  check(lmgeo_model_save(m.handle, out.c_str()), "saving model");
  fs::path stem = out;
  stem.replace_extension();
  const fs::path bins = stem.string() + "_bins.csv";
  check(lmgeo_write_bin_diagnostics(ds.handle, a.bin_width, bins.c_str()),
        "writing bin diagnostics");
  write_text(stem.string() + "_config.json", opts.dump(2));
  std::cout << "wrote " << out.string() << '\n';
  return kExitOk;
}

struct LocalizeArgs {
  std::string input;
  std::string model;
  std::string out = "estimates.csv";
  std::optional<double> filter_km;
  std::string baseline = "none";
  bool same_continent_only = false;
  std::string continents;
};

int run_localize(const LocalizeArgs& a) {
  if (a.baseline != "closest" && a.model.empty()) {
    throw CliError{kExitUsage, "--model is required unless --baseline closest"};
  }
  Dataset ds;
  load_dataset(ds, a.input, a.continents);
  Model m;
  if (!a.model.empty()) {
    check(lmgeo_model_load(a.model.c_str(), &m.handle), "loading " + a.model);
  }
  json opts{{"baseline", a.baseline},
            {"same_continent_only", a.same_continent_only}};
  if (a.filter_km) opts["filter_km"] = *a.filter_km;
  lmgeo_localization* res = nullptr;
  check(lmgeo_localize(ds.handle, m.handle, opts.dump().c_str(), &res), "localize");
  const lmgeo_status st = lmgeo_localization_write_csv(res, a.out.c_str());
  std::size_t failed = 0;
  const std::size_t n = lmgeo_localization_count(res);
  for (std::size_t i = 0; i < n; ++i) {
    lmgeo_target_estimate e{};
    lmgeo_localization_get(res, i, &e);
    if (!e.ok) ++failed;
  }
  lmgeo_localization_free(res);
  check(st, "writing " + a.out);
  std::cout << "localized " << (n - failed) << " of " << n << " targets\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string input;
  std::optional<std::uint64_t> seed;
  std::string out = "eval";
  std::string models = "global";
  std::string filters;
  std::size_t k = 10;
  int degree = 3;
  std::size_t min_samples = 50;
  unsigned jobs = 1;
  bool same_continent_only = false;
  std::string continents;
};

int run_evaluate(const EvaluateArgs& a) {
  if (!a.seed) throw CliError{kExitUsage, "--seed is required"};
  json filters = json::array({nullptr});
  for (const auto& f : split_list(a.filters)) {
    try {
      filters.push_back(std::stod(f));
    } catch (const std::exception&) {
      throw CliError{kExitUsage, "bad filter value '" + f + "'"};
    }
  }
  json models = json::array();
  for (const auto& m : split_list(a.models)) models.push_back(m);
  const json opts{{"models", models},
                  {"filters", filters},
                  {"k", a.k},
                  {"seed", *a.seed},
                  {"degree", a.degree},
                  {"min_submodel_samples", a.min_samples},
                  {"same_continent_only", a.same_continent_only},
                  {"jobs", a.jobs}};
  Dataset ds;
  load_dataset(ds, a.input, a.continents);
  ensure_dir(a.out);
  char* summary = nullptr;
  check(lmgeo_evaluate(ds.handle, opts.dump().c_str(), a.out.c_str(), &summary),
        "evaluate");
  json config = opts;
  config["input"] = a.input;
  write_text(fs::path(a.out) / "config.json", config.dump(2));
  const json s = json::parse(take(summary));
  for (const auto& c : s["configurations"]) {
    std::cout << c["model"].get<std::string>() << " filter="
              << (c["filter_km"].is_null() ? std::string("none")
                                           : c["filter_km"].dump())
              << " evaluated=" << c["n_evaluated"].dump()
              << " median_error_km=" << c["median_error_km"].dump()
              << " closest_median_km=" << c["median_closest_error_km"].dump()
              << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay-based IP geolocation from smartphone landmarks"};
  app.set_version_flag("--version", std::string(lmgeo_version()));
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic measurement corpus");
  g->add_option("--seed", gen.seed, "Random seed (required unless in --config)");
  g->add_option("--landmarks", gen.landmarks, "Number of landmarks");
  g->add_option("--targets", gen.targets, "Number of targets");
  g->add_option("--loss-rate", gen.loss_rate, "Per-probe loss probability");
  g->add_option("--mobility-rate", gen.mobility_rate,
                "Fraction of bursts taken while moving");
  g->add_option("--burst", gen.burst, "Probes per burst");
  g->add_option("--placement", gen.placement, "clustered or uniform")
      ->check(CLI::IsMember({"clustered", "uniform"}));
  g->add_option("--config", gen.config, "JSON generator configuration")
      ->check(CLI::ExistingFile);
  g->add_option("-o,--out", gen.out, "Output directory");

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Fit a delay-distance model");
  c->add_option("input", cal.input, "Measurement CSV")->required();
  c->add_option("--kind", cal.kind, "global, continent, technology, hybrid or linear")
      ->check(CLI::IsMember({"global", "continent", "technology", "hybrid", "linear"}));
  c->add_option("--degree", cal.degree, "Polynomial degree")->check(CLI::Range(1, 5));
  c->add_option("--min-samples", cal.min_samples, "Minimum samples per sub-model");
  c->add_flag("--bin-medians", cal.bin_medians, "Fit on per-bin medians");
  c->add_option("--bin-width", cal.bin_width, "Delay bin width in ms")
      ->check(CLI::PositiveNumber);
  c->add_option("-o,--out", cal.out, "Model JSON path");
  c->add_option("--target-continents", cal.continents, "target_id,continent CSV");

  LocalizeArgs loc;
  auto* l = app.add_subcommand("localize", "Estimate target positions");
  l->add_option("input", loc.input, "Measurement CSV")->required();
  l->add_option("--model", loc.model, "Model JSON from calibrate");
  l->add_option("-o,--out", loc.out, "Output CSV");
  l->add_option("--filter-km", loc.filter_km, "Drop landmarks with larger radius")
      ->check(CLI::PositiveNumber);
  l->add_option("--baseline", loc.baseline, "none or closest")
      ->check(CLI::IsMember({"none", "closest"}));
  l->add_flag("--same-continent-only", loc.same_continent_only,
              "Use only landmarks on the target's continent");
  l->add_option("--target-continents", loc.continents, "target_id,continent CSV");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "k-fold cross-validation");
  e->add_option("input", ev.input, "Measurement CSV")->required();
  e->add_option("--seed", ev.seed, "Fold assignment seed")->required();
  e->add_option("-o,--out", ev.out, "Output directory");
  e->add_option("--models", ev.models, "Comma-separated model kinds");
  e->add_option("--filters", ev.filters,
                "Comma-separated filter radii in km (unfiltered always included)");
  e->add_option("--k", ev.k, "Number of folds")->check(CLI::Range(2, 1000000));
  e->add_option("--degree", ev.degree, "Polynomial degree")->check(CLI::Range(1, 5));
  e->add_option("--min-samples", ev.min_samples, "Minimum samples per sub-model");
  e->add_option("--jobs", ev.jobs, "Parallel folds")->check(CLI::Range(1, 256));
  e->add_flag("--same-continent-only", ev.same_continent_only,
              "Use only landmarks on the target's continent");
  e->add_option("--target-continents", ev.continents, "target_id,continent CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand(g)) return run_generate(gen);
    if (app.got_subcommand(c)) return run_calibrate(cal);
    if (app.got_subcommand(l)) return run_localize(loc);
    if (app.got_subcommand(e)) return run_evaluate(ev);
  } catch (const CliError& err) {
    std::cerr << "error: " << err.message << '\n';
    return err.exit_code;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
