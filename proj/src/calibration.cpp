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

#include "lmgeo/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "lmgeo/error.hpp"
#include "lmgeo/stats.hpp"

namespace lmgeo {

namespace {

using json = nlohmann::json;

constexpr std::string_view kModelFormat = "lmgeo.delay_distance_model";
constexpr int kModelVersion = 1;

std::vector<double> derivative_coefficients(std::span<const double> c) {
  std::vector<double> d;
  for (std::size_t k = 1; k < c.size(); ++k) {
    d.push_back(static_cast<double>(k) * c[k]);
  }
  return d;
}

// Real roots of the polynomial with ascending coefficients c.
std::vector<double> real_roots(std::vector<double> c) {
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  const std::size_t deg = c.empty() ? 0 : c.size() - 1;
  if (deg == 0) return {};
  if (deg == 1) return {-c[0] / c[1]};
  if (deg == 2) {
    const double a = c[2], b = c[1], cc = c[0];
    const double disc = b * b - 4.0 * a * cc;
    const double scale = std::max({b * b, std::abs(4.0 * a * cc), 1e-300});
    if (disc < -1e-14 * scale) return {};
    const double sq = std::sqrt(std::max(0.0, disc));
    const double q = -0.5 * (b + std::copysign(sq, b));
    std::vector<double> roots;
    if (q != 0.0) {
      roots.push_back(q / a);
      roots.push_back(cc / q);
    } else {
      roots.push_back(0.0);
    }
    return roots;
  }
  const int n = static_cast<int>(deg);
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[i] / c[deg];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  const auto deriv = derivative_coefficients(c);
  std::vector<double> roots;
  for (int i = 0; i < n; ++i) {
    const auto z = solver.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z.real()))) continue;
    double x = z.real();
    for (int it = 0; it < 8; ++it) {
      const double d = evaluate_polynomial(deriv, x);
      if (d == 0.0) break;
      x -= evaluate_polynomial(c, x) / d;
    }
    roots.push_back(std::isfinite(x) ? x : z.real());
  }
  return roots;
}

json fit_to_json(const PolynomialFit& f) {
  return json{{"coefficients", f.coefficients},
              {"delay_cutoff_ms", f.delay_cutoff_ms},
              {"distance_at_cutoff_km", f.distance_at_cutoff_km},
              {"fit_range", {f.fit_range.min_delay_ms, f.fit_range.max_delay_ms}},
              {"n_samples", f.n_samples}};
}

PolynomialFit fit_from_json(const json& j) {
  PolynomialFit f;
  f.coefficients = j.at("coefficients").get<std::vector<double>>();
  f.delay_cutoff_ms = j.at("delay_cutoff_ms").get<double>();
  f.distance_at_cutoff_km = j.at("distance_at_cutoff_km").get<double>();
  f.fit_range.min_delay_ms = j.at("fit_range").at(0).get<double>();
  f.fit_range.max_delay_ms = j.at("fit_range").at(1).get<double>();
  f.n_samples = j.at("n_samples").get<std::size_t>();
  if (f.coefficients.size() < 2) {
    throw Error(ErrorCode::kParse, "model polynomial needs degree >= 1");
  }
  return f;
}

// Replaces raw samples by one (median delay, median distance) point per bin.
std::vector<CalibrationSample> bin_medians(
    std::span<const CalibrationSample> samples, double width) {
  std::map<long, std::vector<const CalibrationSample*>> bins;
  for (const auto& s : samples) {
    bins[static_cast<long>(std::floor(s.min_rtt_ms / width))].push_back(&s);
  }
  std::vector<CalibrationSample> out;
  for (const auto& [k, members] : bins) {
    std::vector<double> d, r;
    for (const auto* s : members) {
      d.push_back(s->distance_km);
      r.push_back(s->min_rtt_ms);
    }
    CalibrationSample m = *members.front();
    m.min_rtt_ms = median(r);
    m.distance_km = median(d);
    out.push_back(m);
  }
  return out;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGlobal:
      return "global";
    case ModelKind::kContinent:
      return "continent";
    case ModelKind::kTechnology:
      return "technology";
    case ModelKind::kHybrid:
      return "hybrid";
    case ModelKind::kLinearBaseline:
      return "linear";
  }
  return "global";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "global") return ModelKind::kGlobal;
  if (s == "continent") return ModelKind::kContinent;
  if (s == "technology" || s == "tech") return ModelKind::kTechnology;
  if (s == "hybrid") return ModelKind::kHybrid;
  if (s == "linear" || s == "linear_baseline") return ModelKind::kLinearBaseline;
  return std::nullopt;
}

double evaluate_polynomial(std::span<const double> c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double PolynomialFit::polynomial(double delay_ms) const {
  return evaluate_polynomial(coefficients, delay_ms);
}

double PolynomialFit::derivative(double delay_ms) const {
  return evaluate_polynomial(derivative_coefficients(coefficients), delay_ms);
}

double PolynomialFit::evaluate(double delay_ms) const {
  double d;
  if (delay_ms > delay_cutoff_ms) {
    d = distance_at_cutoff_km;
  } else if (delay_ms < fit_range.min_delay_ms) {
    const double x0 = fit_range.min_delay_ms;
    d = polynomial(x0) + derivative(x0) * (delay_ms - x0);
  } else {
    d = polynomial(delay_ms);
  }
  return std::max(d, kDistanceFloorKm);
}

Cutoff compute_cutoff(std::span<const double> coefficients, FitRange range) {
  const auto deriv = derivative_coefficients(coefficients);
  if (!(evaluate_polynomial(deriv, range.min_delay_ms) > 0.0)) {
    throw Error(ErrorCode::kNonPhysical,
                "fitted distance does not increase with delay at the start "
                "of the training range");
  }
  double cutoff = range.max_delay_ms;
  for (double root : real_roots(deriv)) {
    if (root > range.min_delay_ms && root <= cutoff) cutoff = root;
  }
  return Cutoff{cutoff, evaluate_polynomial(coefficients, cutoff)};
}

std::vector<double> least_squares_coefficients(
    std::span<const CalibrationSample> samples, int degree) {
  if (degree < 1 || degree > 5) {
    throw Error(ErrorCode::kInvalidArgument, "degree must be in 1..5");
  }
  const auto n = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index m = degree + 1;
  if (n < m) {
    throw Error(ErrorCode::kInsufficientData,
                "need at least " + std::to_string(m) + " samples, got " +
                    std::to_string(n));
  }
  double scale = 0.0;
  for (const auto& s : samples) scale = std::max(scale, std::abs(s.min_rtt_ms));
  if (scale == 0.0) scale = 1.0;

  Eigen::MatrixXd design(n, m);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = samples[static_cast<std::size_t>(i)].min_rtt_ms / scale;
    double p = 1.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      design(i, k) = p;
      p *= x;
    }
    target(i) = samples[static_cast<std::size_t>(i)].distance_km;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < m) {
    throw Error(ErrorCode::kInsufficientData,
                "degenerate design matrix (too few distinct delays)");
  }
  const Eigen::VectorXd a = qr.solve(target);
  std::vector<double> coeffs(static_cast<std::size_t>(m));
  double s = 1.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    coeffs[static_cast<std::size_t>(k)] = a(k) / s;
    s *= scale;
  }
  return coeffs;
}

PolynomialFit fit_polynomial(std::span<const CalibrationSample> samples,
                             int degree) {
  PolynomialFit f;
  f.coefficients = least_squares_coefficients(samples, degree);
  const auto [lo, hi] = std::minmax_element(
      samples.begin(), samples.end(), [](const auto& a, const auto& b) {
        return a.min_rtt_ms < b.min_rtt_ms;
      });
  f.fit_range = {lo->min_rtt_ms, hi->min_rtt_ms};
  f.n_samples = samples.size();
  const Cutoff c = compute_cutoff(f.coefficients, f.fit_range);
  f.delay_cutoff_ms = c.delay_ms;
  f.distance_at_cutoff_km = c.distance_km;
  return f;
}

std::optional<std::string> model_key(ModelKind kind, AccessTech tech,
                                     bool same_continent) {
  const std::string cont = same_continent ? "same" : "diff";
  switch (kind) {
    case ModelKind::kGlobal:
      return "global";
    case ModelKind::kLinearBaseline:
      return "linear";
    case ModelKind::kContinent:
      return cont;
    case ModelKind::kTechnology:
      if (tech == AccessTech::kOtherNa) return std::nullopt;
      return std::string(to_string(tech));
    case ModelKind::kHybrid:
      if (tech == AccessTech::kOtherNa) return std::nullopt;
      return cont + "/" + std::string(to_string(tech));
  }
  return std::nullopt;
}

std::vector<std::string> expected_keys(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGlobal:
      return {"global"};
    case ModelKind::kLinearBaseline:
      return {"linear"};
    case ModelKind::kContinent:
      return {"diff", "same"};
    case ModelKind::kTechnology:
      return {"3g", "4g", "wifi"};
    case ModelKind::kHybrid:
      return {"diff/3g", "diff/4g", "diff/wifi",
              "same/3g", "same/4g", "same/wifi"};
  }
  return {};
}

DelayDistanceModel fit(std::span<const CalibrationSample> samples,
                       ModelKind kind, const FitOptions& options) {
  if (kind == ModelKind::kLinearBaseline) return linear_baseline_model();

  auto prepare = [&](std::span<const CalibrationSample> part) {
    if (!options.fit_on_bin_medians) {
      return std::vector<CalibrationSample>(part.begin(), part.end());
    }
    return bin_medians(part, options.bin_width_ms);
  };

  DelayDistanceModel model;
  model.kind = kind;
  model.degree = options.degree;
  {
    const auto all = prepare(samples);
    model.fallback = fit_polynomial(all, options.degree);
  }
  if (kind == ModelKind::kGlobal) {
    model.sub_models.emplace("global", model.fallback);
    return model;
  }

  std::map<std::string, std::vector<CalibrationSample>> parts;
  for (const auto& key : expected_keys(kind)) parts[key];
  for (const auto& s : samples) {
    if (auto key = model_key(kind, s.tech, s.same_continent)) {
      parts[*key].push_back(s);
    }
  }
  const std::size_t min_needed =
      std::max(options.min_submodel_samples,
               static_cast<std::size_t>(options.degree) + 1);
  for (const auto& [key, part] : parts) {
    if (part.size() < min_needed) {
      model.fallbacks[key] = "only " + std::to_string(part.size()) +
                             " samples (need " + std::to_string(min_needed) +
                             ")";
      continue;
    }
    try {
      model.sub_models.emplace(key, fit_polynomial(prepare(part), options.degree));
    } catch (const Error& e) {
      model.fallbacks[key] = e.what();
    }
  }
  return model;
}

DelayDistanceModel linear_baseline_model() {
  PolynomialFit line;
  line.coefficients = {0.0, kLinearBaselineKmPerMs};
  line.fit_range = {0.0, kHalfCircumferenceKm / kLinearBaselineKmPerMs};
  line.delay_cutoff_ms = line.fit_range.max_delay_ms;
  line.distance_at_cutoff_km = line.polynomial(line.delay_cutoff_ms);
  line.n_samples = 0;
  DelayDistanceModel model;
  model.kind = ModelKind::kLinearBaseline;
  model.degree = 1;
  model.fallback = line;
  model.sub_models.emplace("linear", line);
  return model;
}

DistanceEstimate estimate_distance(const DelayDistanceModel& model,
                                   double min_rtt_ms, AccessTech tech,
                                   bool same_continent) {
  if (!(min_rtt_ms > 0.0) || !std::isfinite(min_rtt_ms)) {
    throw Error(ErrorCode::kInvalidArgument, "min RTT must be positive");
  }
  if (const auto key = model_key(model.kind, tech, same_continent)) {
    const auto it = model.sub_models.find(*key);
    if (it != model.sub_models.end()) {
      return {it->second.evaluate(min_rtt_ms), false};
    }
  }
  return {model.fallback.evaluate(min_rtt_ms), true};
}

BinDiagnostics bin_diagnostics(std::span<const CalibrationSample> samples,
                               double bin_width_ms) {
  if (!(bin_width_ms > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bin width must be > 0");
  }
  BinDiagnostics out;
  if (samples.empty()) return out;
  std::map<long, std::vector<double>> bins;
  for (const auto& s : samples) {
    bins[static_cast<long>(std::floor(s.min_rtt_ms / bin_width_ms))].push_back(
        s.distance_km);
  }
  const long first = bins.begin()->first;
  const long last = bins.rbegin()->first;
  for (long k = first; k <= last; ++k) {
    DelayBin bin;
    bin.delay_low_ms = static_cast<double>(k) * bin_width_ms;
    bin.delay_high_ms = static_cast<double>(k + 1) * bin_width_ms;
    if (const auto it = bins.find(k); it != bins.end()) {
      bin.count = it->second.size();
      bin.median_distance_km = median(it->second);
      bin.stddev_km = population_stddev(it->second);
    }
    out.bins.push_back(bin);
  }
  return out;
}

void write_bin_diagnostics(const std::filesystem::path& path,
                           const BinDiagnostics& diagnostics) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "delay_low_ms,delay_high_ms,count,median_distance_km,stddev_km\n";
  for (const auto& b : diagnostics.bins) {
    out << format_double(b.delay_low_ms) << ',' << format_double(b.delay_high_ms)
        << ',' << b.count << ','
        << (b.median_distance_km ? format_double(*b.median_distance_km) : "")
        << ',' << (b.stddev_km ? format_double(*b.stddev_km) : "") << '\n';
  }
}

std::string serialize_model(const DelayDistanceModel& model) {
  json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = to_string(model.kind);
  j["degree"] = model.degree;
  j["fallback"] = fit_to_json(model.fallback);
  j["sub_models"] = json::object();
  for (const auto& [key, f] : model.sub_models) j["sub_models"][key] = fit_to_json(f);
  j["fallbacks"] = model.fallbacks;
  return j.dump(2) + "\n";
}

DelayDistanceModel deserialize_model(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw Error(ErrorCode::kParse, "not a delay-distance model document");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorCode::kParse, "unsupported model version");
    }
    DelayDistanceModel m;
    const auto kind = parse_model_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::kParse, "unknown model kind");
    m.kind = *kind;
    m.degree = j.at("degree").get<int>();
    m.fallback = fit_from_json(j.at("fallback"));
    for (const auto& [key, val] : j.at("sub_models").items()) {
      m.sub_models.emplace(key, fit_from_json(val));
    }
    m.fallbacks = j.at("fallbacks").get<std::map<std::string, std::string>>();
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("model document: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path,
                const DelayDistanceModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << serialize_model(model);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

DelayDistanceModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace lmgeo
