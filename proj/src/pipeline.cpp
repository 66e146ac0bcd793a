#include "sfreg/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "sfreg/csv.hpp"
#include "sfreg/io.hpp"
#include "sfreg/kriging.hpp"

namespace sfreg {

namespace fs = std::filesystem;
using nlohmann::json;

PipelineConfig::PipelineConfig() {
  basis_candidates.push_back({BasisFamily::fourier, 2, domain});
  basis_candidates.push_back({BasisFamily::fourier, 5, domain});
}

void PipelineConfig::validate(bool run_mode) const {
  try {
    domain.validate();
  } catch (const NumericError& e) {
    throw ConfigError(e.what());
  }
  if (!(grid_step > 0.0)) throw ConfigError("grid_step must be positive");
  if (basis_candidates.empty()) throw ConfigError("basis_candidates is empty");
  for (const auto& spec : basis_candidates) {
    spec.validate();
    if (!(spec.domain == domain))
      throw ConfigError("basis candidate domain differs from the pipeline domain");
  }
  if (variogram_families.empty()) throw ConfigError("variogram_families is empty");
  if (kriging_neighbors < 1) throw ConfigError("kriging_neighbors must be >= 1");
  if (qgls_iterations < 1) throw ConfigError("qgls_iterations must be >= 1");
  if (variogram_bins < 3) throw ConfigError("variogram_bins must be >= 3");
  for (std::size_t i = 1; i < class_edges.size(); ++i)
    if (!(class_edges[i - 1] < class_edges[i]))
      throw ConfigError("class_edges must be strictly ascending");
  synth.validate();
  if (run_mode) {
    if (climate_path.empty() || !fs::exists(climate_path))
      throw ConfigError("climate_path '" + climate_path + "' does not exist");
    if (response_path.empty() || !fs::exists(response_path))
      throw ConfigError("response_path '" + response_path + "' does not exist");
  }
}

BasisSpec parse_basis_candidate(const std::string& text, const TimeDomain& domain) {
  const auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 >= text.size())
    throw ConfigError("basis candidate '" + text + "' is not family:order");
  BasisSpec spec;
  spec.family = parse_basis_family(text.substr(0, colon));
  const std::string tail = text.substr(colon + 1);
  char* end = nullptr;
  const long order = std::strtol(tail.c_str(), &end, 10);
  if (end == tail.c_str() || *end != '\0')
    throw ConfigError("basis candidate '" + text + "' has a non-integer order");
  spec.order = static_cast<int>(order);
  spec.domain = domain;
  spec.validate();
  return spec;
}

void normalize_config(PipelineConfig& cfg) {
  for (auto& spec : cfg.basis_candidates) spec.domain = cfg.domain;
  cfg.synth.domain = cfg.domain;
  cfg.synth.seed = cfg.seed;
}

namespace {

std::string basis_descriptor(const BasisSpec& spec) {
  return to_string(spec.family) + ":" + std::to_string(spec.order);
}

// Wraps json value access so a type mismatch reports the key, not a
// nlohmann backtrace.
template <typename T>
T get_key(const json& j, const std::string& key, const std::string& ctx) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + ctx + key + "': " + e.what());
  }
}

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& ctx) {
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      throw ConfigError("unknown config key '" + ctx + item.key() + "'");
}

void load_synth(const json& j, SyntheticConfig& s) {
  static const std::set<std::string> keys = {
      "scenario",       "n_response",       "n_climate",
      "basis_order",    "mu",               "signal_sd",
      "noise_sd_fraction", "noise_range_km", "noise_nugget_fraction",
      "coeff_range_km", "temp_sd",          "prec_sd",
      "temporal_range", "measurement_sd_fraction", "min_records",
      "max_records",    "missing_fraction", "grid_step",
      "lon_min",        "lon_max",          "lat_min",
      "lat_max"};
  check_keys(j, keys, "synth.");
  const std::string ctx = "synth.";
  if (j.contains("scenario"))
    s.scenario = parse_scenario(get_key<std::string>(j, "scenario", ctx));
  if (j.contains("n_response")) s.n_response = get_key<int>(j, "n_response", ctx);
  if (j.contains("n_climate")) s.n_climate = get_key<int>(j, "n_climate", ctx);
  if (j.contains("basis_order")) s.basis_order = get_key<int>(j, "basis_order", ctx);
  if (j.contains("mu")) s.mu = get_key<double>(j, "mu", ctx);
  if (j.contains("signal_sd")) s.signal_sd = get_key<double>(j, "signal_sd", ctx);
  if (j.contains("noise_sd_fraction"))
    s.noise_sd_fraction = get_key<double>(j, "noise_sd_fraction", ctx);
  if (j.contains("noise_range_km"))
    s.noise_range_km = get_key<double>(j, "noise_range_km", ctx);
  if (j.contains("noise_nugget_fraction"))
    s.noise_nugget_fraction = get_key<double>(j, "noise_nugget_fraction", ctx);
  if (j.contains("coeff_range_km"))
    s.coeff_range_km = get_key<double>(j, "coeff_range_km", ctx);
  if (j.contains("temp_sd")) s.temp_sd = get_key<double>(j, "temp_sd", ctx);
  if (j.contains("prec_sd")) s.prec_sd = get_key<double>(j, "prec_sd", ctx);
  if (j.contains("temporal_range"))
    s.temporal_range = get_key<double>(j, "temporal_range", ctx);
  if (j.contains("measurement_sd_fraction"))
    s.measurement_sd_fraction = get_key<double>(j, "measurement_sd_fraction", ctx);
  if (j.contains("min_records")) s.min_records = get_key<int>(j, "min_records", ctx);
  if (j.contains("max_records")) s.max_records = get_key<int>(j, "max_records", ctx);
  if (j.contains("missing_fraction"))
    s.missing_fraction = get_key<double>(j, "missing_fraction", ctx);
  if (j.contains("grid_step")) s.grid_step = get_key<double>(j, "grid_step", ctx);
  if (j.contains("lon_min")) s.lon_min = get_key<double>(j, "lon_min", ctx);
  if (j.contains("lon_max")) s.lon_max = get_key<double>(j, "lon_max", ctx);
  if (j.contains("lat_min")) s.lat_min = get_key<double>(j, "lat_min", ctx);
  if (j.contains("lat_max")) s.lat_max = get_key<double>(j, "lat_max", ctx);
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  static const std::set<std::string> keys = {
      "climate_path", "response_path",      "output_dir",
      "t_min",        "t_max",              "grid_step",
      "basis_candidates", "variogram_families", "kriging_neighbors",
      "qgls_iterations",  "variogram_bins", "cv_mode",
      "model_id",     "class_edges",        "seed",
      "synth"};
  check_keys(j, keys, "");

  PipelineConfig cfg;
  const std::string ctx;
  if (j.contains("climate_path"))
    cfg.climate_path = get_key<std::string>(j, "climate_path", ctx);
  if (j.contains("response_path"))
    cfg.response_path = get_key<std::string>(j, "response_path", ctx);
  if (j.contains("output_dir"))
    cfg.output_dir = get_key<std::string>(j, "output_dir", ctx);
  if (j.contains("t_min")) cfg.domain.t_min = get_key<double>(j, "t_min", ctx);
  if (j.contains("t_max")) cfg.domain.t_max = get_key<double>(j, "t_max", ctx);
  if (j.contains("grid_step")) cfg.grid_step = get_key<double>(j, "grid_step", ctx);
  if (j.contains("basis_candidates")) {
    cfg.basis_candidates.clear();
    for (const auto& s : get_key<std::vector<std::string>>(j, "basis_candidates", ctx))
      cfg.basis_candidates.push_back(parse_basis_candidate(s, cfg.domain));
  }
  if (j.contains("variogram_families")) {
    cfg.variogram_families.clear();
    for (const auto& s : get_key<std::vector<std::string>>(j, "variogram_families", ctx))
      cfg.variogram_families.push_back(parse_variogram_family(s));
  }
  if (j.contains("kriging_neighbors"))
    cfg.kriging_neighbors = get_key<int>(j, "kriging_neighbors", ctx);
  if (j.contains("qgls_iterations"))
    cfg.qgls_iterations = get_key<int>(j, "qgls_iterations", ctx);
  if (j.contains("variogram_bins"))
    cfg.variogram_bins = get_key<int>(j, "variogram_bins", ctx);
  if (j.contains("cv_mode"))
    cfg.cv_mode = parse_cv_mode(get_key<std::string>(j, "cv_mode", ctx));
  if (j.contains("model_id"))
    cfg.model_id = parse_model_id(get_key<std::string>(j, "model_id", ctx));
  if (j.contains("class_edges"))
    cfg.class_edges = get_key<std::vector<double>>(j, "class_edges", ctx);
  if (j.contains("seed")) cfg.seed = get_key<std::uint64_t>(j, "seed", ctx);
  if (j.contains("synth")) {
    if (!j.at("synth").is_object())
      throw ConfigError("config key 'synth' must be an object");
    load_synth(j.at("synth"), cfg.synth);
  }
  normalize_config(cfg);
  return cfg;
}

std::string config_canonical(const PipelineConfig& cfg) {
  json j;
  j["climate_path"] = cfg.climate_path;
  j["response_path"] = cfg.response_path;
  j["output_dir"] = cfg.output_dir;
  j["t_min"] = cfg.domain.t_min;
  j["t_max"] = cfg.domain.t_max;
  j["grid_step"] = cfg.grid_step;
  std::vector<std::string> bases;
  for (const auto& spec : cfg.basis_candidates) bases.push_back(basis_descriptor(spec));
  j["basis_candidates"] = bases;
  std::vector<std::string> vfams;
  for (auto f : cfg.variogram_families) vfams.push_back(to_string(f));
  j["variogram_families"] = vfams;
  j["kriging_neighbors"] = cfg.kriging_neighbors;
  j["qgls_iterations"] = cfg.qgls_iterations;
  j["variogram_bins"] = cfg.variogram_bins;
  j["cv_mode"] = to_string(cfg.cv_mode);
  j["model_id"] = to_string(cfg.model_id);
  j["class_edges"] = cfg.class_edges;
  j["seed"] = cfg.seed;
  json s;
  s["scenario"] = to_string(cfg.synth.scenario);
  s["n_response"] = cfg.synth.n_response;
  s["n_climate"] = cfg.synth.n_climate;
  s["basis_order"] = cfg.synth.basis_order;
  s["mu"] = cfg.synth.mu;
  s["signal_sd"] = cfg.synth.signal_sd;
  s["noise_sd_fraction"] = cfg.synth.noise_sd_fraction;
  s["noise_range_km"] = cfg.synth.noise_range_km;
  s["noise_nugget_fraction"] = cfg.synth.noise_nugget_fraction;
  s["coeff_range_km"] = cfg.synth.coeff_range_km;
  s["temp_sd"] = cfg.synth.temp_sd;
  s["prec_sd"] = cfg.synth.prec_sd;
  s["temporal_range"] = cfg.synth.temporal_range;
  s["measurement_sd_fraction"] = cfg.synth.measurement_sd_fraction;
  s["min_records"] = cfg.synth.min_records;
  s["max_records"] = cfg.synth.max_records;
  s["missing_fraction"] = cfg.synth.missing_fraction;
  s["grid_step"] = cfg.synth.grid_step;
  s["lon_min"] = cfg.synth.lon_min;
  s["lon_max"] = cfg.synth.lon_max;
  s["lat_min"] = cfg.synth.lat_min;
  s["lat_max"] = cfg.synth.lat_max;
  j["synth"] = s;
  return j.dump();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
  return fnv1a(config_canonical(cfg));
}

std::string resolve_output_dir(const PipelineConfig& cfg) {
  const char* env = std::getenv("SFREG_OUTPUT_DIR");
  if (env && *env) return env;
  return cfg.output_dir;
}

namespace {

[[noreturn]] void rethrow_stage(const std::string& stage_name) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(stage_name + ": " + e.what());
  } catch (const IngestError& e) {
    throw IngestError(stage_name + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(stage_name + ": " + e.what());
  } catch (const std::exception& e) {
    throw NumericError(stage_name + ": " + e.what());
  }
}

// Runs one pipeline stage; on failure deletes the stage's own (possibly
// partial) artifacts and rethrows with the stage name, leaving earlier
// stages' files in place.
template <typename Fn>
void stage(const std::string& name, const std::vector<fs::path>& outputs, Fn&& fn) {
  try {
    fn();
  } catch (...) {
    std::error_code ec;
    for (const auto& p : outputs) fs::remove(p, ec);
    rethrow_stage(name);
  }
}

std::vector<double> make_grid(const TimeDomain& domain, double step) {
  const long count = static_cast<long>(std::floor(domain.length() / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(count + 1);
  for (long i = 0; i <= count; ++i) grid.push_back(domain.t_min + i * step);
  if (grid.back() > domain.t_max) grid.back() = domain.t_max;
  return grid;
}

fs::path prepare_output_dir(const PipelineConfig& cfg) {
  const fs::path dir = resolve_output_dir(cfg);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

struct Ingested {
  ClimateData climate;
  ResponseData response;
};

Ingested do_ingest(const PipelineConfig& cfg) {
  Ingested ing;
  ing.climate = read_climate_csv(cfg.climate_path, cfg.domain);
  ing.response = read_response_csv(cfg.response_path);
  std::cout << "ingest: " << ing.climate.sites.size() << " climate sites, "
            << ing.climate.temperature.size() << " temperature and "
            << ing.climate.precipitation.size() << " precipitation records ("
            << ing.climate.dropped_rows << " dropped), "
            << ing.response.sites.size() << " response sites\n";
  return ing;
}

struct KrigeOut {
  std::vector<double> grid;
  SeparableCovariance cov_temp, cov_prec;
  std::vector<KrigedCurve> theta, pi;
};

KrigeOut do_krige(const PipelineConfig& cfg, const Ingested& ing) {
  KrigeOut out;
  out.grid = make_grid(cfg.domain, cfg.grid_step);
  out.cov_temp = fit_separable_covariance(ing.climate.temperature, cfg.variogram_bins);
  out.cov_prec = fit_separable_covariance(ing.climate.precipitation, cfg.variogram_bins);
  KrigingConfig kc;
  kc.n_neighbors = cfg.kriging_neighbors;
  kc.grid = out.grid;
  kc.covariance = out.cov_temp;
  out.theta = krige_curves(ing.climate.temperature, kc, ing.response.sites);
  kc.covariance = out.cov_prec;
  out.pi = krige_curves(ing.climate.precipitation, kc, ing.response.sites);
  std::cout << "krige: " << out.grid.size() << " grid times per site"
            << ", temperature range_s " << format_human(out.cov_temp.range_s)
            << " km, precipitation range_s " << format_human(out.cov_prec.range_s)
            << " km\n";
  return out;
}

void write_interpolated(const fs::path& path, const Ingested& ing, const KrigeOut& k) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(2 * k.grid.size() * ing.response.sites.size());
  auto emit = [&](const std::vector<KrigedCurve>& curves, const char* variable) {
    for (std::size_t i = 0; i < curves.size(); ++i) {
      const KrigedCurve& kc = curves[i];
      for (std::size_t g = 0; g < kc.curve.times.size(); ++g)
        rows.push_back({kc.curve.site_id, format_full(kc.curve.times[g]),
                        format_full(kc.curve.values[g]), format_full(kc.variances[g]),
                        variable});
    }
  };
  emit(k.theta, "temperature");
  emit(k.pi, "precipitation");
  write_csv(path.string(), {"site_id", "time_kyr", "value", "kriging_variance", "variable"},
            rows);
}

CurveDataset make_curve_dataset(const Ingested& ing, const KrigeOut& k) {
  CurveDataset cd;
  cd.sites = ing.response.sites;
  cd.y = ing.response.h_index;
  cd.theta_curves.reserve(k.theta.size());
  cd.pi_curves.reserve(k.pi.size());
  for (const auto& kc : k.theta) cd.theta_curves.push_back(kc.curve);
  for (const auto& kc : k.pi) cd.pi_curves.push_back(kc.curve);
  return cd;
}

CvConfig make_cv_config(const PipelineConfig& cfg) {
  CvConfig cc;
  cc.bases = cfg.basis_candidates;
  cc.vfamilies = cfg.variogram_families;
  cc.model_id = cfg.model_id;
  cc.mode = cfg.cv_mode;
  cc.qgls_iterations = cfg.qgls_iterations;
  cc.variogram_bins = cfg.variogram_bins;
  return cc;
}

void write_cv_report(const fs::path& path, const CvResult& cv) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& cand : cv.candidates) {
    const std::string descriptor =
        basis_descriptor(cand.candidate.basis) + "+" + to_string(cand.candidate.vfamily);
    const double rmse =
        cand.failed ? std::numeric_limits<double>::quiet_NaN() : cand.rmse_pred;
    rows.push_back({descriptor, std::to_string(cand.candidate.basis.K()),
                    to_string(cand.candidate.basis.family),
                    to_string(cand.candidate.vfamily), format_full(rmse)});
  }
  write_csv(path.string(), {"candidate", "K", "basis_family", "variogram_family", "rmse_pred"},
            rows);
}

void write_coefficient_tables(const fs::path& coeff_path, const fs::path& kernel_path,
                              const FittedModel& model) {
  const CoefficientFunctions cf = coefficient_functions(model);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(cf.grid.size());
  for (std::size_t g = 0; g < cf.grid.size(); ++g)
    rows.push_back({format_full(cf.grid[g]), format_full(cf.A(static_cast<Eigen::Index>(g))),
                    format_full(cf.B(static_cast<Eigen::Index>(g)))});
  write_csv(coeff_path.string(), {"t", "A", "B"}, rows);

  rows.clear();
  rows.reserve(cf.grid.size() * cf.grid.size());
  for (std::size_t i = 0; i < cf.grid.size(); ++i)
    for (std::size_t j = 0; j < cf.grid.size(); ++j)
      rows.push_back({format_full(cf.grid[i]), format_full(cf.grid[j]),
                      format_full(cf.C(static_cast<Eigen::Index>(i),
                                       static_cast<Eigen::Index>(j)))});
  write_csv(kernel_path.string(), {"t", "u", "C"}, rows);
}

void write_variogram_table(const fs::path& path, const FittedModel& model) {
  std::vector<std::vector<std::string>> rows;
  if (model.has_variogram) {
    const EmpiricalVariogram& ev = model.empirical;
    for (std::size_t b = 0; b < ev.bin_centers.size(); ++b)
      rows.push_back({format_full(ev.bin_centers[b]), format_full(ev.gamma_hat[b]),
                      std::to_string(ev.pair_counts[b]),
                      format_full(variogram_value(model.variogram, ev.bin_centers[b]))});
  }
  write_csv(path.string(), {"bin_center_km", "gamma_hat", "pair_count", "gamma_fitted"},
            rows);
}

void write_anova_report(const fs::path& path, const AnovaTable& table) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : table.rows)
    rows.push_back({row.comparison, std::to_string(row.df1), std::to_string(row.df2),
                    format_full(row.F), format_full(row.p_value)});
  write_csv(path.string(), {"comparison", "df1", "df2", "F", "p_value"}, rows);
}

void write_observed_predicted(const fs::path& path, const Dataset& ds,
                              const FittedModel& model) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.rows.size());
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const double resid = model.residuals(static_cast<Eigen::Index>(i));
    rows.push_back({ds.rows[i].site.site_id, format_full(ds.rows[i].y),
                    format_full(ds.rows[i].y - resid), format_full(resid)});
  }
  write_csv(path.string(), {"site_id", "observed", "predicted", "residual"}, rows);
}

void write_class_profiles(const fs::path& path, const ClassProfiles& cp) {
  std::vector<std::vector<std::string>> rows;
  auto emit = [&](const std::string& label, const char* variable,
                  const auto& values) {
    for (std::size_t g = 0; g < cp.grid.size(); ++g)
      rows.push_back({label, variable, format_full(cp.grid[g]),
                      format_full(values(static_cast<Eigen::Index>(g)))});
  };
  for (std::size_t c = 0; c < cp.labels.size(); ++c) {
    emit(cp.labels[c], "temperature", cp.theta_means.row(static_cast<Eigen::Index>(c)));
    emit(cp.labels[c], "precipitation", cp.pi_means.row(static_cast<Eigen::Index>(c)));
  }
  emit("all", "temperature", cp.theta_global);
  emit("all", "precipitation", cp.pi_global);
  write_csv(path.string(), {"class_label", "variable", "time", "mean_value"}, rows);
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
         "." + std::to_string(EIGEN_MINOR_VERSION);
}

void write_manifest(const fs::path& path, const PipelineConfig& cfg, const Ingested& ing,
                    const KrigeOut& k, const CvResult& cv, const Dataset& ds) {
  json j;
  j["config_hash"] = hash_hex(config_hash(cfg));
  j["config"] = json::parse(config_canonical(cfg));
  j["versions"] = {{"sfreg", kVersion}, {"eigen", eigen_version()}};
  j["counts"] = {{"climate_sites", ing.climate.sites.size()},
                 {"temperature_records", ing.climate.temperature.size()},
                 {"precipitation_records", ing.climate.precipitation.size()},
                 {"dropped_rows", ing.climate.dropped_rows},
                 {"response_sites", ing.response.sites.size()},
                 {"grid_points", k.grid.size()},
                 {"cv_candidates", cv.candidates.size()},
                 {"n_fit", ds.n()}};
  const CvCandidate& winner = cv.candidates[cv.winner].candidate;
  j["selected"] = {{"basis", basis_descriptor(winner.basis)},
                   {"K", winner.basis.K()},
                   {"variogram_family", to_string(winner.vfamily)},
                   {"rmse_pred", cv.candidates[cv.winner].rmse_pred}};
  j["artifacts"] = {artifact::kInterpolated,    artifact::kCvReport,
                    artifact::kModel,           artifact::kCoefficients,
                    artifact::kKernel,          artifact::kVariogram,
                    artifact::kAnova,           artifact::kObservedPredicted,
                    artifact::kClassProfiles,   artifact::kManifest};
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

}  // namespace

void run_pipeline(const PipelineConfig& cfg_in) {
  PipelineConfig cfg = cfg_in;
  normalize_config(cfg);
  cfg.validate(true);
  const fs::path dir = prepare_output_dir(cfg);

  Ingested ing;
  stage("ingest", {}, [&] { ing = do_ingest(cfg); });

  KrigeOut k;
  stage("krige", {dir / artifact::kInterpolated}, [&] {
    k = do_krige(cfg, ing);
    write_interpolated(dir / artifact::kInterpolated, ing, k);
  });

  const CurveDataset cd = make_curve_dataset(ing, k);
  CvResult cv;
  stage("select", {dir / artifact::kCvReport}, [&] {
    cv = select_model(cd, make_cv_config(cfg));
    write_cv_report(dir / artifact::kCvReport, cv);
    const auto& win = cv.candidates[cv.winner];
    std::cout << "select: " << basis_descriptor(win.candidate.basis) << " + "
              << to_string(win.candidate.vfamily) << ", rmse_pred "
              << format_human(win.rmse_pred) << "\n";
  });

  Dataset ds;
  FittedModel model;
  stage("fit", {dir / artifact::kModel}, [&] {
    const CvCandidate& winner = cv.candidates[cv.winner].candidate;
    ds = project_dataset(cd, make_basis(winner.basis));
    model = qgls_fit(ds, cfg.model_id, winner.vfamily, cfg.qgls_iterations,
                     cfg.variogram_bins);
    write_model_json((dir / artifact::kModel).string(), model, ds.n());
    std::cout << "fit: " << to_string(cfg.model_id) << ", R2 " << format_human(model.r2)
              << ", rss " << format_human(model.rss) << "\n";
    for (const auto& w : model.warnings) std::cout << "fit: warning: " << w << "\n";
  });

  stage("report",
        {dir / artifact::kCoefficients, dir / artifact::kKernel, dir / artifact::kVariogram},
        [&] {
          write_coefficient_tables(dir / artifact::kCoefficients, dir / artifact::kKernel,
                                   model);
          write_variogram_table(dir / artifact::kVariogram, model);
        });

  stage("anova", {dir / artifact::kAnova}, [&] {
    const CvCandidate& winner = cv.candidates[cv.winner].candidate;
    const AnovaTable table = nested_anova(ds, winner.vfamily, cfg.variogram_bins);
    write_anova_report(dir / artifact::kAnova, table);
    for (const auto& row : table.rows)
      std::cout << "anova: " << row.comparison << " F " << format_human(row.F) << ", p "
                << format_human(row.p_value) << "\n";
  });

  stage("profiles", {dir / artifact::kObservedPredicted, dir / artifact::kClassProfiles},
        [&] {
          write_observed_predicted(dir / artifact::kObservedPredicted, ds, model);
          const ClassProfiles cp =
              response_class_profiles(ds, model, cfg.class_edges);
          write_class_profiles(dir / artifact::kClassProfiles, cp);
        });

  stage("manifest", {dir / artifact::kManifest},
        [&] { write_manifest(dir / artifact::kManifest, cfg, ing, k, cv, ds); });

  std::cout << "wrote " << 10 << " artifacts to " << dir.string() << "\n";
}

void run_synth(const PipelineConfig& cfg_in) {
  PipelineConfig cfg = cfg_in;
  normalize_config(cfg);
  cfg.validate(false);
  const fs::path dir = prepare_output_dir(cfg);
  stage("synth",
        {dir / artifact::kSynthClimate, dir / artifact::kSynthResponse,
         dir / artifact::kSynthTruth},
        [&] {
          const SyntheticBundle bundle = generate_synthetic(cfg.synth);
          write_synthetic_files(bundle, cfg.synth, (dir / artifact::kSynthClimate).string(),
                                (dir / artifact::kSynthResponse).string(),
                                (dir / artifact::kSynthTruth).string());
          std::cout << "synth: " << to_string(cfg.synth.scenario) << ", "
                    << bundle.climate_rows.size() << " climate rows at "
                    << bundle.climate_sites.size() << " sites, "
                    << bundle.response_sites.size() << " response sites\n";
        });
}

void run_krige(const PipelineConfig& cfg_in) {
  PipelineConfig cfg = cfg_in;
  normalize_config(cfg);
  cfg.validate(true);
  const fs::path dir = prepare_output_dir(cfg);
  Ingested ing;
  stage("ingest", {}, [&] { ing = do_ingest(cfg); });
  stage("krige", {dir / artifact::kInterpolated}, [&] {
    const KrigeOut k = do_krige(cfg, ing);
    write_interpolated(dir / artifact::kInterpolated, ing, k);
  });
}

void run_cv(const PipelineConfig& cfg_in) {
  PipelineConfig cfg = cfg_in;
  normalize_config(cfg);
  cfg.validate(true);
  const fs::path dir = prepare_output_dir(cfg);
  Ingested ing;
  stage("ingest", {}, [&] { ing = do_ingest(cfg); });
  KrigeOut k;
  stage("krige", {}, [&] { k = do_krige(cfg, ing); });
  const CurveDataset cd = make_curve_dataset(ing, k);
  stage("select", {dir / artifact::kCvReport}, [&] {
    const CvResult cv = select_model(cd, make_cv_config(cfg));
    write_cv_report(dir / artifact::kCvReport, cv);
  });
}

void run_anova(const PipelineConfig& cfg_in) {
  PipelineConfig cfg = cfg_in;
  normalize_config(cfg);
  cfg.validate(true);
  const fs::path dir = prepare_output_dir(cfg);
  Ingested ing;
  stage("ingest", {}, [&] { ing = do_ingest(cfg); });
  KrigeOut k;
  stage("krige", {}, [&] { k = do_krige(cfg, ing); });
  const CurveDataset cd = make_curve_dataset(ing, k);
  stage("anova", {dir / artifact::kAnova}, [&] {
    const Dataset ds = project_dataset(cd, make_basis(cfg.basis_candidates.front()));
    const AnovaTable table =
        nested_anova(ds, cfg.variogram_families.front(), cfg.variogram_bins);
    write_anova_report(dir / artifact::kAnova, table);
  });
}

}  // namespace sfreg
