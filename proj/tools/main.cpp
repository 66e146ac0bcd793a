#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sfreg/pipeline.hpp"

namespace {

// Every flag mirrors a PipelineConfig field; values given on the command
// line win over the config file.
struct Overrides {
  std::optional<std::string> climate_path, response_path, output_dir;
  std::optional<double> t_min, t_max, grid_step;
  std::optional<std::vector<std::string>> basis_candidates, variogram_families;
  std::optional<int> kriging_neighbors, qgls_iterations, variogram_bins;
  std::optional<std::string> cv_mode, model_id;
  std::optional<std::vector<double>> class_edges;
  std::optional<std::uint64_t> seed;
  // synth sub-config
  std::optional<std::string> scenario;
  std::optional<int> n_response, n_climate, basis_order;
  std::optional<double> signal_sd, noise_sd_fraction, noise_range_km;
};

void add_options(CLI::App* sub, std::string& config_path, Overrides& o) {
  sub->add_option("--config", config_path, "JSON config file");
  sub->add_option("--climate_path", o.climate_path);
  sub->add_option("--response_path", o.response_path);
  sub->add_option("--output_dir", o.output_dir);
  sub->add_option("--t_min", o.t_min);
  sub->add_option("--t_max", o.t_max);
  sub->add_option("--grid_step", o.grid_step);
  sub->add_option("--basis_candidates", o.basis_candidates,
                  "family:order, comma separated")
      ->delimiter(',');
  sub->add_option("--variogram_families", o.variogram_families,
                  "exponential|gaussian|spherical, comma separated")
      ->delimiter(',');
  sub->add_option("--kriging_neighbors", o.kriging_neighbors);
  sub->add_option("--qgls_iterations", o.qgls_iterations);
  sub->add_option("--variogram_bins", o.variogram_bins);
  sub->add_option("--cv_mode", o.cv_mode, "identity|fold_refit|full_sample");
  sub->add_option("--model_id", o.model_id, "M0..M4");
  sub->add_option("--class_edges", o.class_edges)->delimiter(',');
  sub->add_option("--seed", o.seed);
  sub->add_option("--scenario", o.scenario,
                  "M1_known_ABC|M2_no_interaction|pure_noise");
  sub->add_option("--n_response", o.n_response);
  sub->add_option("--n_climate", o.n_climate);
  sub->add_option("--basis_order", o.basis_order);
  sub->add_option("--signal_sd", o.signal_sd);
  sub->add_option("--noise_sd_fraction", o.noise_sd_fraction);
  sub->add_option("--noise_range_km", o.noise_range_km);
}

void apply(sfreg::PipelineConfig& cfg, const Overrides& o) {
  if (o.climate_path) cfg.climate_path = *o.climate_path;
  if (o.response_path) cfg.response_path = *o.response_path;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  if (o.t_min) cfg.domain.t_min = *o.t_min;
  if (o.t_max) cfg.domain.t_max = *o.t_max;
  if (o.grid_step) cfg.grid_step = *o.grid_step;
  if (o.basis_candidates) {
    cfg.basis_candidates.clear();
    for (const auto& s : *o.basis_candidates)
      cfg.basis_candidates.push_back(sfreg::parse_basis_candidate(s, cfg.domain));
  }
  if (o.variogram_families) {
    cfg.variogram_families.clear();
    for (const auto& s : *o.variogram_families)
      cfg.variogram_families.push_back(sfreg::parse_variogram_family(s));
  }
  if (o.kriging_neighbors) cfg.kriging_neighbors = *o.kriging_neighbors;
  if (o.qgls_iterations) cfg.qgls_iterations = *o.qgls_iterations;
  if (o.variogram_bins) cfg.variogram_bins = *o.variogram_bins;
  if (o.cv_mode) cfg.cv_mode = sfreg::parse_cv_mode(*o.cv_mode);
  if (o.model_id) cfg.model_id = sfreg::parse_model_id(*o.model_id);
  if (o.class_edges) cfg.class_edges = *o.class_edges;
  if (o.seed) cfg.seed = *o.seed;
  if (o.scenario) cfg.synth.scenario = sfreg::parse_scenario(*o.scenario);
  if (o.n_response) cfg.synth.n_response = *o.n_response;
  if (o.n_climate) cfg.synth.n_climate = *o.n_climate;
  if (o.basis_order) cfg.synth.basis_order = *o.basis_order;
  if (o.signal_sd) cfg.synth.signal_sd = *o.signal_sd;
  if (o.noise_sd_fraction) cfg.synth.noise_sd_fraction = *o.noise_sd_fraction;
  if (o.noise_range_km) cfg.synth.noise_range_km = *o.noise_range_km;
  sfreg::normalize_config(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scalar response on interpolated climate curves: kriging, basis "
               "regression with a bilinear interaction, CV and nested F-tests"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides o;
  CLI::App* run = app.add_subcommand("run", "full pipeline: ingest, krige, select, fit, report");
  CLI::App* synth = app.add_subcommand("synth", "write a synthetic climate/response/truth set");
  CLI::App* cv = app.add_subcommand("cv", "cross-validate the basis candidates only");
  CLI::App* anova = app.add_subcommand("anova", "nested model F-tests on the first candidate basis");
  CLI::App* krige = app.add_subcommand("krige", "interpolate the climate records only");
  for (CLI::App* sub : {run, synth, cv, anova, krige}) add_options(sub, config_path, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    sfreg::PipelineConfig cfg =
        config_path.empty() ? sfreg::PipelineConfig() : sfreg::load_config(config_path);
    apply(cfg, o);
    if (run->parsed()) sfreg::run_pipeline(cfg);
    else if (synth->parsed()) sfreg::run_synth(cfg);
    else if (cv->parsed()) sfreg::run_cv(cfg);
    else if (anova->parsed()) sfreg::run_anova(cfg);
    else if (krige->parsed()) sfreg::run_krige(cfg);
    return 0;
  } catch (const sfreg::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sfreg::IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const sfreg::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
