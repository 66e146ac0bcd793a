#ifndef SFREG_PIPELINE_HPP
#define SFREG_PIPELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sfreg/basis.hpp"
#include "sfreg/selection.hpp"
#include "sfreg/synthetic.hpp"
#include "sfreg/types.hpp"
#include "sfreg/variogram.hpp"

namespace sfreg {

// Artifact file names inside the output directory, in write order.
namespace artifact {
inline constexpr const char* kInterpolated = "interpolated_curves.csv";
inline constexpr const char* kCvReport = "cv_report.csv";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kCoefficients = "coefficient_functions.csv";
inline constexpr const char* kKernel = "kernel_surface.csv";
inline constexpr const char* kVariogram = "variogram.csv";
inline constexpr const char* kAnova = "anova_report.csv";
inline constexpr const char* kObservedPredicted = "observed_predicted.csv";
inline constexpr const char* kClassProfiles = "class_profiles.csv";
inline constexpr const char* kManifest = "manifest.json";
// synth verb
inline constexpr const char* kSynthClimate = "climate.csv";
inline constexpr const char* kSynthResponse = "response.csv";
inline constexpr const char* kSynthTruth = "truth.json";
}  // namespace artifact

struct PipelineConfig {
  std::string climate_path;
  std::string response_path;
  std::string output_dir = "out";
  TimeDomain domain{0.0, 15.0};
  double grid_step = 0.1;  // kyr, kriging target grid
  std::vector<BasisSpec> basis_candidates;  // default: fourier orders 2 and 5
  std::vector<VariogramFamily> variogram_families{VariogramFamily::exponential};
  int kriging_neighbors = 20;
  int qgls_iterations = 1;
  int variogram_bins = kDefaultVariogramBins;
  CvCovarianceMode cv_mode = CvCovarianceMode::fold_refit;
  ModelId model_id = ModelId::M1_full;
  std::vector<double> class_edges{0.24, 0.26, 0.28};
  std::uint64_t seed = 1;
  SyntheticConfig synth;  // synth verb; seed and domain mirror the fields above

  PipelineConfig();  // fills the default basis candidates

  // ConfigError on bad values; run_mode additionally requires the input
  // paths to exist.
  void validate(bool run_mode) const;
};

// "family:order", e.g. "fourier:5" or "bspline:8"; ConfigError on anything else.
BasisSpec parse_basis_candidate(const std::string& text, const TimeDomain& domain);

// Stamps the shared domain, seed and grid bounds onto the basis candidates
// and the synth sub-config. Call after any field is changed by hand.
void normalize_config(PipelineConfig& cfg);

// JSON object with keys mirroring the field names ("basis_candidates" as
// "family:order" strings, "synth" as a nested object). Unknown keys are
// ConfigErrors, as are type mismatches.
PipelineConfig load_config(const std::string& path);

// Canonical sorted-key serialization of every field; two configs hash equal
// iff they serialize equal.
std::string config_canonical(const PipelineConfig& cfg);
std::uint64_t config_hash(const PipelineConfig& cfg);  // FNV-1a over the canonical form
std::uint64_t fnv1a(const std::string& bytes);

// cfg.output_dir unless SFREG_OUTPUT_DIR is set and nonempty.
std::string resolve_output_dir(const PipelineConfig& cfg);

// Full run: ingest, krige both climate variables onto the response sites,
// cross-validate the candidates, fit the configured model by QGLS, then emit
// the report tables and the manifest. A stage failure removes that stage's
// partial artifacts and rethrows with the stage name prefixed; earlier
// stages' artifacts are kept.
void run_pipeline(const PipelineConfig& cfg);

// Single-stage verbs sharing the same internals.
void run_synth(const PipelineConfig& cfg);   // climate.csv, response.csv, truth.json
void run_krige(const PipelineConfig& cfg);   // interpolated_curves.csv
void run_cv(const PipelineConfig& cfg);      // cv_report.csv
void run_anova(const PipelineConfig& cfg);   // anova_report.csv (first candidate basis)

}  // namespace sfreg

#endif  // SFREG_PIPELINE_HPP
