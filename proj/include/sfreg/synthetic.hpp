#ifndef SFREG_SYNTHETIC_HPP
#define SFREG_SYNTHETIC_HPP

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sfreg/basis.hpp"
#include "sfreg/kriging.hpp"
#include "sfreg/regression.hpp"
#include "sfreg/variogram.hpp"

namespace sfreg {

enum class Scenario { M1_known_ABC, M2_no_interaction, pure_noise };

Scenario parse_scenario(const std::string& name);  // ConfigError on unknown
std::string to_string(Scenario s);

struct SyntheticConfig {
  std::uint64_t seed = 1;
  Scenario scenario = Scenario::M1_known_ABC;
  int n_response = 400;
  int n_climate = 216;
  int basis_order = 2;  // fourier order of the generating truth (K = 2*order+1)
  double mu = 0.26;
  double signal_sd = 0.02;         // sd of the noise-free signal over sites
  double noise_sd_fraction = 0.25; // noise sd as a fraction of signal sd
  double noise_range_km = 500.0;   // <= 0 gives iid noise
  double noise_nugget_fraction = 0.05;
  double coeff_range_km = 300.0;   // spatial correlation of the climate fields
  double temp_sd = 2.0;            // deg C, temporal sd of the theta curves
  double prec_sd = 150.0;          // mm, of the pi curves
  double temporal_range = 3.0;     // kyr, decay scale of the temporal spectrum
  double measurement_sd_fraction = 0.05;
  int min_records = 15;
  int max_records = 40;
  double missing_fraction = 0.05;  // rows losing one climate variable
  TimeDomain domain{0.0, 15.0};
  double grid_step = 0.1;
  double lon_min = -10.0, lon_max = 30.0;  // Europe-like box
  double lat_min = 35.0, lat_max = 60.0;

  void validate() const;  // ConfigError
};

// One climate CSV row; age is in kyr BP (age = t_max - t).
struct ClimateRow {
  int site_index = 0;
  double age = 0.0;
  double temperature = 0.0;
  double precipitation = 0.0;
  bool has_temperature = true;
  bool has_precipitation = true;
};

struct SyntheticBundle {
  // climate side
  std::vector<SiteLocation> climate_sites;
  std::vector<ClimateRow> climate_rows;
  std::vector<SpaceTimeRecord> temperature_records;
  std::vector<SpaceTimeRecord> precipitation_records;
  // response side
  std::vector<SiteLocation> response_sites;
  std::vector<double> y;
  std::vector<SampledCurve> theta_true;  // noise-free curves on the master grid
  std::vector<SampledCurve> pi_true;
  Eigen::MatrixXd theta_coeffs;  // n_response x K exact basis coefficients
  Eigen::MatrixXd pi_coeffs;
  // truth
  std::shared_ptr<const Basis> basis;
  double mu = 0.0;
  Eigen::VectorXd a_true, b_true;
  Eigen::MatrixXd c_true;
  double signal_sd = 0.0;  // sd of the realized noise-free signal
  double noise_sd = 0.0;
  VariogramModel noise_model;  // meaningful when the noise is spatial
  bool spatial_noise = false;
  std::vector<double> master_grid;
};

// Deterministic for a fixed config. Climate curves are spatially correlated
// Gaussian fields expanded on the truth basis (temporal spectrum matching an
// exponential decay at the retained frequencies), so responses follow the
// regression model exactly at truncation K.
SyntheticBundle generate_synthetic(const SyntheticConfig& cfg);

// Writes the bundle as the pipeline's input files plus a truth summary.
void write_synthetic_files(const SyntheticBundle& bundle, const SyntheticConfig& cfg,
                           const std::string& climate_path,
                           const std::string& response_path,
                           const std::string& truth_path);

// Draw from N(0, cov) by Cholesky (jitter 1e-12 * mean diagonal, 3 retries).
Eigen::VectorXd sample_gaussian_field(const Eigen::MatrixXd& cov, std::mt19937_64& rng);

// Exact draw of a zero-mean separable space-time process on sites x times
// (no nugget; add measurement noise separately).
Eigen::MatrixXd sample_separable_gp(std::span<const SiteLocation> sites,
                                    const std::vector<double>& times,
                                    const SeparableCovariance& cov, std::mt19937_64& rng);

}  // namespace sfreg

#endif  // SFREG_SYNTHETIC_HPP
