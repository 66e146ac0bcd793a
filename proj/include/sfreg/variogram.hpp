#ifndef SFREG_VARIOGRAM_HPP
#define SFREG_VARIOGRAM_HPP

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sfreg/geo.hpp"
#include "sfreg/types.hpp"

namespace sfreg {

enum class VariogramFamily { exponential, gaussian, spherical };

VariogramFamily parse_variogram_family(const std::string& name);  // ConfigError on unknown
std::string to_string(VariogramFamily family);

inline constexpr int kDefaultVariogramBins = 15;

struct EmpiricalVariogram {
  std::vector<double> bin_centers;   // lag at bin midpoint
  std::vector<double> gamma_hat;     // NaN where pair_count == 0
  std::vector<long long> pair_counts;
  double max_dist = 0.0;             // upper edge of the last bin

  int populated_bins() const;
};

struct VariogramModel {
  VariogramFamily family = VariogramFamily::exponential;
  double nugget = 0.0;        // c0 >= 0
  double partial_sill = 1.0;  // c1 > 0
  double range = 1.0;         // a > 0, same units as the lags

  double sill() const { return nugget + partial_sill; }
};

// Semivariance gamma(h); 0 at h = 0 for every family.
double variogram_value(const VariogramModel& model, double h);

// Matheron estimator gamma_hat(b) = sum over pairs in bin b of
// (z_i - z_j)^2 / (2 N_b), with equal-width bins on [0, max_dist]. Pairs
// beyond max_dist are ignored; throws NumericError if no pair lands in any
// bin.
EmpiricalVariogram empirical_variogram(const Eigen::VectorXd& values,
                                       const Eigen::MatrixXd& distances, int n_bins,
                                       double max_dist);
EmpiricalVariogram empirical_variogram(const Eigen::VectorXd& values,
                                       std::span<const SiteLocation> sites, int n_bins,
                                       double max_dist);

// Default lag cutoff: half the maximum pairwise distance.
double default_max_lag(const Eigen::MatrixXd& distances);

// Weighted least squares in Cressie's weighting N_b*(gamma_hat-gamma)^2/gamma^2,
// minimized by multi-start Nelder-Mead over (nugget, partial_sill, range) under
// box constraints nugget >= 0, partial_sill > 0, range in (0, 3*max_dist].
// Needs at least 3 populated bins.
VariogramModel fit_variogram(const EmpiricalVariogram& ev, VariogramFamily family);

// Sigma_ij = sill - gamma(d_ij), diagonal = sill; verifies positive
// definiteness by Cholesky, adding jitter 1e-10*sill to the diagonal at most 3
// times before throwing NumericError. Returns the (possibly jittered) matrix.
Eigen::MatrixXd build_covariance(const VariogramModel& model,
                                 const Eigen::MatrixXd& distances);
Eigen::MatrixXd build_covariance(const VariogramModel& model,
                                 std::span<const SiteLocation> sites);

}  // namespace sfreg

#endif  // SFREG_VARIOGRAM_HPP
