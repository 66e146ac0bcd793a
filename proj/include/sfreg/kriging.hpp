#ifndef SFREG_KRIGING_HPP
#define SFREG_KRIGING_HPP

#include <span>
#include <vector>

#include <Eigen/Core>

#include "sfreg/geo.hpp"
#include "sfreg/types.hpp"

namespace sfreg {

struct SpaceTimeRecord {
  SiteLocation site;
  double time = 0.0;  // kyr, mapped domain
  double value = 0.0;
};

// C(h, u) = sigma2 * exp(-h/range_s) * exp(-|u|/range_t); the nugget acts as
// uncorrelated measurement variance on the diagonal of kriging systems.
struct SeparableCovariance {
  double sigma2 = 1.0;
  double range_s = 1.0;  // km
  double range_t = 1.0;  // kyr
  double nugget = 0.0;

  double value(double h, double u) const;
  // scaled space-time metric sqrt((h/range_s)^2 + (u/range_t)^2)
  double scaled_distance(double h, double u) const;
  void validate() const;
};

struct KrigingConfig {
  int n_neighbors = 20;
  SeparableCovariance covariance;
  std::vector<double> grid;  // target times
};

// Estimates the marginal structures from the records: spatial variogram from
// near-simultaneous cross-site pairs (time lag below the 10% lag quantile),
// temporal variogram from same-site pairs; fits an exponential model to each;
// sigma2 = mean of the two fitted sills, nugget = mean of the two fitted
// nuggets. Needs >= 30 records over >= 2 sites and >= 2 distinct times.
SeparableCovariance fit_separable_covariance(std::span<const SpaceTimeRecord> records,
                                             int n_bins = 15);

struct KrigePrediction {
  double value = 0.0;
  double variance = 0.0;
  double weight_sum = 0.0;  // solver diagnostic; 1 up to roundoff
};

// Ordinary kriging from the n_neighbors records nearest in the scaled
// space-time metric; weights sum to 1, variance clamped at 0.
KrigePrediction krige_point(std::span<const SpaceTimeRecord> records,
                            const KrigingConfig& cfg, const SiteLocation& target_site,
                            double target_time);

struct KrigedCurve {
  SampledCurve curve;
  std::vector<double> variances;  // per grid point
};

// krige_point at every (target site, grid time); gap-free output curves.
std::vector<KrigedCurve> krige_curves(std::span<const SpaceTimeRecord> records,
                                      const KrigingConfig& cfg,
                                      std::span<const SiteLocation> target_sites);

}  // namespace sfreg

#endif  // SFREG_KRIGING_HPP
