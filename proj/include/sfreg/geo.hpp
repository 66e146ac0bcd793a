#ifndef SFREG_GEO_HPP
#define SFREG_GEO_HPP

#include <span>
#include <string>

#include <Eigen/Core>

#include "sfreg/types.hpp"

namespace sfreg {

inline constexpr double kEarthRadiusKm = 6371.0;

struct SiteLocation {
  std::string site_id;
  double lon = 0.0;  // degrees, [-180, 180]
  double lat = 0.0;  // degrees, [-90, 90]

  void validate() const {
    if (!(lon >= -180.0 && lon <= 180.0))
      throw IngestError("site '" + site_id + "': longitude out of [-180,180]");
    if (!(lat >= -90.0 && lat <= 90.0))
      throw IngestError("site '" + site_id + "': latitude out of [-90,90]");
  }
};

// Haversine great-circle distance in km.
double great_circle_distance(const SiteLocation& p, const SiteLocation& q);

// Symmetric matrix of pairwise great-circle distances.
Eigen::MatrixXd distance_matrix(std::span<const SiteLocation> sites);

}  // namespace sfreg

#endif  // SFREG_GEO_HPP
