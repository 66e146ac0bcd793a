#include "sfreg/geo.hpp"

#include <cmath>

namespace sfreg {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
}

double great_circle_distance(const SiteLocation& p, const SiteLocation& q) {
  if (p.lon == q.lon && p.lat == q.lat) return 0.0;
  const double lat1 = p.lat * kDegToRad;
  const double lat2 = q.lat * kDegToRad;
  const double dlat = (q.lat - p.lat) * kDegToRad;
  const double dlon = (q.lon - p.lon) * kDegToRad;
  const double s1 = std::sin(0.5 * dlat);
  const double s2 = std::sin(0.5 * dlon);
  const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

Eigen::MatrixXd distance_matrix(std::span<const SiteLocation> sites) {
  const Eigen::Index n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = great_circle_distance(sites[i], sites[j]);
      d(j, i) = d(i, j);
    }
  return d;
}

}  // namespace sfreg
