#ifndef SFREG_IO_HPP
#define SFREG_IO_HPP

#include <string>
#include <vector>

#include "sfreg/kriging.hpp"
#include "sfreg/regression.hpp"
#include "sfreg/types.hpp"

namespace sfreg {

struct ClimateData {
  std::vector<SiteLocation> sites;  // unique, in first-appearance order
  std::vector<SpaceTimeRecord> temperature;
  std::vector<SpaceTimeRecord> precipitation;
  long dropped_rows = 0;  // rows whose age falls outside the domain
};

// CSV columns: site_id, lon, lat, age_kyr_bp, temperature, precipitation.
// Either climate value may be empty, never both. Ages are mapped to
// t = t_max - age; rows mapping outside the domain are dropped and counted.
ClimateData read_climate_csv(const std::string& path, const TimeDomain& domain);

struct ResponseData {
  std::vector<SiteLocation> sites;
  std::vector<double> h_index;
};

// CSV columns: site_id, lon, lat, h_index with h_index in [0, 1];
// duplicate site ids are rejected.
ResponseData read_response_csv(const std::string& path);

// Model file: basis spec, model id, mu, a, b, c (row-major), variogram
// parameters, rss, r2, n, K.
void write_model_json(const std::string& path, const FittedModel& m, int n);

}  // namespace sfreg

#endif  // SFREG_IO_HPP
