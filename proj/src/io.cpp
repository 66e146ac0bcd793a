#include "sfreg/io.hpp"

#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "sfreg/basis.hpp"
#include "sfreg/csv.hpp"

namespace sfreg {

namespace {

// Returns the index of the site in `sites`, appending it on first sight and
// rejecting coordinate conflicts for a known id.
int intern_site(std::vector<SiteLocation>& sites, std::map<std::string, int>& index,
                const SiteLocation& s, const CsvTable& t, std::size_t row) {
  auto it = index.find(s.site_id);
  if (it == index.end()) {
    s.validate();
    index.emplace(s.site_id, static_cast<int>(sites.size()));
    sites.push_back(s);
    return static_cast<int>(sites.size()) - 1;
  }
  const SiteLocation& known = sites[it->second];
  if (known.lon != s.lon || known.lat != s.lat)
    throw IngestError(t.path, t.line_numbers[row],
                      "site '" + s.site_id + "' reappears with different coordinates");
  return it->second;
}

}  // namespace

ClimateData read_climate_csv(const std::string& path, const TimeDomain& domain) {
  domain.validate();
  const CsvTable t = read_csv(path);
  const std::size_t c_site = t.column("site_id");
  const std::size_t c_lon = t.column("lon");
  const std::size_t c_lat = t.column("lat");
  const std::size_t c_age = t.column("age_kyr_bp");
  const std::size_t c_temp = t.column("temperature");
  const std::size_t c_prec = t.column("precipitation");
  if (t.rows.empty()) throw IngestError(path, 1, "no data rows");

  ClimateData out;
  std::map<std::string, int> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    SiteLocation s;
    s.site_id = t.rows[r][c_site];
    if (s.site_id.empty())
      throw IngestError(path, t.line_numbers[r], "empty site_id");
    s.lon = parse_double(t, r, c_lon);
    s.lat = parse_double(t, r, c_lat);
    const double age = parse_double(t, r, c_age);
    if (age < 0.0)
      throw IngestError(path, t.line_numbers[r], "negative age_kyr_bp");

    const bool has_temp = !t.rows[r][c_temp].empty();
    const bool has_prec = !t.rows[r][c_prec].empty();
    if (!has_temp && !has_prec)
      throw IngestError(path, t.line_numbers[r],
                        "row has neither temperature nor precipitation");

    const double time = domain.t_max - age;
    const int si = intern_site(out.sites, index, s, t, r);
    if (!domain.contains(time)) {
      ++out.dropped_rows;
      continue;
    }
    if (has_temp)
      out.temperature.push_back({out.sites[si], time, parse_double(t, r, c_temp)});
    if (has_prec)
      out.precipitation.push_back({out.sites[si], time, parse_double(t, r, c_prec)});
  }
  if (out.temperature.empty() && out.precipitation.empty())
    throw IngestError(path, 1, "every row was dropped or empty");
  return out;
}

ResponseData read_response_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c_site = t.column("site_id");
  const std::size_t c_lon = t.column("lon");
  const std::size_t c_lat = t.column("lat");
  const std::size_t c_h = t.column("h_index");
  if (t.rows.empty()) throw IngestError(path, 1, "no data rows");

  ResponseData out;
  std::map<std::string, int> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    SiteLocation s;
    s.site_id = t.rows[r][c_site];
    if (s.site_id.empty())
      throw IngestError(path, t.line_numbers[r], "empty site_id");
    if (index.count(s.site_id))
      throw IngestError(path, t.line_numbers[r],
                        "duplicate response site '" + s.site_id + "'");
    s.lon = parse_double(t, r, c_lon);
    s.lat = parse_double(t, r, c_lat);
    s.validate();
    const double h = parse_double(t, r, c_h);
    if (!(h >= 0.0 && h <= 1.0))
      throw IngestError(path, t.line_numbers[r],
                        "h_index " + t.rows[r][c_h] + " outside [0,1]");
    index.emplace(s.site_id, static_cast<int>(out.sites.size()));
    out.sites.push_back(s);
    out.h_index.push_back(h);
  }
  return out;
}

void write_model_json(const std::string& path, const FittedModel& m, int n) {
  if (!m.basis) throw NumericError("model file needs a fitted model with a basis");
  nlohmann::json j;
  j["basis"] = {{"family", to_string(m.basis->spec().family)},
                {"order", m.basis->spec().order},
                {"K", m.basis->K()},
                {"t_min", m.basis->domain().t_min},
                {"t_max", m.basis->domain().t_max}};
  j["model_id"] = to_string(m.model_id);
  j["mu"] = m.mu;
  j["a"] = std::vector<double>(m.a.data(), m.a.data() + m.a.size());
  j["b"] = std::vector<double>(m.b.data(), m.b.data() + m.b.size());
  std::vector<double> c_flat;
  c_flat.reserve(m.c.size());
  for (Eigen::Index k = 0; k < m.c.rows(); ++k)
    for (Eigen::Index l = 0; l < m.c.cols(); ++l) c_flat.push_back(m.c(k, l));
  j["c"] = c_flat;
  if (m.has_variogram)
    j["variogram"] = {{"family", to_string(m.variogram.family)},
                      {"nugget", m.variogram.nugget},
                      {"partial_sill", m.variogram.partial_sill},
                      {"range_km", m.variogram.range}};
  j["rss"] = m.rss;
  j["gls_rss"] = m.gls_rss;
  j["r2"] = m.r2;
  j["n"] = n;
  j["K"] = m.basis->K();
  if (!m.warnings.empty()) j["warnings"] = m.warnings;

  std::ofstream out(path);
  if (!out) throw IngestError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace sfreg
