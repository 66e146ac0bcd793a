#include "sfreg/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Cholesky>

#include "sfreg/variogram.hpp"

namespace sfreg {

double SeparableCovariance::value(double h, double u) const {
  return sigma2 * std::exp(-h / range_s) * std::exp(-std::fabs(u) / range_t);
}

double SeparableCovariance::scaled_distance(double h, double u) const {
  const double hs = h / range_s;
  const double ut = u / range_t;
  return std::sqrt(hs * hs + ut * ut);
}

void SeparableCovariance::validate() const {
  if (!(sigma2 > 0.0)) throw NumericError("separable covariance needs sigma2 > 0");
  if (!(range_s > 0.0) || !(range_t > 0.0))
    throw NumericError("separable covariance needs positive ranges");
  if (nugget < 0.0) throw NumericError("separable covariance needs nugget >= 0");
}

namespace {

// Map each record to an index into the unique-site list (keyed by coordinates)
// so pair loops can use a precomputed site distance matrix.
std::vector<int> site_indices(std::span<const SpaceTimeRecord> records,
                              std::vector<SiteLocation>& unique_sites) {
  std::map<std::pair<double, double>, int> seen;
  std::vector<int> idx(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto key = std::make_pair(records[i].site.lon, records[i].site.lat);
    auto it = seen.find(key);
    if (it == seen.end()) {
      it = seen.emplace(key, static_cast<int>(unique_sites.size())).first;
      unique_sites.push_back(records[i].site);
    }
    idx[i] = it->second;
  }
  return idx;
}

EmpiricalVariogram bin_pairs(const std::vector<double>& lags,
                             const std::vector<double>& sqdiffs, int n_bins,
                             double max_dist, const char* what) {
  EmpiricalVariogram ev;
  ev.max_dist = max_dist;
  if (!(max_dist > 0.0))
    throw NumericError(std::string("no lag spread in the ") + what + " margin");
  const double width = max_dist / n_bins;
  ev.bin_centers.resize(n_bins);
  for (int b = 0; b < n_bins; ++b) ev.bin_centers[b] = (b + 0.5) * width;
  ev.pair_counts.assign(n_bins, 0);
  std::vector<double> sums(n_bins, 0.0);
  for (std::size_t p = 0; p < lags.size(); ++p) {
    if (lags[p] > max_dist) continue;
    int b = static_cast<int>(lags[p] / width);
    if (b >= n_bins) b = n_bins - 1;
    sums[b] += sqdiffs[p];
    ++ev.pair_counts[b];
  }
  ev.gamma_hat.resize(n_bins);
  for (int b = 0; b < n_bins; ++b)
    ev.gamma_hat[b] = ev.pair_counts[b] > 0
                          ? sums[b] / (2.0 * ev.pair_counts[b])
                          : std::numeric_limits<double>::quiet_NaN();
  return ev;
}

}  // namespace

SeparableCovariance fit_separable_covariance(std::span<const SpaceTimeRecord> records,
                                             int n_bins) {
  const std::size_t n = records.size();
  if (n < 30) throw NumericError("separable covariance fit needs at least 30 records");

  std::vector<SiteLocation> sites;
  const std::vector<int> sidx = site_indices(records, sites);
  if (sites.size() < 2)
    throw NumericError("separable covariance fit needs records at >= 2 sites");
  double tmin = records[0].time, tmax = records[0].time;
  for (const auto& r : records) {
    tmin = std::min(tmin, r.time);
    tmax = std::max(tmax, r.time);
  }
  if (!(tmax > tmin))
    throw NumericError("separable covariance fit needs records at >= 2 times");

  const Eigen::MatrixXd sdist = distance_matrix(sites);
  const double max_time_lag = tmax - tmin;

  // 10% quantile of all pairwise time lags via a fixed histogram; avoids
  // holding O(n^2) lags.
  constexpr int kHistBins = 1 << 20;
  std::vector<long long> hist(kHistBins, 0);
  long long total_pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double u = std::fabs(records[i].time - records[j].time);
      int b = static_cast<int>(u / max_time_lag * (kHistBins - 1));
      b = std::clamp(b, 0, kHistBins - 1);
      ++hist[b];
      ++total_pairs;
    }
  double lag_q10 = max_time_lag;
  long long cum = 0;
  for (int b = 0; b < kHistBins; ++b) {
    cum += hist[b];
    if (10 * cum >= total_pairs) {
      lag_q10 = (b + 1) * max_time_lag / (kHistBins - 1);
      break;
    }
  }

  // spatial margin: cross-site, near-simultaneous pairs
  std::vector<double> sp_lag, sp_sq, tm_lag, tm_sq;
  double max_sdist = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double diff = records[i].value - records[j].value;
      if (sidx[i] == sidx[j]) {
        tm_lag.push_back(std::fabs(records[i].time - records[j].time));
        tm_sq.push_back(diff * diff);
        continue;
      }
      if (std::fabs(records[i].time - records[j].time) > lag_q10) continue;
      const double h = sdist(sidx[i], sidx[j]);
      max_sdist = std::max(max_sdist, h);
      sp_lag.push_back(h);
      sp_sq.push_back(diff * diff);
    }
  if (sp_lag.empty())
    throw NumericError("no near-simultaneous cross-site pairs for the spatial margin");
  if (tm_lag.empty())
    throw NumericError("no same-site pairs for the temporal margin");

  const EmpiricalVariogram ev_s =
      bin_pairs(sp_lag, sp_sq, n_bins, 0.5 * max_sdist, "spatial");
  const double max_tlag = *std::max_element(tm_lag.begin(), tm_lag.end());
  const EmpiricalVariogram ev_t =
      bin_pairs(tm_lag, tm_sq, n_bins, 0.5 * max_tlag, "temporal");

  const VariogramModel vs = fit_variogram(ev_s, VariogramFamily::exponential);
  const VariogramModel vt = fit_variogram(ev_t, VariogramFamily::exponential);

  SeparableCovariance cov;
  cov.sigma2 = 0.5 * (vs.sill() + vt.sill());
  cov.nugget = 0.5 * (vs.nugget + vt.nugget);
  cov.range_s = vs.range;
  cov.range_t = vt.range;
  cov.validate();
  return cov;
}

namespace {

// Ordinary kriging solve over precomputed neighbor indices. Uses the Schur
// complement of the unbiasedness constraint on the Cholesky factor of the
// neighbor covariance; jitters the diagonal up to 3 times before failing.
KrigePrediction solve_ordinary(std::span<const SpaceTimeRecord> records,
                               const SeparableCovariance& cov,
                               const std::vector<int>& nb,
                               const std::vector<double>& h_to_target,
                               double target_time) {
  const int m = static_cast<int>(nb.size());
  Eigen::MatrixXd K(m, m);
  Eigen::VectorXd c(m);
  for (int i = 0; i < m; ++i) {
    const auto& ri = records[nb[i]];
    K(i, i) = cov.sigma2 + cov.nugget;
    for (int j = i + 1; j < m; ++j) {
      const auto& rj = records[nb[j]];
      const double h = great_circle_distance(ri.site, rj.site);
      K(i, j) = cov.value(h, ri.time - rj.time);
      K(j, i) = K(i, j);
    }
    c(i) = cov.value(h_to_target[nb[i]], ri.time - target_time);
  }

  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int attempt = 0;; ++attempt) {
    llt.compute(K);
    if (llt.info() == Eigen::Success) break;
    if (attempt >= 3)
      throw NumericError(
          "singular kriging system after jitter (duplicate records with zero nugget?)");
    K.diagonal().array() += 1e-10 * cov.sigma2;
  }

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  const Eigen::VectorXd Kc = llt.solve(c);
  const Eigen::VectorXd K1 = llt.solve(ones);
  const double denom = ones.dot(K1);
  if (!(denom > 0.0))
    throw NumericError("degenerate unbiasedness constraint in kriging system");
  const double lambda = (ones.dot(Kc) - 1.0) / denom;
  const Eigen::VectorXd w = Kc - lambda * K1;

  KrigePrediction out;
  for (int i = 0; i < m; ++i) out.value += w(i) * records[nb[i]].value;
  // error variance C00 - w.c - lambda with the multiplier convention
  // K w + lambda 1 = c; two uninformative samples give 1.5 sigma2
  const double var = cov.sigma2 - w.dot(c) - lambda;
  out.variance = std::max(0.0, var);
  out.weight_sum = w.sum();
  return out;
}

std::vector<int> nearest_neighbors(std::span<const SpaceTimeRecord> records,
                                   const SeparableCovariance& cov,
                                   const std::vector<double>& h_to_target,
                                   double target_time, int n_neighbors) {
  const int n = static_cast<int>(records.size());
  const int m = std::min(n_neighbors, n);
  std::vector<std::pair<double, int>> d(n);
  for (int i = 0; i < n; ++i)
    d[i] = {cov.scaled_distance(h_to_target[i], records[i].time - target_time), i};
  std::partial_sort(d.begin(), d.begin() + m, d.end());
  std::vector<int> nb(m);
  for (int i = 0; i < m; ++i) nb[i] = d[i].second;
  return nb;
}

}  // namespace

KrigePrediction krige_point(std::span<const SpaceTimeRecord> records,
                            const KrigingConfig& cfg, const SiteLocation& target_site,
                            double target_time) {
  if (records.empty()) throw NumericError("kriging needs at least one record");
  if (cfg.n_neighbors < 1) throw ConfigError("kriging needs n_neighbors >= 1");
  cfg.covariance.validate();

  std::vector<double> h(records.size());
  for (std::size_t i = 0; i < records.size(); ++i)
    h[i] = great_circle_distance(records[i].site, target_site);
  const auto nb =
      nearest_neighbors(records, cfg.covariance, h, target_time, cfg.n_neighbors);
  return solve_ordinary(records, cfg.covariance, nb, h, target_time);
}

std::vector<KrigedCurve> krige_curves(std::span<const SpaceTimeRecord> records,
                                      const KrigingConfig& cfg,
                                      std::span<const SiteLocation> target_sites) {
  if (records.empty()) throw NumericError("kriging needs at least one record");
  if (cfg.grid.empty()) throw ConfigError("kriging needs a nonempty time grid");
  if (cfg.n_neighbors < 1) throw ConfigError("kriging needs n_neighbors >= 1");
  cfg.covariance.validate();

  std::vector<KrigedCurve> out;
  out.reserve(target_sites.size());
  std::vector<double> h(records.size());
  for (const SiteLocation& site : target_sites) {
    for (std::size_t i = 0; i < records.size(); ++i)
      h[i] = great_circle_distance(records[i].site, site);
    KrigedCurve kc;
    kc.curve.site_id = site.site_id;
    kc.curve.times = cfg.grid;
    kc.curve.values.reserve(cfg.grid.size());
    kc.variances.reserve(cfg.grid.size());
    for (double t : cfg.grid) {
      const auto nb = nearest_neighbors(records, cfg.covariance, h, t, cfg.n_neighbors);
      const KrigePrediction p = solve_ordinary(records, cfg.covariance, nb, h, t);
      kc.curve.values.push_back(p.value);
      kc.variances.push_back(p.variance);
    }
    out.push_back(std::move(kc));
  }
  return out;
}

}  // namespace sfreg
