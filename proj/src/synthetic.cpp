#include "sfreg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Cholesky>

#include <nlohmann/json.hpp>

#include "sfreg/csv.hpp"
#include "sfreg/geo.hpp"

namespace sfreg {

Scenario parse_scenario(const std::string& name) {
  if (name == "M1_known_ABC") return Scenario::M1_known_ABC;
  if (name == "M2_no_interaction") return Scenario::M2_no_interaction;
  if (name == "pure_noise") return Scenario::pure_noise;
  throw ConfigError("unknown scenario '" + name +
                    "' (expected M1_known_ABC, M2_no_interaction or pure_noise)");
}

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::M1_known_ABC: return "M1_known_ABC";
    case Scenario::M2_no_interaction: return "M2_no_interaction";
    default: return "pure_noise";
  }
}

void SyntheticConfig::validate() const {
  if (n_response < 3 || n_climate < 2)
    throw ConfigError("synthetic generation needs n_response >= 3 and n_climate >= 2");
  if (basis_order < 1) throw ConfigError("basis_order must be >= 1");
  if (!(signal_sd > 0.0)) throw ConfigError("signal_sd must be > 0");
  if (noise_sd_fraction < 0.0) throw ConfigError("noise_sd_fraction must be >= 0");
  if (!(grid_step > 0.0)) throw ConfigError("grid_step must be > 0");
  if (min_records < 1 || max_records < min_records)
    throw ConfigError("need 1 <= min_records <= max_records");
  if (missing_fraction < 0.0 || missing_fraction > 0.5)
    throw ConfigError("missing_fraction must be in [0, 0.5]");
  if (!(lon_max > lon_min) || !(lat_max > lat_min))
    throw ConfigError("degenerate bounding box");
  domain.validate();
}

Eigen::VectorXd sample_gaussian_field(const Eigen::MatrixXd& cov, std::mt19937_64& rng) {
  const Eigen::Index n = cov.rows();
  Eigen::MatrixXd c = cov;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int attempt = 0;; ++attempt) {
    llt.compute(c);
    if (llt.info() == Eigen::Success) break;
    if (attempt >= 3) throw NumericError("sampling covariance is not positive definite");
    c.diagonal().array() += 1e-12 * cov.diagonal().mean();
  }
  std::normal_distribution<double> gauss;
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = gauss(rng);
  return Eigen::MatrixXd(llt.matrixL()) * g;
}

Eigen::MatrixXd sample_separable_gp(std::span<const SiteLocation> sites,
                                    const std::vector<double>& times,
                                    const SeparableCovariance& cov, std::mt19937_64& rng) {
  cov.validate();
  const Eigen::Index ns = static_cast<Eigen::Index>(sites.size());
  const Eigen::Index nt = static_cast<Eigen::Index>(times.size());

  Eigen::MatrixXd cs(ns, ns);
  const Eigen::MatrixXd d = distance_matrix(sites);
  for (Eigen::Index i = 0; i < ns; ++i)
    for (Eigen::Index j = 0; j < ns; ++j) cs(i, j) = std::exp(-d(i, j) / cov.range_s);
  Eigen::MatrixXd ct(nt, nt);
  for (Eigen::Index i = 0; i < nt; ++i)
    for (Eigen::Index j = 0; j < nt; ++j)
      ct(i, j) = std::exp(-std::fabs(times[i] - times[j]) / cov.range_t);
  cs.diagonal().array() += 1e-10;
  ct.diagonal().array() += 1e-10;

  Eigen::LLT<Eigen::MatrixXd> llt_s(cs), llt_t(ct);
  if (llt_s.info() != Eigen::Success || llt_t.info() != Eigen::Success)
    throw NumericError("separable sampling covariance is not positive definite");

  std::normal_distribution<double> gauss;
  Eigen::MatrixXd g(ns, nt);
  for (Eigen::Index i = 0; i < ns; ++i)
    for (Eigen::Index j = 0; j < nt; ++j) g(i, j) = gauss(rng);
  return std::sqrt(cov.sigma2) * Eigen::MatrixXd(llt_s.matrixL()) * g *
         Eigen::MatrixXd(llt_t.matrixL()).transpose();
}

namespace {

std::string site_name(char prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%04d", prefix, i + 1);
  return buf;
}

double sd(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / (v.size() - 1));
}

}  // namespace

SyntheticBundle generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SyntheticBundle b;
  b.mu = cfg.mu;
  b.basis = make_basis({BasisFamily::fourier, cfg.basis_order, cfg.domain});
  const int K = b.basis->K();
  const double T = cfg.domain.length();

  // master time grid
  const int n_grid = static_cast<int>(std::llround(T / cfg.grid_step)) + 1;
  b.master_grid = uniform_grid(cfg.domain, n_grid);

  // sites: climate first, then response
  const int nc = cfg.n_climate, nr = cfg.n_response, nall = nc + nr;
  std::vector<SiteLocation> all_sites;
  all_sites.reserve(nall);
  for (int i = 0; i < nall; ++i) {
    SiteLocation s;
    s.site_id = i < nc ? site_name('C', i) : site_name('R', i - nc);
    s.lon = cfg.lon_min + (cfg.lon_max - cfg.lon_min) * unif(rng);
    s.lat = cfg.lat_min + (cfg.lat_max - cfg.lat_min) * unif(rng);
    all_sites.push_back(s);
  }
  b.climate_sites.assign(all_sites.begin(), all_sites.begin() + nc);
  b.response_sites.assign(all_sites.begin() + nc, all_sites.end());

  // one spatial factor shared by every coefficient field
  const Eigen::MatrixXd dist = distance_matrix(all_sites);
  Eigen::MatrixXd corr(nall, nall);
  for (int i = 0; i < nall; ++i)
    for (int j = 0; j < nall; ++j)
      corr(i, j) = std::exp(-dist(i, j) / cfg.coeff_range_km);
  corr.diagonal().array() += 1e-9;
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success)
    throw NumericError("site correlation for synthetic fields is not positive definite");
  const Eigen::MatrixXd Ls = llt.matrixL();

  // temporal spectrum at the basis frequencies: exponential-decay shape
  Eigen::VectorXd lambda(K);
  for (int k = 0; k < K; ++k) {
    const int harmonic = (k + 1) / 2;  // 0 for the constant, j for sin/cos pair j
    const double w = 2.0 * M_PI * harmonic * cfg.temporal_range / T;
    lambda(k) = 1.0 / (1.0 + w * w);
  }
  const Eigen::VectorXd lam_t = lambda * (T * cfg.temp_sd * cfg.temp_sd / lambda.sum());
  const Eigen::VectorXd lam_p = lambda * (T * cfg.prec_sd * cfg.prec_sd / lambda.sum());

  // mean curves in coefficient space: level plus one slow harmonic
  Eigen::VectorXd mean_t = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd mean_p = Eigen::VectorXd::Zero(K);
  mean_t(0) = -1.5 * std::sqrt(T);
  if (K > 1) mean_t(1) = 2.0 / std::sqrt(2.0 / T);
  mean_p(0) = 100.0 * std::sqrt(T);
  if (K > 2) mean_p(2) = -100.0 / std::sqrt(2.0 / T);

  // coefficient fields over all sites
  auto draw_field = [&](double scale) {
    Eigen::VectorXd g(nall);
    for (int i = 0; i < nall; ++i) g(i) = gauss(rng);
    return (scale * (Ls * g)).eval();
  };
  Eigen::MatrixXd alpha_all(nall, K), beta_all(nall, K);
  for (int k = 0; k < K; ++k)
    alpha_all.col(k) = draw_field(std::sqrt(lam_t(k))).array() + mean_t(k);
  for (int k = 0; k < K; ++k)
    beta_all.col(k) = draw_field(std::sqrt(lam_p(k))).array() + mean_p(k);

  b.theta_coeffs = alpha_all.bottomRows(nr);
  b.pi_coeffs = beta_all.bottomRows(nr);

  // truth coefficients, scaled so the realized signal sd hits the target
  Eigen::VectorXd a_raw(K), b_raw(K);
  Eigen::MatrixXd c_raw(K, K);
  for (int k = 0; k < K; ++k) a_raw(k) = gauss(rng);
  for (int k = 0; k < K; ++k) b_raw(k) = gauss(rng);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) c_raw(k, l) = gauss(rng);

  double wa = 0.60, wb = 0.60, wc = 0.50;
  if (cfg.scenario == Scenario::M2_no_interaction) {
    wc = 0.0;
    wa = wb = 1.0 / std::sqrt(2.0);
  } else if (cfg.scenario == Scenario::pure_noise) {
    wa = wb = wc = 0.0;
  }

  Eigen::VectorXd fa(nr), fb(nr), fc(nr);
  for (int i = 0; i < nr; ++i) {
    fa(i) = a_raw.dot(b.theta_coeffs.row(i));
    fb(i) = b_raw.dot(b.pi_coeffs.row(i));
    fc(i) = b.theta_coeffs.row(i) * c_raw * b.pi_coeffs.row(i).transpose();
  }
  const double tiny = 1e-300;
  b.a_true = a_raw * (wa * cfg.signal_sd / std::max(sd(fa), tiny));
  b.b_true = b_raw * (wb * cfg.signal_sd / std::max(sd(fb), tiny));
  b.c_true = c_raw * (wc * cfg.signal_sd / std::max(sd(fc), tiny));

  Eigen::VectorXd f(nr);
  for (int i = 0; i < nr; ++i)
    f(i) = b.a_true.dot(b.theta_coeffs.row(i)) + b.b_true.dot(b.pi_coeffs.row(i)) +
           b.theta_coeffs.row(i) * b.c_true * b.pi_coeffs.row(i).transpose();
  const double fsd = sd(f);
  if (cfg.scenario != Scenario::pure_noise && fsd > 0.0) {
    const double rescale = cfg.signal_sd / fsd;
    b.a_true *= rescale;
    b.b_true *= rescale;
    b.c_true *= rescale;
    f *= rescale;
  }
  b.signal_sd = cfg.scenario == Scenario::pure_noise ? 0.0 : cfg.signal_sd;

  // spatially correlated (or iid) noise on the response
  b.noise_sd = cfg.noise_sd_fraction * cfg.signal_sd;
  b.spatial_noise = cfg.noise_range_km > 0.0;
  Eigen::VectorXd eps(nr);
  if (b.spatial_noise && b.noise_sd > 0.0) {
    const double var = b.noise_sd * b.noise_sd;
    b.noise_model = VariogramModel{VariogramFamily::exponential,
                                   cfg.noise_nugget_fraction * var,
                                   (1.0 - cfg.noise_nugget_fraction) * var,
                                   cfg.noise_range_km};
    const Eigen::MatrixXd rdist = dist.bottomRightCorner(nr, nr);
    eps = sample_gaussian_field(build_covariance(b.noise_model, rdist), rng);
  } else {
    for (int i = 0; i < nr; ++i) eps(i) = b.noise_sd * gauss(rng);
  }

  b.y.resize(nr);
  for (int i = 0; i < nr; ++i) b.y[i] = cfg.mu + f(i) + eps(i);

  // response-site noise-free curves on the master grid
  const Eigen::MatrixXd E = b.basis->eval_matrix(b.master_grid);
  b.theta_true.reserve(nr);
  b.pi_true.reserve(nr);
  for (int i = 0; i < nr; ++i) {
    SampledCurve th, pi;
    th.site_id = pi.site_id = b.response_sites[i].site_id;
    th.times = pi.times = b.master_grid;
    const Eigen::VectorXd tv = E * b.theta_coeffs.row(i).transpose();
    const Eigen::VectorXd pv = E * b.pi_coeffs.row(i).transpose();
    th.values.assign(tv.data(), tv.data() + tv.size());
    pi.values.assign(pv.data(), pv.data() + pv.size());
    b.theta_true.push_back(std::move(th));
    b.pi_true.push_back(std::move(pi));
  }

  // irregular climate records: random grid subsets, measurement noise, gaps
  const double meas_t = cfg.measurement_sd_fraction * cfg.temp_sd;
  const double meas_p = cfg.measurement_sd_fraction * cfg.prec_sd;
  std::vector<int> idx(b.master_grid.size());
  for (int s = 0; s < nc; ++s) {
    std::iota(idx.begin(), idx.end(), 0);
    const int span = std::min<int>(cfg.max_records, static_cast<int>(idx.size()));
    const int lo = std::min(cfg.min_records, span);
    const int n_rec = std::uniform_int_distribution<int>(lo, span)(rng);
    for (int j = 0; j < n_rec; ++j) {  // partial Fisher-Yates
      const int pick =
          std::uniform_int_distribution<int>(j, static_cast<int>(idx.size()) - 1)(rng);
      std::swap(idx[j], idx[pick]);
    }
    std::sort(idx.begin(), idx.begin() + n_rec);
    for (int j = 0; j < n_rec; ++j) {
      const double t = b.master_grid[idx[j]];
      const Eigen::VectorXd et = E.row(idx[j]).transpose();
      ClimateRow row;
      row.site_index = s;
      row.age = cfg.domain.t_max - t;
      row.temperature = et.dot(alpha_all.row(s)) + meas_t * gauss(rng);
      row.precipitation = et.dot(beta_all.row(s)) + meas_p * gauss(rng);
      if (unif(rng) < cfg.missing_fraction) {
        if (unif(rng) < 0.5)
          row.has_temperature = false;
        else
          row.has_precipitation = false;
      }
      b.climate_rows.push_back(row);
      if (row.has_temperature)
        b.temperature_records.push_back({all_sites[s], t, row.temperature});
      if (row.has_precipitation)
        b.precipitation_records.push_back({all_sites[s], t, row.precipitation});
    }
  }
  return b;
}

void write_synthetic_files(const SyntheticBundle& b, const SyntheticConfig& cfg,
                           const std::string& climate_path,
                           const std::string& response_path,
                           const std::string& truth_path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(b.climate_rows.size());
  for (const ClimateRow& r : b.climate_rows) {
    const SiteLocation& s = b.climate_sites[r.site_index];
    rows.push_back({s.site_id, format_full(s.lon), format_full(s.lat),
                    format_full(r.age),
                    r.has_temperature ? format_full(r.temperature) : "",
                    r.has_precipitation ? format_full(r.precipitation) : ""});
  }
  write_csv(climate_path,
            {"site_id", "lon", "lat", "age_kyr_bp", "temperature", "precipitation"},
            rows);

  rows.clear();
  for (std::size_t i = 0; i < b.response_sites.size(); ++i) {
    const SiteLocation& s = b.response_sites[i];
    rows.push_back({s.site_id, format_full(s.lon), format_full(s.lat),
                    format_full(b.y[i])});
  }
  write_csv(response_path, {"site_id", "lon", "lat", "h_index"}, rows);

  nlohmann::json truth;
  truth["scenario"] = to_string(cfg.scenario);
  truth["seed"] = cfg.seed;
  truth["mu"] = b.mu;
  truth["basis"] = {{"family", to_string(b.basis->spec().family)},
                    {"order", b.basis->spec().order},
                    {"K", b.basis->K()},
                    {"t_min", b.basis->domain().t_min},
                    {"t_max", b.basis->domain().t_max}};
  truth["a"] = std::vector<double>(b.a_true.data(), b.a_true.data() + b.a_true.size());
  truth["b"] = std::vector<double>(b.b_true.data(), b.b_true.data() + b.b_true.size());
  std::vector<double> c_flat;
  for (Eigen::Index k = 0; k < b.c_true.rows(); ++k)
    for (Eigen::Index l = 0; l < b.c_true.cols(); ++l) c_flat.push_back(b.c_true(k, l));
  truth["c"] = c_flat;
  truth["signal_sd"] = b.signal_sd;
  truth["noise_sd"] = b.noise_sd;
  if (b.spatial_noise)
    truth["noise_variogram"] = {{"family", to_string(b.noise_model.family)},
                                {"nugget", b.noise_model.nugget},
                                {"partial_sill", b.noise_model.partial_sill},
                                {"range_km", b.noise_model.range}};
  truth["grid"] = b.master_grid;
  const Eigen::MatrixXd E = b.basis->eval_matrix(b.master_grid);
  const Eigen::VectorXd A = E * b.a_true, B = E * b.b_true;
  truth["A"] = std::vector<double>(A.data(), A.data() + A.size());
  truth["B"] = std::vector<double>(B.data(), B.data() + B.size());
  const Eigen::MatrixXd C = E * b.c_true * E.transpose();
  std::vector<double> c_grid;
  c_grid.reserve(C.size());
  for (Eigen::Index i = 0; i < C.rows(); ++i)
    for (Eigen::Index j = 0; j < C.cols(); ++j) c_grid.push_back(C(i, j));
  truth["C"] = c_grid;

  std::ofstream out(truth_path);
  if (!out) throw IngestError("cannot write '" + truth_path + "'");
  out << truth.dump(2) << "\n";
}

}  // namespace sfreg
