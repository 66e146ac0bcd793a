#include "sfreg/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sfreg/stats.hpp"

namespace sfreg {

void CurveDataset::validate(const TimeDomain& domain) const {
  const std::size_t m = sites.size();
  if (y.size() != m || theta_curves.size() != m || pi_curves.size() != m)
    throw NumericError("curve dataset fields have mismatched lengths");
  for (std::size_t i = 0; i < m; ++i) {
    sites[i].validate();
    if (!std::isfinite(y[i]))
      throw NumericError("site '" + sites[i].site_id + "' has non-finite response");
    theta_curves[i].validate(domain);
    pi_curves[i].validate(domain);
  }
}

Dataset project_dataset(const CurveDataset& cd, std::shared_ptr<const Basis> basis) {
  if (!basis) throw NumericError("projection needs a basis");
  cd.validate(basis->domain());
  Dataset ds;
  ds.basis = basis;
  ds.rows.reserve(cd.sites.size());
  for (int i = 0; i < cd.n(); ++i) {
    DatasetRow row;
    row.site = cd.sites[i];
    row.y = cd.y[i];
    row.theta = project_curve(cd.theta_curves[i], *basis);
    row.pi = project_curve(cd.pi_curves[i], *basis);
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

CvCovarianceMode parse_cv_mode(const std::string& name) {
  if (name == "identity") return CvCovarianceMode::identity;
  if (name == "fold_refit") return CvCovarianceMode::fold_refit;
  if (name == "full_sample") return CvCovarianceMode::full_sample;
  throw ConfigError("unknown cv mode '" + name +
                    "' (expected identity, fold_refit or full_sample)");
}

std::string to_string(CvCovarianceMode mode) {
  switch (mode) {
    case CvCovarianceMode::identity: return "identity";
    case CvCovarianceMode::fold_refit: return "fold_refit";
    default: return "full_sample";
  }
}

namespace {

void drop_design_row(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, int skip,
                     Eigen::MatrixXd& Xf, Eigen::VectorXd& yf) {
  const Eigen::Index n = X.rows();
  Xf.resize(n - 1, X.cols());
  yf.resize(n - 1);
  Xf.topRows(skip) = X.topRows(skip);
  yf.head(skip) = y.head(skip);
  Xf.bottomRows(n - 1 - skip) = X.bottomRows(n - 1 - skip);
  yf.tail(n - 1 - skip) = y.tail(n - 1 - skip);
}

Eigen::MatrixXd drop_row_col(const Eigen::MatrixXd& m, int skip) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd out(n - 1, n - 1);
  for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
    if (i == skip) continue;
    for (Eigen::Index j = 0, oj = 0; j < n; ++j) {
      if (j == skip) continue;
      out(oi, oj) = m(i, j);
      ++oj;
    }
    ++oi;
  }
  return out;
}

}  // namespace

double loocv_score(const Dataset& ds, ModelId id, VariogramFamily family,
                   CvCovarianceMode mode, int qgls_iterations, int variogram_bins,
                   const Eigen::MatrixXd* site_distances,
                   std::vector<double>* per_site_errors) {
  ds.validate();
  const int n = ds.n();
  const int p = design_width(id, ds.K());
  if (n - 1 < p + 1) {
    std::ostringstream msg;
    msg << "leave-one-out folds are underdetermined: n = " << n << ", " << to_string(id)
        << " with K = " << ds.K() << " has " << p + 1 << " parameters";
    throw NumericError(msg.str());
  }

  Eigen::MatrixXd own_dist;
  if (!site_distances && mode != CvCovarianceMode::identity) {
    const auto sites = ds.sites();
    own_dist = distance_matrix(sites);
    site_distances = &own_dist;
  }

  Eigen::MatrixXd full_sigma;
  if (mode == CvCovarianceMode::full_sample) {
    const FittedModel full = qgls_fit(ds, id, family, qgls_iterations, variogram_bins,
                                      site_distances);
    full_sigma = full.sigma;
  }

  const Eigen::MatrixXd X = build_design(ds, id);
  const Eigen::VectorXd y = ds.y();

  if (per_site_errors) per_site_errors->assign(n, 0.0);
  double sse = 0.0;
  Eigen::MatrixXd Xf;
  Eigen::VectorXd yf;
  for (int i = 0; i < n; ++i) {
    drop_design_row(X, y, i, Xf, yf);
    LinearFit lf;
    try {
      switch (mode) {
        case CvCovarianceMode::identity:
          lf = ols_solve(Xf, yf);
          break;
        case CvCovarianceMode::fold_refit: {
          const Eigen::MatrixXd fold_dist = drop_row_col(*site_distances, i);
          lf = ols_solve(Xf, yf);
          for (int it = 0; it < qgls_iterations; ++it) {
            const EmpiricalVariogram ev = empirical_variogram(
                lf.residuals, fold_dist, variogram_bins, default_max_lag(fold_dist));
            const VariogramModel vm = fit_variogram(ev, family);
            lf = gls_solve(Xf, yf, build_covariance(vm, fold_dist));
          }
          break;
        }
        case CvCovarianceMode::full_sample: {
          lf = gls_solve(Xf, yf, drop_row_col(full_sigma, i));
          break;
        }
      }
    } catch (const std::exception& e) {
      throw NumericError("leave-one-out fold for site '" + ds.rows[i].site.site_id +
                         "' failed: " + e.what());
    }
    const double yhat = lf.mu + (p > 0 ? X.row(i).dot(lf.phi) : 0.0);
    const double err = ds.rows[i].y - yhat;
    if (per_site_errors) (*per_site_errors)[i] = err;
    sse += err * err;
  }
  return std::sqrt(sse / n);
}

std::vector<CvCandidate> CvConfig::candidates() const {
  if (bases.empty() || vfamilies.empty())
    throw ConfigError("cross-validation needs nonempty candidate lists");
  std::vector<CvCandidate> out;
  out.reserve(bases.size() * vfamilies.size());
  for (const BasisSpec& b : bases)
    for (VariogramFamily v : vfamilies) out.push_back({b, v});
  return out;
}

CvResult select_model(const CurveDataset& cd, const CvConfig& cfg) {
  const auto cands = cfg.candidates();
  CvResult res;
  res.candidates.reserve(cands.size());

  Eigen::MatrixXd dist;
  if (cfg.mode != CvCovarianceMode::identity) dist = distance_matrix(cd.sites);

  for (const CvCandidate& cand : cands) {
    CvCandidateResult r;
    r.candidate = cand;
    try {
      const Dataset ds = project_dataset(cd, make_basis(cand.basis));
      r.rmse_pred = loocv_score(ds, cfg.model_id, cand.vfamily, cfg.mode,
                                cfg.qgls_iterations, cfg.variogram_bins,
                                cfg.mode == CvCovarianceMode::identity ? nullptr : &dist,
                                &r.per_site_errors);
    } catch (const std::exception& e) {
      r.failed = true;
      r.error = e.what();
    }
    res.candidates.push_back(std::move(r));
  }

  for (std::size_t i = 0; i < res.candidates.size(); ++i) {
    const auto& r = res.candidates[i];
    if (r.failed) continue;
    if (res.winner < 0) {
      res.winner = static_cast<int>(i);
      continue;
    }
    const auto& best = res.candidates[res.winner];
    const int ki = r.candidate.basis.K(), kb = best.candidate.basis.K();
    if (r.rmse_pred < best.rmse_pred ||
        (r.rmse_pred == best.rmse_pred && ki < kb))
      res.winner = static_cast<int>(i);
  }
  if (res.winner < 0) {
    std::string detail;
    for (const auto& r : res.candidates) {
      if (!detail.empty()) detail += "; ";
      detail += to_string(r.candidate.basis.family) + " order " +
                std::to_string(r.candidate.basis.order) + ": " + r.error;
    }
    throw NumericError("every cross-validation candidate failed: " + detail);
  }
  return res;
}

namespace {

AnovaRow compare(const std::string& name, double rss_r, double rss_f, int df_extra,
                 long n, int p_full) {
  AnovaRow row;
  row.comparison = name;
  row.df1 = df_extra;
  row.df2 = n - p_full - 1;
  row.rss_reduced = rss_r;
  row.rss_full = rss_f;
  if (row.df2 <= 0) throw NumericError("no residual degrees of freedom for " + name);
  if (rss_f <= 0.0) {
    row.F = std::numeric_limits<double>::infinity();
    row.p_value = 0.0;
    return row;
  }
  const double num = std::max(0.0, rss_r - rss_f) / df_extra;
  const double den = rss_f / row.df2;
  row.F = num / den;
  row.p_value = std::max(f_upper_tail(row.F, row.df1, static_cast<double>(row.df2)),
                         1e-300);
  return row;
}

}  // namespace

AnovaTable nested_anova(const Dataset& ds, const Eigen::MatrixXd& sigma) {
  ds.validate();
  const int K = ds.K();
  const long n = ds.n();

  const FittedModel m1 = gls_fit(ds, ModelId::M1_full, sigma);
  const FittedModel m2 = gls_fit(ds, ModelId::M2_additive, sigma);
  const FittedModel m3 = gls_fit(ds, ModelId::M3_theta_only, sigma);
  const FittedModel m4 = gls_fit(ds, ModelId::M4_pi_only, sigma);

  AnovaTable t;
  t.rss_m1 = m1.gls_rss;
  t.rss_m2 = m2.gls_rss;
  t.rss_m3 = m3.gls_rss;
  t.rss_m4 = m4.gls_rss;
  t.rows.push_back(compare("M3 vs M2", t.rss_m3, t.rss_m2, K, n,
                           design_width(ModelId::M2_additive, K)));
  t.rows.push_back(compare("M4 vs M2", t.rss_m4, t.rss_m2, K, n,
                           design_width(ModelId::M2_additive, K)));
  t.rows.push_back(compare("M2 vs M1", t.rss_m2, t.rss_m1, K * K, n,
                           design_width(ModelId::M1_full, K)));
  return t;
}

AnovaTable nested_anova(const Dataset& ds, VariogramFamily family, int variogram_bins) {
  const FittedModel m1 = qgls_fit(ds, ModelId::M1_full, family, 1, variogram_bins);
  return nested_anova(ds, m1.sigma);
}

ClassProfiles response_class_profiles(const Dataset& ds, const FittedModel& m,
                                      const std::vector<double>& class_edges,
                                      int grid_points) {
  ds.validate();
  if (!m.basis) throw NumericError("class profiles need a fitted model with a basis");
  if (!(m.basis->spec() == ds.basis->spec()))
    throw NumericError("basis mismatch between the dataset and the fitted model");
  for (std::size_t e = 1; e < class_edges.size(); ++e)
    if (!(class_edges[e] > class_edges[e - 1]))
      throw ConfigError("class edges must be strictly ascending");

  const int n_class = static_cast<int>(class_edges.size()) + 1;
  const int K = ds.K();
  ClassProfiles cp;
  cp.grid = uniform_grid(m.basis->domain(), grid_points);

  for (int c = 0; c < n_class; ++c) {
    std::ostringstream label;
    if (class_edges.empty())
      label << "all";
    else if (c == 0)
      label << "<=" << class_edges.front();
    else if (c == n_class - 1)
      label << ">" << class_edges.back();
    else
      label << "(" << class_edges[c - 1] << ".." << class_edges[c] << "]";  // no comma: labels live in CSV fields
    cp.labels.push_back(label.str());
  }
  cp.counts.assign(n_class, 0);

  std::vector<Eigen::VectorXd> theta_sum(n_class, Eigen::VectorXd::Zero(K));
  std::vector<Eigen::VectorXd> pi_sum(n_class, Eigen::VectorXd::Zero(K));
  Eigen::VectorXd theta_all = Eigen::VectorXd::Zero(K);
  Eigen::VectorXd pi_all = Eigen::VectorXd::Zero(K);

  cp.assignments.resize(ds.n());
  for (int i = 0; i < ds.n(); ++i) {
    const double yhat = predict(m, ds.rows[i].theta, ds.rows[i].pi);
    int c = 0;
    while (c < n_class - 1 && yhat > class_edges[c]) ++c;
    cp.assignments[i] = c;
    ++cp.counts[c];
    theta_sum[c] += ds.rows[i].theta;
    pi_sum[c] += ds.rows[i].pi;
    theta_all += ds.rows[i].theta;
    pi_all += ds.rows[i].pi;
  }

  // class means of coefficient vectors reconstruct to pointwise mean curves
  const Eigen::Index g = static_cast<Eigen::Index>(cp.grid.size());
  cp.theta_means = Eigen::MatrixXd::Constant(n_class, g,
                                             std::numeric_limits<double>::quiet_NaN());
  cp.pi_means = cp.theta_means;
  for (int c = 0; c < n_class; ++c) {
    if (cp.counts[c] == 0) continue;
    cp.theta_means.row(c) =
        reconstruct_function(*m.basis, theta_sum[c] / cp.counts[c], cp.grid).transpose();
    cp.pi_means.row(c) =
        reconstruct_function(*m.basis, pi_sum[c] / cp.counts[c], cp.grid).transpose();
  }
  cp.theta_global = reconstruct_function(*m.basis, theta_all / ds.n(), cp.grid);
  cp.pi_global = reconstruct_function(*m.basis, pi_all / ds.n(), cp.grid);
  return cp;
}

}  // namespace sfreg
