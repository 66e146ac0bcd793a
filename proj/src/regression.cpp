#include "sfreg/regression.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace sfreg {

ModelId parse_model_id(const std::string& name) {
  if (name == "M1") return ModelId::M1_full;
  if (name == "M2") return ModelId::M2_additive;
  if (name == "M3") return ModelId::M3_theta_only;
  if (name == "M4") return ModelId::M4_pi_only;
  if (name == "M0") return ModelId::M0_mean_only;
  throw ConfigError("unknown model id '" + name + "' (expected M0..M4)");
}

std::string to_string(ModelId id) {
  switch (id) {
    case ModelId::M1_full: return "M1";
    case ModelId::M2_additive: return "M2";
    case ModelId::M3_theta_only: return "M3";
    case ModelId::M4_pi_only: return "M4";
    default: return "M0";
  }
}

std::vector<SiteLocation> Dataset::sites() const {
  std::vector<SiteLocation> s;
  s.reserve(rows.size());
  for (const auto& r : rows) s.push_back(r.site);
  return s;
}

Eigen::VectorXd Dataset::y() const {
  Eigen::VectorXd v(n());
  for (int i = 0; i < n(); ++i) v(i) = rows[i].y;
  return v;
}

void Dataset::validate() const {
  if (!basis) throw NumericError("dataset has no basis");
  const int k = K();
  for (const auto& r : rows) {
    r.site.validate();
    if (!std::isfinite(r.y))
      throw NumericError("site '" + r.site.site_id + "' has non-finite response");
    if (r.theta.size() != k || r.pi.size() != k)
      throw NumericError("site '" + r.site.site_id +
                         "' has coefficient vectors not matching the shared basis");
    if (!r.theta.allFinite() || !r.pi.allFinite())
      throw NumericError("site '" + r.site.site_id + "' has non-finite coefficients");
  }
}

int design_width(ModelId id, int K) {
  switch (id) {
    case ModelId::M1_full: return 2 * K + K * K;
    case ModelId::M2_additive: return 2 * K;
    case ModelId::M3_theta_only:
    case ModelId::M4_pi_only: return K;
    default: return 0;
  }
}

Eigen::MatrixXd build_design(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& beta,
                             ModelId id) {
  if (alpha.cols() != beta.cols())
    throw NumericError("theta and pi coefficient blocks have different K");
  if (alpha.rows() != beta.rows())
    throw NumericError("theta and pi coefficient blocks have different row counts");
  const Eigen::Index n = alpha.rows();
  const Eigen::Index K = alpha.cols();
  Eigen::MatrixXd X(n, design_width(id, static_cast<int>(K)));
  switch (id) {
    case ModelId::M0_mean_only: break;
    case ModelId::M3_theta_only: X = alpha; break;
    case ModelId::M4_pi_only: X = beta; break;
    case ModelId::M2_additive:
      X.leftCols(K) = alpha;
      X.rightCols(K) = beta;
      break;
    case ModelId::M1_full:
      X.leftCols(K) = alpha;
      X.middleCols(K, K) = beta;
      for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index l = 0; l < K; ++l)
          X.col(2 * K + k * K + l) = alpha.col(k).cwiseProduct(beta.col(l));
      break;
  }
  return X;
}

Eigen::MatrixXd build_design(const Dataset& ds, ModelId id) {
  const int n = ds.n();
  const int K = ds.K();
  Eigen::MatrixXd alpha(n, K), beta(n, K);
  for (int i = 0; i < n; ++i) {
    alpha.row(i) = ds.rows[i].theta.transpose();
    beta.row(i) = ds.rows[i].pi.transpose();
  }
  return build_design(alpha, beta, id);
}

namespace {

// Describes a design column (0-based within X) or the intercept.
std::string column_name(Eigen::Index full_col) {
  if (full_col == 0) return "intercept";
  std::ostringstream s;
  s << "column " << (full_col - 1);
  return s.str();
}

struct CoreFit {
  Eigen::VectorXd beta;         // (p+1), intercept first
  Eigen::MatrixXd cov_unscaled; // ([1|X]^T [1|X])^-1
  double rss = 0.0;             // on the solved (possibly whitened) scale
};

CoreFit solve_with_intercept(const Eigen::MatrixXd& Xfull, const Eigen::VectorXd& y) {
  const Eigen::Index n = Xfull.rows();
  const Eigen::Index p1 = Xfull.cols();
  if (n < p1) {
    std::ostringstream msg;
    msg << "underdetermined fit: n = " << n << ", parameters (with intercept) = " << p1;
    throw NumericError(msg.str());
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xfull);
  if (qr.rank() < p1) {
    // name a duplicate pair when one exists, else the redundant columns
    for (Eigen::Index i = 0; i < p1; ++i)
      for (Eigen::Index j = i + 1; j < p1; ++j) {
        const double scale = std::max(Xfull.col(i).norm(), Xfull.col(j).norm());
        if ((Xfull.col(i) - Xfull.col(j)).norm() <= 1e-8 * std::max(scale, 1e-300)) {
          throw NumericError("design is rank deficient: " + column_name(i) + " and " +
                             column_name(j) + " are duplicates");
        }
      }
    std::ostringstream msg;
    msg << "design is rank deficient (rank " << qr.rank() << " of " << p1
        << "); redundant:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index r = qr.rank(); r < p1; ++r) msg << " " << column_name(perm(r));
    throw NumericError(msg.str());
  }

  CoreFit fit;
  fit.beta = qr.solve(y);
  fit.rss = (y - Xfull * fit.beta).squaredNorm();
  const Eigen::MatrixXd Rinv = qr.matrixR()
                                   .topLeftCorner(p1, p1)
                                   .triangularView<Eigen::Upper>()
                                   .solve(Eigen::MatrixXd::Identity(p1, p1));
  fit.cov_unscaled =
      qr.colsPermutation() * (Rinv * Rinv.transpose()) * qr.colsPermutation().transpose();
  return fit;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X, Eigen::Index n) {
  Eigen::MatrixXd Xfull(n, X.cols() + 1);
  Xfull.col(0).setOnes();
  if (X.cols() > 0) Xfull.rightCols(X.cols()) = X;
  return Xfull;
}

double total_ss(const Eigen::VectorXd& y) {
  return (y.array() - y.mean()).square().sum();
}

}  // namespace

LinearFit ols_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::Index n = y.size();
  if (X.rows() != n) throw NumericError("design and response sizes differ");
  const Eigen::MatrixXd Xfull = with_intercept(X, n);
  const CoreFit core = solve_with_intercept(Xfull, y);

  LinearFit lf;
  lf.mu = core.beta(0);
  lf.phi = core.beta.tail(X.cols());
  lf.residuals = y - Xfull * core.beta;
  lf.rss = lf.residuals.squaredNorm();
  lf.gls_rss = lf.rss;
  const double tss = total_ss(y);
  lf.r2 = tss > 0.0 ? 1.0 - lf.rss / tss : 0.0;
  const double dof = static_cast<double>(n - X.cols() - 1);
  const double sigma2_hat = dof > 0.0 ? lf.rss / dof : 0.0;
  lf.cov = sigma2_hat * core.cov_unscaled;
  return lf;
}

LinearFit gls_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const Eigen::MatrixXd& sigma) {
  const Eigen::Index n = y.size();
  if (X.rows() != n) throw NumericError("design and response sizes differ");
  if (sigma.size() == 0) {
    LinearFit lf = ols_solve(X, y);
    // report the covariance the GLS formula gives under identity
    const double dof = static_cast<double>(n - X.cols() - 1);
    const double sigma2_hat = dof > 0.0 ? lf.rss / dof : 0.0;
    if (sigma2_hat > 0.0) lf.cov /= sigma2_hat;
    return lf;
  }
  if (sigma.rows() != n || sigma.cols() != n)
    throw NumericError("covariance size does not match the data");

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw NumericError("residual covariance is not positive definite");

  const Eigen::MatrixXd Xfull = with_intercept(X, n);
  const Eigen::MatrixXd Xw = llt.matrixL().solve(Xfull);
  const Eigen::VectorXd yw = llt.matrixL().solve(y);
  const CoreFit core = solve_with_intercept(Xw, yw);

  LinearFit lf;
  lf.mu = core.beta(0);
  lf.phi = core.beta.tail(X.cols());
  lf.residuals = y - Xfull * core.beta;
  lf.rss = lf.residuals.squaredNorm();
  lf.gls_rss = core.rss;
  const double tss = total_ss(y);
  lf.r2 = tss > 0.0 ? 1.0 - lf.rss / tss : 0.0;
  lf.cov = core.cov_unscaled;  // (X^T Sigma^-1 X)^-1 through the whitened QR
  return lf;
}

namespace {

void unpack_blocks(FittedModel& m, int K) {
  m.a = Eigen::VectorXd::Zero(K);
  m.b = Eigen::VectorXd::Zero(K);
  m.c = Eigen::MatrixXd::Zero(K, K);
  switch (m.model_id) {
    case ModelId::M0_mean_only: break;
    case ModelId::M3_theta_only: m.a = m.phi; break;
    case ModelId::M4_pi_only: m.b = m.phi; break;
    case ModelId::M2_additive:
      m.a = m.phi.head(K);
      m.b = m.phi.tail(K);
      break;
    case ModelId::M1_full:
      m.a = m.phi.head(K);
      m.b = m.phi.segment(K, K);
      for (int k = 0; k < K; ++k) m.c.row(k) = m.phi.segment(2 * K + k * K, K).transpose();
      break;
  }
}

// Dataset-level fits demand strictly more observations than parameters so
// residual degrees of freedom exist.
void check_fit_size(const Dataset& ds, ModelId id) {
  const int p = design_width(id, ds.K());
  if (ds.n() <= p + 1) {
    std::ostringstream msg;
    msg << to_string(id) << " with K = " << ds.K() << " has " << p + 1
        << " parameters; n = " << ds.n() << " observations are not enough (need n > "
        << p + 1 << ")";
    throw NumericError(msg.str());
  }
}

FittedModel from_linear_fit(const Dataset& ds, ModelId id, const LinearFit& lf) {
  FittedModel m;
  m.model_id = id;
  m.basis = ds.basis;
  m.mu = lf.mu;
  m.phi = lf.phi;
  m.phi_cov = lf.cov;
  m.residuals = lf.residuals;
  m.rss = lf.rss;
  m.gls_rss = lf.gls_rss;
  m.r2 = lf.r2;
  unpack_blocks(m, ds.K());
  return m;
}

}  // namespace

FittedModel ols_fit(const Dataset& ds, ModelId id) {
  ds.validate();
  check_fit_size(ds, id);
  const Eigen::MatrixXd X = build_design(ds, id);
  return from_linear_fit(ds, id, ols_solve(X, ds.y()));
}

FittedModel gls_fit(const Dataset& ds, ModelId id, const Eigen::MatrixXd& sigma) {
  ds.validate();
  check_fit_size(ds, id);
  const Eigen::MatrixXd X = build_design(ds, id);
  FittedModel m = from_linear_fit(ds, id, gls_solve(X, ds.y(), sigma));
  m.sigma = sigma;
  return m;
}

FittedModel qgls_fit(const Dataset& ds, ModelId id, VariogramFamily family,
                     int qgls_iterations, int variogram_bins,
                     const Eigen::MatrixXd* site_distances) {
  if (qgls_iterations < 1) throw ConfigError("qgls_iterations must be >= 1");
  ds.validate();
  check_fit_size(ds, id);
  const Eigen::MatrixXd X = build_design(ds, id);
  const Eigen::VectorXd y = ds.y();

  Eigen::MatrixXd own_dist;
  if (!site_distances) {
    const auto sites = ds.sites();
    own_dist = distance_matrix(sites);
    site_distances = &own_dist;
  }
  const Eigen::MatrixXd& dist = *site_distances;
  if (dist.rows() != ds.n() || dist.cols() != ds.n())
    throw NumericError("site distance matrix does not match the dataset");

  LinearFit lf = ols_solve(X, y);
  FittedModel m;
  for (int iter = 0; iter < qgls_iterations; ++iter) {
    const EmpiricalVariogram ev = empirical_variogram(
        lf.residuals, dist, variogram_bins, default_max_lag(dist));
    const VariogramModel vm = fit_variogram(ev, family);
    const Eigen::MatrixXd sigma = build_covariance(vm, dist);
    lf = gls_solve(X, y, sigma);
    m = from_linear_fit(ds, id, lf);
    m.sigma = sigma;
    m.variogram = vm;
    m.empirical = ev;
    m.has_variogram = true;
  }

  double min_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < dist.rows(); ++i)
    for (Eigen::Index j = i + 1; j < dist.cols(); ++j)
      if (dist(i, j) > 0.0) min_dist = std::min(min_dist, dist(i, j));
  if (std::isfinite(min_dist) && m.variogram.range < min_dist) {
    std::ostringstream w;
    w << "fitted variogram range " << m.variogram.range
      << " km is below the smallest inter-site distance " << min_dist
      << " km; spatial correlation is unidentifiable and the covariance is "
         "effectively diagonal";
    m.warnings.push_back(w.str());
  }
  return m;
}

double predict(const FittedModel& m, const Eigen::VectorXd& theta,
               const Eigen::VectorXd& pi) {
  if (theta.size() != m.a.size() || pi.size() != m.b.size())
    throw NumericError("coefficient vector length does not match the fitted model");
  return m.mu + m.a.dot(theta) + m.b.dot(pi) + theta.dot(m.c * pi);
}

double predict(const FittedModel& m, const CoefficientVector& theta,
               const CoefficientVector& pi) {
  if (!m.basis || !theta.basis || !pi.basis)
    throw NumericError("prediction needs a basis on both the model and the inputs");
  if (!(theta.basis->spec() == m.basis->spec()) || !(pi.basis->spec() == m.basis->spec()))
    throw NumericError("basis mismatch between the fitted model and the inputs");
  return predict(m, theta.coeffs, pi.coeffs);
}

CoefficientFunctions coefficient_functions(const FittedModel& m, int grid_points) {
  if (!m.basis) throw NumericError("fitted model carries no basis");
  CoefficientFunctions cf;
  cf.grid = uniform_grid(m.basis->domain(), grid_points);
  cf.A = reconstruct_function(*m.basis, m.a, cf.grid);
  cf.B = reconstruct_function(*m.basis, m.b, cf.grid);
  cf.C = reconstruct_kernel(*m.basis, m.c, cf.grid, cf.grid);
  return cf;
}

}  // namespace sfreg
