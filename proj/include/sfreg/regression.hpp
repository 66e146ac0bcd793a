#ifndef SFREG_REGRESSION_HPP
#define SFREG_REGRESSION_HPP

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sfreg/basis.hpp"
#include "sfreg/geo.hpp"
#include "sfreg/types.hpp"
#include "sfreg/variogram.hpp"

namespace sfreg {

// M1 full model; M2 drops the interaction; M3/M4 keep a single predictor;
// M0 is the intercept-only baseline.
enum class ModelId { M1_full, M2_additive, M3_theta_only, M4_pi_only, M0_mean_only };

ModelId parse_model_id(const std::string& name);  // "M0".."M4"; ConfigError on unknown
std::string to_string(ModelId id);

struct DatasetRow {
  SiteLocation site;
  double y = 0.0;
  Eigen::VectorXd theta;  // K basis coefficients of the first predictor curve
  Eigen::VectorXd pi;     // K coefficients of the second
};

struct Dataset {
  std::shared_ptr<const Basis> basis;
  std::vector<DatasetRow> rows;

  int n() const { return static_cast<int>(rows.size()); }
  int K() const { return basis ? basis->K() : 0; }
  std::vector<SiteLocation> sites() const;
  Eigen::VectorXd y() const;
  // checks shared basis dimensions and finite values; the n > p + 1 size
  // requirement is enforced per model at fit time
  void validate() const;
};

// Number of design columns for the model at truncation K: M1 = 2K + K^2,
// M2 = 2K, M3 = M4 = K, M0 = 0.
int design_width(ModelId id, int K);

// Column blocks [alpha | beta | vec(alpha beta^T) row-major], restricted to
// the model's blocks; the intercept is handled by the fitters, never stored.
Eigen::MatrixXd build_design(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& beta,
                             ModelId id);
Eigen::MatrixXd build_design(const Dataset& ds, ModelId id);

struct FittedModel {
  ModelId model_id = ModelId::M1_full;
  std::shared_ptr<const Basis> basis;  // null for matrix-level fits
  double mu = 0.0;
  Eigen::VectorXd phi;  // design_width(model_id, K) coefficients
  // phi unpacked per block, zero where the model has no such block
  Eigen::VectorXd a, b;
  Eigen::MatrixXd c;
  Eigen::MatrixXd phi_cov;    // (p+1) x (p+1) covariance of (mu, phi)
  Eigen::VectorXd residuals;  // y - mu - X phi (raw scale)
  double rss = 0.0;           // raw residual sum of squares
  double gls_rss = 0.0;       // whitened objective; equals rss for OLS
  double r2 = 0.0;            // 1 - rss / total sum of squares
  Eigen::MatrixXd sigma;      // covariance used at the final step; empty = identity
  bool has_variogram = false;
  VariogramModel variogram;      // fitted residual variogram (QGLS only)
  EmpiricalVariogram empirical;  // its empirical counterpart
  std::vector<std::string> warnings;
};

// Intercept + coefficients by column-pivoted QR on [1 | X]; never forms the
// normal equations. Throws NumericError on rank deficiency, naming duplicate
// columns when that is the cause.
struct LinearFit {
  double mu = 0.0;
  Eigen::VectorXd phi;
  Eigen::VectorXd residuals;  // raw
  double rss = 0.0;
  double gls_rss = 0.0;
  double r2 = 0.0;
  Eigen::MatrixXd cov;  // (p+1) x (p+1); OLS: sigma2_hat * (Xt X)^-1, GLS: (Xt Sigma^-1 X)^-1
};

LinearFit ols_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

// GLS through whitening: Sigma = L L^T, then OLS on L^-1 [1|X], L^-1 y.
LinearFit gls_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                    const Eigen::MatrixXd& sigma);

FittedModel ols_fit(const Dataset& ds, ModelId id);

// GLS with a fixed covariance (empty matrix = identity).
FittedModel gls_fit(const Dataset& ds, ModelId id, const Eigen::MatrixXd& sigma);

// OLS, then qgls_iterations rounds of: empirical variogram of residuals,
// parametric fit, GLS with the implied covariance. site_distances, when
// given, must be the n x n great-circle matrix of ds (callers that refit on
// subsets pass the corresponding submatrix). Warns (not errors) when the
// fitted range falls below the smallest nonzero inter-site distance.
FittedModel qgls_fit(const Dataset& ds, ModelId id, VariogramFamily family,
                     int qgls_iterations = 1, int variogram_bins = kDefaultVariogramBins,
                     const Eigen::MatrixXd* site_distances = nullptr);

// mu + a.theta + b.pi + theta^T C pi over the model's blocks.
double predict(const FittedModel& m, const Eigen::VectorXd& theta,
               const Eigen::VectorXd& pi);
double predict(const FittedModel& m, const CoefficientVector& theta,
               const CoefficientVector& pi);  // checks basis match

struct CoefficientFunctions {
  std::vector<double> grid;
  Eigen::VectorXd A, B;  // on grid
  Eigen::MatrixXd C;     // grid x grid
};

inline constexpr int kDefaultGridPoints = 151;

CoefficientFunctions coefficient_functions(const FittedModel& m,
                                           int grid_points = kDefaultGridPoints);

}  // namespace sfreg

#endif  // SFREG_REGRESSION_HPP
