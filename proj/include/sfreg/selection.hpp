#ifndef SFREG_SELECTION_HPP
#define SFREG_SELECTION_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "sfreg/regression.hpp"

namespace sfreg {

// Full-domain curves plus the scalar response, before basis projection; the
// cross-validation layer projects them once per candidate basis.
struct CurveDataset {
  std::vector<SiteLocation> sites;
  std::vector<double> y;
  std::vector<SampledCurve> theta_curves;
  std::vector<SampledCurve> pi_curves;

  int n() const { return static_cast<int>(sites.size()); }
  void validate(const TimeDomain& domain) const;
};

Dataset project_dataset(const CurveDataset& cd, std::shared_ptr<const Basis> basis);

// How each leave-one-out fold treats the residual covariance.
//   identity:    plain OLS folds
//   fold_refit:  re-estimate variogram and covariance inside every fold
//   full_sample: estimate the covariance once on all data, reuse submatrices
enum class CvCovarianceMode { identity, fold_refit, full_sample };

CvCovarianceMode parse_cv_mode(const std::string& name);
std::string to_string(CvCovarianceMode mode);

// Root mean squared out-of-fold prediction error. Fold failures abort with
// the offending site id. per_site_errors, when given, receives y_i - yhat_i.
double loocv_score(const Dataset& ds, ModelId id, VariogramFamily family,
                   CvCovarianceMode mode, int qgls_iterations = 1,
                   int variogram_bins = kDefaultVariogramBins,
                   const Eigen::MatrixXd* site_distances = nullptr,
                   std::vector<double>* per_site_errors = nullptr);

struct CvCandidate {
  BasisSpec basis;
  VariogramFamily vfamily = VariogramFamily::exponential;
};

struct CvConfig {
  std::vector<BasisSpec> bases;
  std::vector<VariogramFamily> vfamilies;
  ModelId model_id = ModelId::M1_full;
  CvCovarianceMode mode = CvCovarianceMode::fold_refit;
  int qgls_iterations = 1;
  int variogram_bins = kDefaultVariogramBins;

  // cross product, basis-major, preserving list order
  std::vector<CvCandidate> candidates() const;
};

struct CvCandidateResult {
  CvCandidate candidate;
  double rmse_pred = 0.0;
  std::vector<double> per_site_errors;
  bool failed = false;
  std::string error;
};

struct CvResult {
  std::vector<CvCandidateResult> candidates;
  int winner = -1;  // index into candidates
};

// Scores every candidate by loocv_score; winner minimizes rmse_pred with ties
// broken toward smaller K, then earlier candidate position. Candidates that
// fail are recorded and skipped; throws NumericError if all fail.
CvResult select_model(const CurveDataset& cd, const CvConfig& cfg);

struct AnovaRow {
  std::string comparison;  // e.g. "M3 vs M2"
  int df1 = 0;
  long df2 = 0;
  double rss_reduced = 0.0;
  double rss_full = 0.0;
  double F = 0.0;
  double p_value = 1.0;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;          // M3 vs M2, M4 vs M2, M2 vs M1
  double rss_m1 = 0, rss_m2 = 0, rss_m3 = 0, rss_m4 = 0;
};

// Fits M1..M4 on data whitened by one shared covariance so the residual sums
// of squares are comparable; F = ((rss_r - rss_f)/df_extra)/(rss_f/(n-p_f-1)),
// p from the F upper tail, floored at 1e-300 (0 exactly when rss_f = 0).
AnovaTable nested_anova(const Dataset& ds, const Eigen::MatrixXd& sigma);
// Same, with the covariance estimated once from the M1 OLS residuals.
AnovaTable nested_anova(const Dataset& ds, VariogramFamily family,
                        int variogram_bins = kDefaultVariogramBins);

struct ClassProfiles {
  std::vector<std::string> labels;  // per class, ascending
  std::vector<int> counts;
  std::vector<double> grid;
  Eigen::MatrixXd theta_means;  // class x grid, NaN rows for empty classes
  Eigen::MatrixXd pi_means;
  Eigen::VectorXd theta_global;  // pointwise mean over all sites
  Eigen::VectorXd pi_global;
  std::vector<int> assignments;  // class of each dataset row
};

// Assigns each site to a class by its predicted response using half-open
// intervals (left-open, right-closed) between the ascending edges, then
// reconstructs the per-class mean curves on the default grid.
ClassProfiles response_class_profiles(const Dataset& ds, const FittedModel& m,
                                      const std::vector<double>& class_edges,
                                      int grid_points = kDefaultGridPoints);

}  // namespace sfreg

#endif  // SFREG_SELECTION_HPP
