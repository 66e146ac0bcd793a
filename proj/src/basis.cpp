#include "sfreg/basis.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace sfreg {

namespace {
constexpr int kSplineDegree = 3;
}

BasisFamily parse_basis_family(const std::string& name) {
  if (name == "fourier") return BasisFamily::fourier;
  if (name == "bspline") return BasisFamily::bspline;
  throw ConfigError("unknown basis family '" + name + "' (expected fourier or bspline)");
}

std::string to_string(BasisFamily family) {
  return family == BasisFamily::fourier ? "fourier" : "bspline";
}

int BasisSpec::K() const {
  return family == BasisFamily::fourier ? 2 * order + 1 : order + kSplineDegree + 1;
}

void BasisSpec::validate() const {
  if (order < 1) throw ConfigError("basis order must be >= 1");
  domain.validate();
}

Basis::Basis(const BasisSpec& spec) : spec_(spec) {
  spec_.validate();
  if (spec_.family == BasisFamily::fourier) return;

  // Clamped knot vector: boundary knots repeated degree+1 times, `order`
  // uniform interior knots.
  const int m = spec_.order;
  const double t0 = spec_.domain.t_min;
  const double T = spec_.domain.length();
  knots_.reserve(m + 2 * (kSplineDegree + 1));
  for (int i = 0; i <= kSplineDegree; ++i) knots_.push_back(t0);
  for (int i = 1; i <= m; ++i) knots_.push_back(t0 + T * i / (m + 1));
  for (int i = 0; i <= kSplineDegree; ++i) knots_.push_back(spec_.domain.t_max);

  // Orthonormalize: raw Gram G = L L^T under the reference quadrature, then
  // e = L^{-1} b has Gram exactly I under that quadrature.
  const int K = spec_.K();
  const auto grid = uniform_grid(spec_.domain, kGramQuadratureNodes);
  const Eigen::VectorXd w = trapezoid_weights(spec_.domain, kGramQuadratureNodes);
  Eigen::MatrixXd raw(kGramQuadratureNodes, K);
  std::vector<double> row(K);
  for (int j = 0; j < kGramQuadratureNodes; ++j) {
    raw_bspline_row(grid[j], row.data());
    for (int k = 0; k < K; ++k) raw(j, k) = row[k];
  }
  const Eigen::MatrixXd gram = raw.transpose() * w.asDiagonal() * raw;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericError("B-spline Gram matrix is not positive definite");
  transform_ = Eigen::MatrixXd(llt.matrixL())
                   .triangularView<Eigen::Lower>()
                   .solve(Eigen::MatrixXd::Identity(K, K));
}

// FindSpan / BasisFuns of the de Boor recursion; exact at both endpoints of a
// clamped knot vector.
void Basis::raw_bspline_row(double t, double* out) const {
  const int K = spec_.K();
  const int p = kSplineDegree;
  const int n = K - 1;
  const std::vector<double>& U = knots_;

  int span;
  if (t >= U[n + 1]) {
    span = n;
  } else if (t <= U[p]) {
    span = p;
  } else {
    int lo = p, hi = n + 1, mid = (lo + hi) / 2;
    while (t < U[mid] || t >= U[mid + 1]) {
      if (t < U[mid])
        hi = mid;
      else
        lo = mid;
      mid = (lo + hi) / 2;
    }
    span = mid;
  }

  double N[kSplineDegree + 1];
  double left[kSplineDegree + 1];
  double right[kSplineDegree + 1];
  N[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - U[span + 1 - j];
    right[j] = U[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = N[r] / (right[r + 1] + left[j - r]);
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }

  for (int k = 0; k < K; ++k) out[k] = 0.0;
  for (int r = 0; r <= p; ++r) out[span - p + r] = N[r];
}

double Basis::eval(int k, double t) const {
  const int K = spec_.K();
  if (k < 1 || k > K) {
    std::ostringstream msg;
    msg << "basis index " << k << " out of range [1," << K << "]";
    throw NumericError(msg.str());
  }
  if (!spec_.domain.contains(t))
    throw NumericError("evaluation time outside basis domain");

  if (spec_.family == BasisFamily::fourier) {
    const double T = spec_.domain.length();
    if (k == 1) return 1.0 / std::sqrt(T);
    const int j = k / 2;
    const double arg = 2.0 * M_PI * j * (t - spec_.domain.t_min) / T;
    const double amp = std::sqrt(2.0 / T);
    return k % 2 == 0 ? amp * std::sin(arg) : amp * std::cos(arg);
  }

  std::vector<double> raw(K);
  raw_bspline_row(t, raw.data());
  double v = 0.0;
  for (int j = 0; j < K; ++j) v += transform_(k - 1, j) * raw[j];
  return v;
}

Eigen::MatrixXd Basis::eval_matrix(const std::vector<double>& times) const {
  const int K = spec_.K();
  Eigen::MatrixXd E(static_cast<Eigen::Index>(times.size()), K);

  if (spec_.family == BasisFamily::fourier) {
    const double T = spec_.domain.length();
    const double amp = std::sqrt(2.0 / T);
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!spec_.domain.contains(times[i]))
        throw NumericError("evaluation time outside basis domain");
      E(i, 0) = 1.0 / std::sqrt(T);
      for (int j = 1; 2 * j < K + 1; ++j) {
        const double arg = 2.0 * M_PI * j * (times[i] - spec_.domain.t_min) / T;
        if (2 * j - 1 < K) E(i, 2 * j - 1) = amp * std::sin(arg);
        if (2 * j < K) E(i, 2 * j) = amp * std::cos(arg);
      }
    }
    return E;
  }

  std::vector<double> raw(K);
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!spec_.domain.contains(times[i]))
      throw NumericError("evaluation time outside basis domain");
    raw_bspline_row(times[i], raw.data());
    for (int k = 0; k < K; ++k) {
      double v = 0.0;
      for (int j = 0; j < K; ++j) v += transform_(k, j) * raw[j];
      E(i, k) = v;
    }
  }
  return E;
}

Eigen::MatrixXd Basis::gram(int quad_nodes) const {
  const auto grid = uniform_grid(spec_.domain, quad_nodes);
  const Eigen::VectorXd w = trapezoid_weights(spec_.domain, quad_nodes);
  const Eigen::MatrixXd E = eval_matrix(grid);
  return E.transpose() * w.asDiagonal() * E;
}

std::shared_ptr<const Basis> make_basis(const BasisSpec& spec) {
  return std::make_shared<const Basis>(spec);
}

std::vector<double> uniform_grid(const TimeDomain& domain, int nodes) {
  if (nodes < 2) throw NumericError("quadrature grid needs at least 2 nodes");
  std::vector<double> grid(nodes);
  const double h = domain.length() / (nodes - 1);
  for (int i = 0; i < nodes; ++i) grid[i] = domain.t_min + h * i;
  grid.back() = domain.t_max;
  return grid;
}

Eigen::VectorXd trapezoid_weights(const TimeDomain& domain, int nodes) {
  if (nodes < 2) throw NumericError("quadrature grid needs at least 2 nodes");
  const double h = domain.length() / (nodes - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(nodes, h);
  w(0) = 0.5 * h;
  w(nodes - 1) = 0.5 * h;
  return w;
}

Eigen::VectorXd project_curve(const SampledCurve& curve, const Basis& basis) {
  curve.validate(basis.domain());
  const int K = basis.K();
  if (static_cast<int>(curve.size()) < K) {
    std::ostringstream msg;
    msg << "curve '" << curve.site_id << "' has " << curve.size()
        << " samples; projection onto " << K << " basis functions needs at least " << K;
    throw NumericError(msg.str());
  }
  const Eigen::MatrixXd E = basis.eval_matrix(curve.times);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(E);
  if (qr.rank() < K)
    throw NumericError("curve '" + curve.site_id +
                       "': basis evaluation matrix is rank deficient");
  return qr.solve(Eigen::Map<const Eigen::VectorXd>(curve.values.data(),
                                                    static_cast<Eigen::Index>(curve.values.size())));
}

Eigen::VectorXd reconstruct_function(const Basis& basis, const Eigen::VectorXd& coeffs,
                                     const std::vector<double>& grid) {
  if (coeffs.size() != basis.K())
    throw NumericError("coefficient length does not match basis size");
  return basis.eval_matrix(grid) * coeffs;
}

Eigen::MatrixXd reconstruct_kernel(const Basis& basis, const Eigen::MatrixXd& coeffs,
                                   const std::vector<double>& grid_t,
                                   const std::vector<double>& grid_u) {
  if (coeffs.rows() != basis.K() || coeffs.cols() != basis.K())
    throw NumericError("kernel coefficient matrix does not match basis size");
  const Eigen::MatrixXd Et = basis.eval_matrix(grid_t);
  const Eigen::MatrixXd Eu = basis.eval_matrix(grid_u);
  return Et * coeffs * Eu.transpose();
}

}  // namespace sfreg
