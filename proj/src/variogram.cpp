#include "sfreg/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

#include "sfreg/optim.hpp"

namespace sfreg {

VariogramFamily parse_variogram_family(const std::string& name) {
  if (name == "exponential") return VariogramFamily::exponential;
  if (name == "gaussian") return VariogramFamily::gaussian;
  if (name == "spherical") return VariogramFamily::spherical;
  throw ConfigError("unknown variogram family '" + name +
                    "' (expected exponential, gaussian or spherical)");
}

std::string to_string(VariogramFamily family) {
  switch (family) {
    case VariogramFamily::exponential: return "exponential";
    case VariogramFamily::gaussian: return "gaussian";
    default: return "spherical";
  }
}

int EmpiricalVariogram::populated_bins() const {
  int n = 0;
  for (long long c : pair_counts)
    if (c > 0) ++n;
  return n;
}

double variogram_value(const VariogramModel& model, double h) {
  if (h < 0.0) throw NumericError("variogram evaluated at negative lag");
  if (h == 0.0) return 0.0;
  const double r = h / model.range;
  switch (model.family) {
    case VariogramFamily::exponential:
      return model.nugget + model.partial_sill * (1.0 - std::exp(-r));
    case VariogramFamily::gaussian:
      return model.nugget + model.partial_sill * (1.0 - std::exp(-r * r));
    default:  // spherical
      if (r >= 1.0) return model.nugget + model.partial_sill;
      return model.nugget + model.partial_sill * (1.5 * r - 0.5 * r * r * r);
  }
}

EmpiricalVariogram empirical_variogram(const Eigen::VectorXd& values,
                                       const Eigen::MatrixXd& distances, int n_bins,
                                       double max_dist) {
  const Eigen::Index n = values.size();
  if (n < 2) throw NumericError("empirical variogram needs at least 2 values");
  if (distances.rows() != n || distances.cols() != n)
    throw NumericError("distance matrix does not match value count");
  if (n_bins < 1) throw NumericError("empirical variogram needs at least 1 bin");
  if (!(max_dist > 0.0)) throw NumericError("empirical variogram needs max_dist > 0");

  EmpiricalVariogram ev;
  ev.max_dist = max_dist;
  const double width = max_dist / n_bins;
  ev.bin_centers.resize(n_bins);
  for (int b = 0; b < n_bins; ++b) ev.bin_centers[b] = (b + 0.5) * width;
  ev.pair_counts.assign(n_bins, 0);
  std::vector<double> sums(n_bins, 0.0);

  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = distances(i, j);
      if (d > max_dist) continue;
      int b = static_cast<int>(d / width);
      if (b >= n_bins) b = n_bins - 1;
      const double diff = values(i) - values(j);
      sums[b] += diff * diff;
      ++ev.pair_counts[b];
    }

  ev.gamma_hat.resize(n_bins);
  long long total = 0;
  for (int b = 0; b < n_bins; ++b) {
    total += ev.pair_counts[b];
    ev.gamma_hat[b] = ev.pair_counts[b] > 0
                          ? sums[b] / (2.0 * ev.pair_counts[b])
                          : std::numeric_limits<double>::quiet_NaN();
  }
  if (total == 0)
    throw NumericError("empirical variogram is empty: all pairs beyond max_dist");
  return ev;
}

EmpiricalVariogram empirical_variogram(const Eigen::VectorXd& values,
                                       std::span<const SiteLocation> sites, int n_bins,
                                       double max_dist) {
  return empirical_variogram(values, distance_matrix(sites), n_bins, max_dist);
}

double default_max_lag(const Eigen::MatrixXd& distances) {
  return 0.5 * distances.maxCoeff();
}

namespace {

struct FitProblem {
  std::vector<double> h, g;
  std::vector<double> w;  // pair counts
  VariogramFamily family;
  double gscale;
  double lo[3], hi[3];

  Eigen::VectorXd clamp(const Eigen::VectorXd& x) const {
    Eigen::VectorXd c(3);
    for (int i = 0; i < 3; ++i) c(i) = std::clamp(x(i), lo[i], hi[i]);
    return c;
  }

  double operator()(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd c = clamp(x);
    const VariogramModel m{family, c(0), c(1), c(2)};
    double obj = 0.0;
    for (std::size_t b = 0; b < h.size(); ++b) {
      const double gm = variogram_value(m, h[b]);
      const double denom = std::max(gm, 1e-10 * gscale);
      const double r = (g[b] - gm) / denom;
      obj += w[b] * r * r;
    }
    // keep the search informed about the box without distorting it inside
    double pen = 0.0;
    pen += std::pow((x(0) - c(0)) / gscale, 2);
    pen += std::pow((x(1) - c(1)) / gscale, 2);
    pen += std::pow((x(2) - c(2)) / hi[2], 2);
    return obj + 1e8 * pen;
  }
};

}  // namespace

VariogramModel fit_variogram(const EmpiricalVariogram& ev, VariogramFamily family) {
  FitProblem prob;
  prob.family = family;
  for (std::size_t b = 0; b < ev.bin_centers.size(); ++b) {
    if (ev.pair_counts[b] <= 0 || !std::isfinite(ev.gamma_hat[b])) continue;
    prob.h.push_back(ev.bin_centers[b]);
    prob.g.push_back(ev.gamma_hat[b]);
    prob.w.push_back(static_cast<double>(ev.pair_counts[b]));
  }
  if (prob.h.size() < 3)
    throw NumericError("variogram fit needs at least 3 populated bins");

  const double gmax = *std::max_element(prob.g.begin(), prob.g.end());
  if (!(gmax > 0.0))
    throw NumericError("empirical variogram is identically zero: no structure to fit");
  prob.gscale = gmax;
  const double gbar =
      std::accumulate(prob.g.begin(), prob.g.end(), 0.0) / prob.g.size();
  const double gfirst = prob.g.front();
  const double hmax = prob.h.back();
  const double hmed = prob.h[prob.h.size() / 2];

  prob.lo[0] = 0.0;
  prob.hi[0] = std::numeric_limits<double>::infinity();
  prob.lo[1] = 1e-12 * gmax;
  prob.hi[1] = std::numeric_limits<double>::infinity();
  prob.lo[2] = 1e-6 * ev.max_dist;
  prob.hi[2] = 3.0 * ev.max_dist;

  const double starts[5][3] = {
      {0.0, std::max(gbar, prob.lo[1]), hmax / 3.0},
      {0.5 * gfirst, std::max(gmax - 0.5 * gfirst, prob.lo[1]), hmax / 2.0},
      {0.0, gmax, hmax},
      {0.1 * gbar, std::max(0.9 * gbar, prob.lo[1]), hmed},
      {0.0, std::max(gbar, prob.lo[1]), 2.0 * hmax},
  };

  double best_obj = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  for (const auto& s : starts) {
    Eigen::VectorXd x0(3);
    x0 << s[0], s[1], s[2];
    x0 = prob.clamp(x0);
    Eigen::VectorXd step(3);
    step << std::max(0.1 * gbar, 1e-4 * gmax), 0.25 * std::max(gbar, 1e-4 * gmax),
        0.25 * std::max(x0(2), prob.lo[2]);
    NelderMeadResult r = nelder_mead(prob, x0, step);
    // restart with a fresh simplex to escape premature collapse
    Eigen::VectorXd step2 = 0.05 * step;
    r = nelder_mead(prob, prob.clamp(r.x), step2);
    if (std::isfinite(r.fx) && r.fx < best_obj) {
      best_obj = r.fx;
      best_x = prob.clamp(r.x);
    }
  }
  if (!std::isfinite(best_obj))
    throw NumericError("variogram fit failed to improve from every starting point");

  return VariogramModel{family, best_x(0), std::max(best_x(1), prob.lo[1]), best_x(2)};
}

Eigen::MatrixXd build_covariance(const VariogramModel& model,
                                 const Eigen::MatrixXd& distances) {
  const Eigen::Index n = distances.rows();
  if (n < 1) throw NumericError("covariance needs at least one site");
  const double sill = model.sill();
  Eigen::MatrixXd sigma(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sigma(i, i) = sill;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      sigma(i, j) = sill - variogram_value(model, distances(i, j));
      sigma(j, i) = sigma(i, j);
    }
  }
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() == Eigen::Success) return sigma;
    if (attempt < 3) sigma.diagonal().array() += 1e-10 * sill;
  }
  throw NumericError(
      "residual covariance is not positive definite after jitter "
      "(duplicate sites with zero nugget, or an invalid variogram model)");
}

Eigen::MatrixXd build_covariance(const VariogramModel& model,
                                 std::span<const SiteLocation> sites) {
  return build_covariance(model, distance_matrix(sites));
}

}  // namespace sfreg
