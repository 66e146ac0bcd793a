#include "sfreg/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace sfreg {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             int max_iter, double ftol) {
  const int n = static_cast<int>(x0.size());
  constexpr double alpha = 1.0;  // reflection
  constexpr double gamma = 2.0;  // expansion
  constexpr double rho = 0.5;    // contraction
  constexpr double sigma = 0.5;  // shrink

  NelderMeadResult res;
  std::vector<Eigen::VectorXd> v(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (int i = 1; i <= n; ++i) v[i](i - 1) += step(i - 1);
  for (int i = 0; i <= n; ++i) {
    fv[i] = f(v[i]);
    ++res.evaluations;
  }

  std::vector<int> order(n + 1);
  for (int iter = 0; iter < max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = order[0], worst = order[n], second_worst = order[n - 1];

    const double spread = std::fabs(fv[worst] - fv[best]);
    const double scale = std::fabs(fv[best]) + std::fabs(fv[worst]) + 1e-300;
    if (spread <= ftol * scale) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += v[i];
    centroid /= n;

    const Eigen::VectorXd xr = centroid + alpha * (centroid - v[worst]);
    const double fr = f(xr);
    ++res.evaluations;

    if (fr < fv[best]) {
      const Eigen::VectorXd xe = centroid + gamma * (xr - centroid);
      const double fe = f(xe);
      ++res.evaluations;
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second_worst]) {
      v[worst] = xr;
      fv[worst] = fr;
      continue;
    }

    // contraction toward the better of xr and the worst vertex
    const bool outside = fr < fv[worst];
    Eigen::VectorXd xc;
    if (outside)
      xc = centroid + rho * (xr - centroid);
    else
      xc = centroid - rho * (centroid - v[worst]);
    const double fc = f(xc);
    ++res.evaluations;
    if (fc < (outside ? fr : fv[worst])) {
      v[worst] = xc;
      fv[worst] = fc;
      continue;
    }

    // shrink toward the best vertex
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      v[i] = v[best] + sigma * (v[i] - v[best]);
      fv[i] = f(v[i]);
      ++res.evaluations;
    }
  }

  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (fv[i] < fv[best]) best = i;
  res.x = v[best];
  res.fx = fv[best];
  return res;
}

}  // namespace sfreg
