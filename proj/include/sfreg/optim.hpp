#ifndef SFREG_OPTIM_HPP
#define SFREG_OPTIM_HPP

#include <functional>

#include <Eigen/Core>

namespace sfreg {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double fx = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Derivative-free simplex minimizer. The initial simplex is x0 plus one vertex
// per coordinate displaced by step[i]. Deterministic for fixed inputs. Stops
// when the simplex function values agree within ftol (relative) or after
// max_iter reflect/expand/contract cycles.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                             int max_iter = 4000, double ftol = 1e-13);

}  // namespace sfreg

#endif  // SFREG_OPTIM_HPP
