#ifndef SFREG_BASIS_HPP
#define SFREG_BASIS_HPP

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sfreg/types.hpp"

namespace sfreg {

enum class BasisFamily { fourier, bspline };

BasisFamily parse_basis_family(const std::string& name);  // ConfigError on unknown
std::string to_string(BasisFamily family);

// Quadrature used for all Gram computations and for orthonormalizing splines.
inline constexpr int kGramQuadratureNodes = 10000;

struct BasisSpec {
  BasisFamily family = BasisFamily::fourier;
  int order = 5;  // fourier: harmonic pairs; bspline: interior knots
  TimeDomain domain;

  // fourier: K = 2*order + 1; bspline (cubic): K = order + 4
  int K() const;
  void validate() const;  // ConfigError on bad order, NumericError on bad domain

  bool operator==(const BasisSpec& o) const {
    return family == o.family && order == o.order && domain == o.domain;
  }
};

// Evaluable orthonormal basis. Fourier functions are orthonormal by formula;
// cubic B-splines on uniform interior knots are orthonormalized at
// construction by Cholesky of their Gram matrix under kGramQuadratureNodes
// trapezoid quadrature, so every family satisfies the same Gram identity.
class Basis {
public:
  explicit Basis(const BasisSpec& spec);

  const BasisSpec& spec() const { return spec_; }
  int K() const { return spec_.K(); }
  const TimeDomain& domain() const { return spec_.domain; }

  // e_k(t), 1-based index k in [1, K]
  double eval(int k, double t) const;

  // n x K matrix with entry (j, k-1) = e_k(times[j])
  Eigen::MatrixXd eval_matrix(const std::vector<double>& times) const;

  // K x K Gram matrix under trapezoid quadrature with the given node count
  Eigen::MatrixXd gram(int quad_nodes = kGramQuadratureNodes) const;

private:
  BasisSpec spec_;
  std::vector<double> knots_;   // bspline only
  Eigen::MatrixXd transform_;   // bspline only: orthonormal = transform_ * raw

  void raw_bspline_row(double t, double* out) const;
};

std::shared_ptr<const Basis> make_basis(const BasisSpec& spec);

// Coefficient expansion of one function of time.
struct CoefficientVector {
  std::shared_ptr<const Basis> basis;
  Eigen::VectorXd coeffs;
};

// Coefficient expansion of a kernel of two time arguments; entry (k, l)
// multiplies e_k(t) e_l(u), first index paired with the first function
// argument.
struct KernelCoefficients {
  std::shared_ptr<const Basis> basis;
  Eigen::MatrixXd coeffs;
};

// nodes equally spaced points covering [t_min, t_max] inclusive; nodes >= 2
std::vector<double> uniform_grid(const TimeDomain& domain, int nodes);

// Trapezoid-rule weights matching uniform_grid(domain, nodes)
Eigen::VectorXd trapezoid_weights(const TimeDomain& domain, int nodes);

// Discrete least-squares fit of the curve's values against basis evaluations
// at the curve's sample times. Requires at least K samples and a full-rank
// evaluation matrix; throws NumericError otherwise.
Eigen::VectorXd project_curve(const SampledCurve& curve, const Basis& basis);

// Pointwise sum over k of coeffs[k-1] * e_k(t) on the grid.
Eigen::VectorXd reconstruct_function(const Basis& basis, const Eigen::VectorXd& coeffs,
                                     const std::vector<double>& grid);

// Surface with entry (i, j) = sum over k,l of coeffs(k-1, l-1) e_k(grid_t[i]) e_l(grid_u[j]).
Eigen::MatrixXd reconstruct_kernel(const Basis& basis, const Eigen::MatrixXd& coeffs,
                                   const std::vector<double>& grid_t,
                                   const std::vector<double>& grid_u);

}  // namespace sfreg

#endif  // SFREG_BASIS_HPP
