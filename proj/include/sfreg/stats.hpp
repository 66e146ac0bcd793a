#ifndef SFREG_STATS_HPP
#define SFREG_STATS_HPP

namespace sfreg {

double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b), absolute accuracy better than 1e-10
// for a, b > 0 and x in [0, 1].
double regularized_incomplete_beta(double x, double a, double b);

// Upper tail P(F > f) for the F distribution with df1, df2 degrees of freedom.
double f_upper_tail(double f, double df1, double df2);

}  // namespace sfreg

#endif  // SFREG_STATS_HPP
