#pragma once

namespace lexsig {

// Regularized incomplete beta I_x(a, b) by continued fraction (modified
// Lentz), using the symmetry relation to stay in the fast-converging region.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value of a t statistic with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);

}  // namespace lexsig
