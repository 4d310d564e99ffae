#pragma once

namespace zc {

/// Regularized lower incomplete gamma P(a, x); series for x < a + 1,
/// continued fraction otherwise. Absolute error below 1e-12 over the
/// statistics range used here.
double regularized_gamma_p(double a, double x);

/// Upper tail Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Chi-square survival function with dof degrees of freedom.
double chi_squared_survival(double x, double dof);

}  // namespace zc
