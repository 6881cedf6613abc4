#pragma once

namespace apt::stats {

// Regularized lower/upper incomplete gamma P(a, x), Q(a, x); a > 0, x >= 0.
// Series below x < a + 1, Lentz continued fraction above.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b); a, b > 0, 0 <= x <= 1.
double regularized_beta(double a, double b, double x);

// Upper tails used for p-values.
double chi_square_sf(double stat, double df);
double f_sf(double f, double df1, double df2);

}  // namespace apt::stats
