#pragma once

namespace hfrisk {

/// Regularized incomplete beta function I_x(a, b) for a, b > 0, x in [0, 1],
/// evaluated by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` > 0
/// degrees of freedom.
double student_t_two_sided_p(double t, double df);

/// Student's t cumulative distribution function.
double student_t_cdf(double t, double df);

}  // namespace hfrisk
