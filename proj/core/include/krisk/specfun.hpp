#pragma once

// Special functions needed by the Student, beta and entropy computations.

namespace krisk::specfun {

double log_beta(double a, double b);

/// Regularised incomplete beta I_x(a, b) by Lentz continued fraction.
double incomplete_beta(double a, double b, double x);

/// x such that I_x(a, b) = p.
double inverse_incomplete_beta(double a, double b, double p);

double digamma(double x);

/// P(T > t) for a standard Student variable with `dof` degrees of freedom.
double student_upper_tail(double t, double dof);
double student_cdf(double t, double dof);
double student_quantile(double p, double dof);
double student_log_pdf(double t, double dof);

double normal_cdf(double z);
double normal_upper_tail(double z);
double normal_quantile(double p);

/// Differential entropy of the standard Student law (scale one).
double student_entropy(double dof);

}  // namespace krisk::specfun
