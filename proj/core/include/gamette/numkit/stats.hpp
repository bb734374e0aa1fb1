#pragma once

#include <span>
#include <vector>

#include "gamette/numkit/matrix.hpp"

namespace gamette::numkit {

double mean(std::span<const double> xs);
/// Population standard deviation (divides by n).
double population_stddev(std::span<const double> xs);

struct Standardization {
  std::vector<double> means;
  std::vector<double> stddevs;
  std::vector<bool> zero_variance;  // such columns are emitted as zeros
};

/// z-scores every column in place with population stddev.
Standardization standardize_columns(Matrix& data);

/// log(sum(exp(xs))) without overflow; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> xs);

/// Regularized lower and upper incomplete gamma functions P(a,x), Q(a,x),
/// by series for x < a+1 and Lentz continued fraction otherwise.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// Upper-tail probability of a chi-square variate with `df` degrees of freedom.
double chi_square_sf(double statistic, double df);

/// Two-sided standard normal tail probability, 2 * (1 - Phi(|z|)).
double normal_two_sided_p(double z);

}  // namespace gamette::numkit
