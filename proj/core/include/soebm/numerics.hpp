#pragma once

#include <span>
#include <vector>

namespace soebm {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLog2Pi = 1.83787706640934548356;

/// Normal density N(z; mu, sigma^2). Throws DomainError for sigma <= 0.
double gauss_pdf(double z, double mu, double sigma);

/// Normal CDF via std::erfc, accurate in both tails.
double gauss_cdf(double z, double mu, double sigma);

/// Standard normal density and CDF, no argument checks.
double std_normal_pdf(double t);
double std_normal_cdf(double t);

/// log(sum(exp(v))) with max-shifting. Summation runs left to right.
/// Returns -inf when every entry is -inf; throws DomainError when empty.
double log_sum_exp(std::span<const double> values);

/// w_i = exp(logw_i - log_sum_exp(logw)).
std::vector<double> normalize_log_weights(std::span<const double> logw);

/// 1 / sum(w^2) for a normalized weight vector.
double effective_sample_size(std::span<const double> weights);

}  // namespace soebm
