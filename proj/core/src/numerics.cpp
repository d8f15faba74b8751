#include "soebm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "soebm/error.hpp"

namespace soebm {

namespace {

void require_positive_sigma(double sigma, const char* where) {
  if (!(sigma > 0.0)) {
    throw DomainError(std::string(where) + ": sigma must be positive");
  }
}

}  // namespace

double std_normal_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double std_normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

double gauss_pdf(double z, double mu, double sigma) {
  require_positive_sigma(sigma, "gauss_pdf");
  return std_normal_pdf((z - mu) / sigma) / sigma;
}

double gauss_cdf(double z, double mu, double sigma) {
  require_positive_sigma(sigma, "gauss_cdf");
  return std_normal_cdf((z - mu) / sigma);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw DomainError("log_sum_exp: empty input");
  double max_value = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (std::isnan(v)) throw DomainError("log_sum_exp: NaN input");
    max_value = std::max(max_value, v);
  }
  if (max_value == -std::numeric_limits<double>::infinity()) return max_value;
  if (max_value == std::numeric_limits<double>::infinity()) return max_value;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

std::vector<double> normalize_log_weights(std::span<const double> logw) {
  const double lse = log_sum_exp(logw);
  if (!std::isfinite(lse)) {
    throw DomainError("normalize_log_weights: log-normalizer is not finite");
  }
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) w[i] = std::exp(logw[i] - lse);
  return w;
}

double effective_sample_size(std::span<const double> weights) {
  double sum_sq = 0.0;
  for (double w : weights) sum_sq += w * w;
  return 1.0 / sum_sq;
}

}  // namespace soebm
