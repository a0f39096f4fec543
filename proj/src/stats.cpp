#include "cotv/stats.hpp"

#include <cmath>

#include <boost/math/distributions/beta.hpp>

#include "cotv/errors.hpp"

namespace cotv {

namespace {

void check_rate(double x, const char* name) {
  if (!(x > 0.0 && x < 1.0)) {
    throw InvalidInput(std::string(name) + " must lie in (0, 1)");
  }
}

std::uint64_t ceil_count(double x) {
  // Guard against 85.99999999 style round-off from the logarithms.
  return static_cast<std::uint64_t>(std::ceil(x - 1e-9));
}

}  // namespace

Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) return {0.0, 1.0};
  if (successes > trials) throw InvalidInput("successes exceed trials");
  check_rate(confidence, "confidence");
  const double alpha = 1.0 - confidence;
  const auto k = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  Interval out;
  out.low = successes == 0 ? 0.0
                           : boost::math::quantile(boost::math::beta_distribution<>(k, n - k + 1), alpha / 2);
  out.high = successes == trials
                 ? 1.0
                 : boost::math::quantile(boost::math::beta_distribution<>(k + 1, n - k), 1 - alpha / 2);
  return out;
}

double binomial_se(double p, std::uint64_t trials) {
  if (trials == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

std::uint64_t finite_class_sample_size(std::uint64_t class_size, double epsilon, double delta) {
  check_rate(epsilon, "epsilon");
  check_rate(delta, "delta");
  if (class_size == 0) throw InvalidInput("class size must be positive");
  return ceil_count((std::log(static_cast<double>(class_size)) + std::log(1.0 / delta)) / epsilon);
}

std::uint64_t gamma_tvpac_sample_size(std::uint64_t class_size, double eta, double epsilon, double delta) {
  check_rate(eta, "eta");
  check_rate(epsilon, "epsilon");
  check_rate(delta, "delta");
  return ceil_count((static_cast<double>(class_size) * std::log(2.0) + std::log(1.0 / delta)) /
                    (eta * epsilon));
}

std::uint64_t agnostic_sample_size(std::uint64_t class_size, double epsilon, double delta) {
  check_rate(epsilon, "epsilon");
  check_rate(delta, "delta");
  if (class_size == 0) throw InvalidInput("class size must be positive");
  return ceil_count(2.0 / (epsilon * epsilon) *
                    (std::log(static_cast<double>(class_size)) + std::log(2.0 / delta)));
}

}  // namespace cotv
