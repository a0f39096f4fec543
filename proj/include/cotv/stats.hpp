#pragma once

// Sample-size formulas and exact binomial confidence intervals.

#include <cstddef>
#include <cstdint>

namespace cotv {

struct Interval {
  double low = 0.0;
  double high = 1.0;
  bool contains(double x) const noexcept { return low <= x && x <= high; }
};

/// Clopper–Pearson interval for k successes in n trials at the given confidence.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95);

/// sqrt(p(1−p)/n).
double binomial_se(double p, std::uint64_t trials);

/// ⌈(ln|H| + ln(1/δ))/ε⌉; shared by SVPAC (finite H) and TVPAC (finite H).
std::uint64_t finite_class_sample_size(std::uint64_t class_size, double epsilon, double delta);

/// ⌈(|H| ln 2 + ln(1/δ))/(ηε)⌉, the Algorithm 1 bound.
std::uint64_t gamma_tvpac_sample_size(std::uint64_t class_size, double eta, double epsilon, double delta);

/// ⌈(2/ε²)(ln|H| + ln(2/δ))⌉, the Hoeffding-plus-union bound for agnostic ERM.
std::uint64_t agnostic_sample_size(std::uint64_t class_size, double epsilon, double delta);

}  // namespace cotv
