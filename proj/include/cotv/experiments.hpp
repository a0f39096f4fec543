#pragma once

// Exact property experiments. Each reports its violations through the same
// ExperimentReport shape as the rate experiments; the check passes only at zero.

#include <array>
#include <cstdint>
#include <vector>

#include "cotv/harness.hpp"
#include "cotv/scenarios.hpp"

namespace cotv {

/// Fresh random gold-perturbation instance per trial, m cycling through 0..m_max;
/// every full trace of every problem is checked against g.
ExperimentReport run_algorithm1_soundness(const GoldClassParams& params, std::uint64_t m_max,
                                          const ExperimentConfig& config);

struct ClosureCurveResult {
  std::vector<CurvePoint> curve;
  std::vector<std::uint64_t> disagreements;
  /// Smallest grid m whose failure rate is ≤ δ, if any.
  std::optional<std::uint64_t> m_reached;
  ExperimentReport summary;
};

/// Algorithm 1 against closure_learn over an m grid on an intersection-closed class.
ClosureCurveResult run_closure_curve(const TrustableInstance& instance, const std::vector<std::uint64_t>& grid,
                                     const ExperimentConfig& config, double m_limit);

struct OnlineConfig {
  std::uint64_t random_streams = 10000;
  std::size_t dim_min = 2;
  std::size_t dim_max = 6;
  std::size_t length = 40;
  bool adversarial = true;
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;
};

/// Records one row per stream; failed means the mistake bound (or orthogonal soundness) broke.
ExperimentReport run_online_mistakes(const OnlineConfig& config);

/// For each random k = 1 instance: tvpac_learn on m problems, then on every problem
/// where the learned verifier is 1-complete and sound, the greedy generator must
/// reproduce the gold trace within T·|Σ| evaluations.
ExperimentReport run_generator_equivalence(const GoldClassParams& params, std::uint64_t reasoners,
                                           const ExperimentConfig& config);

/// The witness sample S with its distances 1, 2, 3 assigned in every order; records whether
/// some interval labels the sample (YES, NO, YES). Passes iff exactly the orders with
/// the NO point in the middle are unrealizable, including the original order.
ExperimentReport run_interval_witness();

/// Deviation-mode and exhaustive-mode per_problem_status must agree exactly.
ExperimentReport run_oracle_equivalence(std::uint64_t pairs, std::uint64_t max_traces,
                                        const ExperimentConfig& config);

}  // namespace cotv
