#pragma once

// Seeded instance generators for the experiments: random finite classes with a
// hidden truth, gold reasoners with perturbed rivals, structured classes, online
// streams, and random (verifier, tree) pairs for the oracle-equivalence check.

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cotv/gold.hpp"
#include "cotv/harness.hpp"
#include "cotv/learners.hpp"
#include "cotv/verifier_classes.hpp"

namespace cotv {

/// Truth is a random table (each prefix YES w.p. truth_yes_rate); every other member
/// flips each bit of the truth w.p. r, r log-uniform on [flip_min, flip_max].
/// Members are kept only if their prefix verdicts on the support are distinct.
struct RandomTableParams {
  TraceSpace space{4, 6, ProblemKind::Enumerated, 4};
  std::size_t class_size = 256;
  double truth_yes_rate = 0.85;
  double flip_min = 1e-3;
  double flip_max = 0.5;
  std::size_t support_size = 200;
  bool random_weights = false;
};

SimpleInstance make_random_table_instance(const RandomTableParams& params, std::uint64_t seed);

/// Relabels `fraction` of the support: first toward the rival that disagrees most
/// with the truth, then (if it runs out) by flipping one label up to the stopping index.
SimpleInstance corrupt_labels(const SimpleInstance& instance, double fraction, std::uint64_t seed);

struct GoldTreeParams {
  TraceSpace space{4, 5, ProblemKind::Enumerated, 50};
  std::size_t k_min = 1;
  std::size_t k_max = 3;
  bool random_weights = false;
};

/// |g(x)| uniform on [k_min, k_max], traces uniform over Σ^T without replacement.
std::shared_ptr<GoldReasoner> make_random_gold(const GoldTreeParams& params, Rng& rng);

enum class Perturbation { ExtraPath, DropLeaf, Thin, WipeSubtree, Noise };

Perturbation perturbation_from_string(const std::string& name);
std::string to_string(Perturbation p);

/// Truth is the tree-characteristic table of g (so g = C_{h*}); each rival perturbs
/// each problem w.p. q (q log-uniform on [q_min, q_max]), at least one problem.
struct GoldClassParams {
  GoldTreeParams gold;
  std::size_t class_size = 64;
  double q_min = 0.005;
  double q_max = 0.5;
  std::vector<std::pair<Perturbation, double>> kinds{{Perturbation::ExtraPath, 1.0},
                                                     {Perturbation::DropLeaf, 1.0}};
  bool random_problem_weights = false;
};

TrustableInstance make_gold_perturbation_instance(const GoldClassParams& params, std::uint64_t seed);

/// Table verifier that is YES exactly on prefixes of accepted[p] for problem p.
std::shared_ptr<TableVerifier> prefix_closed_table(const TraceSpace& space,
                                                   const std::vector<std::vector<Trace>>& accepted,
                                                   std::string name);

/// AxiomSubset class over |Σ| = n with truth σ*; g(x) = σ*^T for each of `problems` problems.
TrustableInstance make_axiom_subset_instance(std::size_t n, std::size_t horizon, std::size_t problems,
                                             std::uint64_t sigma);

// ---------------------------------------------------------------------------
// Online streams

struct OnlineStream {
  std::string name;
  SubspaceVariant variant = SubspaceVariant::Orthogonal;
  std::size_t dim = 2;
  Eigen::MatrixXd hstar;
  std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> steps;
};

struct OnlineOutcome {
  std::size_t mistakes = 0;
  std::size_t bound = 0;
  std::size_t false_positives = 0;
  bool within_bound() const noexcept { return mistakes <= bound; }
};

/// Orthogonal streams draw x₀ from span(h*)^⊥; general streams use a single hidden vector.
OnlineStream random_online_stream(SubspaceVariant variant, std::size_t dim, std::size_t length, Rng& rng);

/// Ten hand-built streams aimed at the update rules' worst cases.
std::vector<OnlineStream> adversarial_online_streams();

/// Bound: dim span(h*) for the orthogonal variant, d+1 for the general one.
OnlineOutcome run_online_stream(const OnlineStream& stream);

// ---------------------------------------------------------------------------
// Oracle equivalence

struct StatusPair {
  std::shared_ptr<GoldReasoner> gold;
  std::shared_ptr<TableVerifier> verifier;
};

/// A single-problem tree with |Σ|^T ≤ max_traces and a verifier drawn from a mix of
/// exact, lightly perturbed and arbitrary tables.
StatusPair random_status_pair(Rng& rng, std::uint64_t max_traces = 4096);

}  // namespace cotv
