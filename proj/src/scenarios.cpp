#include "cotv/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <unordered_set>

#include "cotv/enumeration.hpp"

namespace cotv {

namespace {

double log_uniform(Rng& rng, double lo, double hi) {
  if (lo <= 0.0 || hi < lo) throw InvalidInput("log-uniform range must satisfy 0 < lo <= hi");
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

std::vector<double> normalized_random_weights(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  double total = 0.0;
  for (double& x : w) {
    x = 0.05 + rng.uniform01();
    total += x;
  }
  for (double& x : w) x /= total;
  return w;
}

struct BitsHash {
  std::size_t operator()(const std::vector<std::uint64_t>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint64_t x : v) h = (h ^ x) * 1099511628211ULL;
    return static_cast<std::size_t>(h);
  }
};

/// Collects members with distinct signatures until `target` are kept, then places the
/// truth (always kept) at a random index.
class DistinctPool {
 public:
  using Signature = std::function<std::vector<std::uint64_t>(const Verifier&)>;

  DistinctPool(Signature signature, VerifierHandle truth)
      : signature_(std::move(signature)), truth_(std::move(truth)) {
    seen_.insert(signature_(*truth_));
  }

  bool offer(VerifierHandle h) {
    if (!seen_.insert(signature_(*h)).second) return false;
    rivals_.push_back(std::move(h));
    return true;
  }
  std::size_t size() const noexcept { return rivals_.size() + 1; }

  std::shared_ptr<FiniteClass> finish(const TraceSpace& space, Rng& rng, std::string name) {
    const std::size_t truth_index = static_cast<std::size_t>(rng.uniform_index(size()));
    std::vector<VerifierHandle> members = rivals_;
    members.insert(members.begin() + static_cast<std::ptrdiff_t>(truth_index), truth_);
    return std::make_shared<FiniteClass>(space, std::move(members), truth_index, std::move(name));
  }

 private:
  Signature signature_;
  VerifierHandle truth_;
  std::unordered_set<std::vector<std::uint64_t>, BitsHash> seen_;
  std::vector<VerifierHandle> rivals_;
};

/// Prefix verdicts on the support traces only: two members with equal signatures
/// have equal loss under every distribution on this support.
std::vector<std::uint64_t> support_signature(const Verifier& h, const std::vector<ProblemTrace>& support) {
  std::vector<std::uint64_t> bits;
  std::uint64_t k = 0;
  for (const auto& [x, t] : support) {
    for (std::size_t j = 1; j <= t.size(); ++j, ++k) {
      if ((k & 63) == 0) bits.push_back(0);
      if (h.accepts(x, Prefix(t).first(j))) bits.back() |= std::uint64_t{1} << (k & 63);
    }
  }
  return bits;
}

constexpr std::size_t kMaxAttemptsPerMember = 1000;

}  // namespace

SimpleInstance make_random_table_instance(const RandomTableParams& params, std::uint64_t seed) {
  const TraceSpace& space = params.space;
  if (params.class_size < 1) throw ConfigError("class.size", "must be positive");
  Rng rng(derive_seed(seed, 0x7461626c65));
  auto truth = TableVerifier::tabulate(
      space, [&](std::size_t, Prefix) { return rng.bernoulli(params.truth_yes_rate); }, "truth");
  const auto total = space.trace_count(space.horizon);
  if (!total || *total * space.problem_count < params.support_size) {
    throw ConfigError("distribution.support", "larger than the problem × trace space");
  }
  std::set<std::pair<std::size_t, std::uint64_t>> chosen;
  std::vector<ProblemTrace> support;
  while (support.size() < params.support_size) {
    const std::size_t p = static_cast<std::size_t>(rng.uniform_index(space.problem_count));
    const std::uint64_t rank = rng.uniform_index(*total);
    if (!chosen.insert({p, rank}).second) continue;
    support.push_back({ProblemId{static_cast<std::int64_t>(p)}, trace_from_rank(rank, space.horizon, space.alphabet_size)});
  }

  DistinctPool pool([&](const Verifier& h) { return support_signature(h, support); }, truth);
  std::size_t attempts = 0;
  std::size_t serial = 0;
  while (pool.size() < params.class_size) {
    if (++attempts > kMaxAttemptsPerMember * params.class_size) {
      throw ConfigError("class.size", "could not find enough behaviorally distinct members");
    }
    const double r = log_uniform(rng, params.flip_min, params.flip_max);
    std::vector<std::uint64_t> bits = truth->bits();
    const std::uint64_t nbits = space.problem_count * truth->stride();
    for (std::uint64_t k = 0; k < nbits; ++k) {
      if (rng.bernoulli(r)) bits[k >> 6] ^= std::uint64_t{1} << (k & 63);
    }
    pool.offer(std::make_shared<TableVerifier>(space, std::move(bits), "rival" + std::to_string(serial++)));
  }
  auto cls = pool.finish(space, rng, "random_table");

  std::vector<double> weights;
  if (params.random_weights) weights = normalized_random_weights(support.size(), rng);
  auto dist = TraceDistribution::labeled_by(*truth, std::move(support), std::move(weights));
  return {cls, cls->member(*cls->truth_index()), std::move(dist)};
}

SimpleInstance corrupt_labels(const SimpleInstance& instance, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("corruption", "must lie in [0, 1]");
  Rng rng(derive_seed(seed, 0x636f7272));
  const auto& support = instance.dist.support();
  const std::size_t count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(support.size())));
  if (count == 0) return instance;
  const FiniteClass& cls = *instance.cls;
  const std::uint64_t truth = *cls.truth_index();
  if (cls.members().size() < 2) throw ConfigError("corruption", "needs a class with a rival member");
  // The adversary pushes labels toward the rival that disagrees most with the truth.
  std::uint64_t rival = truth;
  std::vector<std::size_t> disagree;
  for (std::uint64_t id = 0; id < cls.members().size(); ++id) {
    if (id == truth) continue;
    std::vector<std::size_t> d;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (cls.run(id, support[i].problem, support[i].trace) != instance.dist.verdicts()[i]) d.push_back(i);
    }
    if (rival == truth || d.size() > disagree.size()) {
      rival = id;
      disagree = std::move(d);
    }
  }
  const Verifier& h = *cls.member(rival);
  std::vector<bool> is_disagree(support.size(), false);
  for (std::size_t i : disagree) is_disagree[i] = true;
  std::vector<std::size_t> agree;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (!is_disagree[i]) agree.push_back(i);
  }
  rng.shuffle(disagree);
  rng.shuffle(agree);

  auto labels = instance.dist.label_vectors();
  const std::size_t toward = std::min(count, disagree.size());
  for (std::size_t k = 0; k < toward; ++k) {
    const std::size_t i = disagree[k];
    labels[i] = verdict_vector(h, support[i].problem, support[i].trace);
  }
  // Not enough rival disagreements: flip one prefix label at or before the stopping index.
  for (std::size_t k = 0; toward + k < count; ++k) {
    const std::size_t i = agree[k];
    const std::size_t stop = instance.dist.verdicts()[i].stopping_index(support[i].trace.size());
    const std::size_t j = static_cast<std::size_t>(rng.uniform_index(stop));
    labels[i][j] = labels[i][j] == Verdict::Yes ? Verdict::No : Verdict::Yes;
  }
  auto dist = TraceDistribution::with_labels(instance.dist.space(), support, std::move(labels),
                                             instance.dist.weights());
  return {instance.cls, instance.truth, std::move(dist)};
}

std::shared_ptr<GoldReasoner> make_random_gold(const GoldTreeParams& params, Rng& rng) {
  const TraceSpace& space = params.space;
  const auto total = space.trace_count(space.horizon);
  if (params.k_min < 1 || params.k_max < params.k_min) throw ConfigError("gold.k", "need 1 <= k_min <= k_max");
  if (!total || *total < params.k_max) throw ConfigError("gold.k", "k_max exceeds |Σ|^T");
  auto gold = std::make_shared<GoldReasoner>(space, params.k_max);
  for (std::size_t p = 0; p < space.problem_count; ++p) {
    const std::size_t k = params.k_min + static_cast<std::size_t>(rng.uniform_index(params.k_max - params.k_min + 1));
    std::set<std::uint64_t> ranks;
    while (ranks.size() < k) ranks.insert(rng.uniform_index(*total));
    std::vector<Trace> traces;
    for (std::uint64_t r : ranks) traces.push_back(trace_from_rank(r, space.horizon, space.alphabet_size));
    std::vector<double> weights;
    if (params.random_weights) weights = normalized_random_weights(k, rng);
    gold->add(ProblemId{static_cast<std::int64_t>(p)}, std::move(traces), std::move(weights));
  }
  return gold;
}

Perturbation perturbation_from_string(const std::string& name) {
  if (name == "extra_path") return Perturbation::ExtraPath;
  if (name == "drop_leaf") return Perturbation::DropLeaf;
  if (name == "thin") return Perturbation::Thin;
  if (name == "wipe_subtree") return Perturbation::WipeSubtree;
  if (name == "noise") return Perturbation::Noise;
  throw ConfigError("class.perturbations", "unknown perturbation '" + name + "'");
}

std::string to_string(Perturbation p) {
  switch (p) {
    case Perturbation::ExtraPath: return "extra_path";
    case Perturbation::DropLeaf: return "drop_leaf";
    case Perturbation::Thin: return "thin";
    case Perturbation::WipeSubtree: return "wipe_subtree";
    case Perturbation::Noise: return "noise";
  }
  return "?";
}

std::shared_ptr<TableVerifier> prefix_closed_table(const TraceSpace& space,
                                                   const std::vector<std::vector<Trace>>& accepted,
                                                   std::string name) {
  const PrefixIndexer indexer(space.alphabet_size, space.horizon, kDefaultEnumerationBudget);
  const std::uint64_t stride = indexer.size();
  std::vector<std::uint64_t> bits((space.problem_count * stride + 63) / 64, 0);
  for (std::size_t p = 0; p < accepted.size(); ++p) {
    for (const Trace& t : accepted[p]) {
      for (std::size_t len = 1; len <= t.size(); ++len) {
        const std::uint64_t k = p * stride + indexer.index(Prefix(t.data(), len));
        bits[k >> 6] |= std::uint64_t{1} << (k & 63);
      }
    }
  }
  return std::make_shared<TableVerifier>(space, std::move(bits), std::move(name));
}

namespace {

Perturbation pick_kind(const std::vector<std::pair<Perturbation, double>>& kinds, Rng& rng) {
  double total = 0.0;
  for (const auto& [k, w] : kinds) total += w;
  double u = rng.uniform01() * total;
  for (const auto& [k, w] : kinds) {
    if (u < w) return k;
    u -= w;
  }
  return kinds.back().first;
}

/// Applies one perturbation to g(x); noise flips are recorded for later.
void perturb(Perturbation kind, std::vector<Trace>& traces, const TraceSpace& space, std::uint64_t total,
             std::vector<std::pair<std::size_t, Trace>>& flips, std::size_t problem, Rng& rng) {
  switch (kind) {
    case Perturbation::ExtraPath: {
      if (traces.size() >= total) break;
      while (true) {
        Trace t = trace_from_rank(rng.uniform_index(total), space.horizon, space.alphabet_size);
        if (std::find(traces.begin(), traces.end(), t) == traces.end()) {
          traces.push_back(std::move(t));
          break;
        }
      }
      break;
    }
    case Perturbation::DropLeaf:
      traces.erase(traces.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(traces.size())));
      break;
    case Perturbation::Thin: {
      const std::size_t forced = static_cast<std::size_t>(rng.uniform_index(traces.size()));
      std::vector<Trace> kept;
      for (std::size_t i = 0; i < traces.size(); ++i) {
        if (i != forced && rng.bernoulli(0.5)) kept.push_back(traces[i]);
      }
      traces = std::move(kept);
      break;
    }
    case Perturbation::WipeSubtree: {
      const Trace anchor = traces[rng.uniform_index(traces.size())];
      const std::size_t depth = 1 + static_cast<std::size_t>(rng.uniform_index(space.horizon));
      std::erase_if(traces, [&](const Trace& t) { return std::equal(anchor.begin(), anchor.begin() + depth, t.begin()); });
      break;
    }
    case Perturbation::Noise: {
      const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform_index(space.horizon));
      Trace prefix(len);
      for (Step& s : prefix) s = static_cast<Step>(rng.uniform_index(space.alphabet_size));
      flips.emplace_back(problem, std::move(prefix));
      break;
    }
  }
}

}  // namespace

TrustableInstance make_gold_perturbation_instance(const GoldClassParams& params, std::uint64_t seed) {
  const TraceSpace& space = params.gold.space;
  if (params.kinds.empty()) throw ConfigError("class.perturbations", "must list at least one kind");
  if (params.class_size < 1) throw ConfigError("class.size", "must be positive");
  Rng rng(derive_seed(seed, 0x676f6c64));
  std::shared_ptr<GoldReasoner> gold = make_random_gold(params.gold, rng);
  const auto problems = enumerated_problems(space.problem_count);
  const std::uint64_t total = *space.trace_count(space.horizon);

  std::vector<std::vector<Trace>> truth_sets;
  for (const auto& x : problems) truth_sets.push_back(gold->traces(x));
  auto truth = prefix_closed_table(space, truth_sets, "truth");

  const PrefixIndexer indexer(space.alphabet_size, space.horizon, kDefaultEnumerationBudget);
  DistinctPool pool([&](const Verifier& h) { return behavior_signature(h, problems); }, truth);
  std::size_t attempts = 0;
  std::size_t serial = 0;
  while (pool.size() < params.class_size) {
    if (++attempts > kMaxAttemptsPerMember * params.class_size) {
      throw ConfigError("class.size", "could not find enough behaviorally distinct members");
    }
    const double q = log_uniform(rng, params.q_min, params.q_max);
    std::vector<std::vector<Trace>> sets = truth_sets;
    std::vector<std::pair<std::size_t, Trace>> flips;
    bool any = false;
    for (std::size_t p = 0; p < sets.size(); ++p) {
      if (!rng.bernoulli(q)) continue;
      perturb(pick_kind(params.kinds, rng), sets[p], space, total, flips, p, rng);
      any = true;
    }
    if (!any) {
      const std::size_t p = static_cast<std::size_t>(rng.uniform_index(sets.size()));
      perturb(pick_kind(params.kinds, rng), sets[p], space, total, flips, p, rng);
    }
    auto table = prefix_closed_table(space, sets, "rival" + std::to_string(serial++));
    if (!flips.empty()) {
      std::vector<std::uint64_t> bits = table->bits();
      for (const auto& [p, prefix] : flips) {
        const std::uint64_t k = p * table->stride() + indexer.index(prefix);
        bits[k >> 6] ^= std::uint64_t{1} << (k & 63);
      }
      table = std::make_shared<TableVerifier>(space, std::move(bits), table->describe());
    }
    pool.offer(table);
  }
  auto cls = pool.finish(space, rng, "gold_perturbation");
  std::vector<double> weights;
  if (params.random_problem_weights) weights = normalized_random_weights(problems.size(), rng);
  ProblemDistribution dist(problems, std::move(weights));
  return {cls, cls->member(*cls->truth_index()), gold, std::move(dist)};
}

TrustableInstance make_axiom_subset_instance(std::size_t n, std::size_t horizon, std::size_t problems,
                                             std::uint64_t sigma) {
  const TraceSpace space(n, horizon, ProblemKind::Enumerated, problems);
  if (sigma == 0) throw ConfigError("class.truth_sigma", "σ* must be nonempty so g(x) is nonempty");
  auto cls = std::make_shared<AxiomSubsetClass>(space, sigma);
  VerifierHandle truth = cls->member(sigma);
  auto gold = std::make_shared<GoldReasoner>(space);
  const auto xs = enumerated_problems(problems);
  for (const auto& x : xs) gold->add(x, enumerate_accepted(*truth, x));
  return {cls, truth, gold, ProblemDistribution(xs)};
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

/// Orthonormal basis of the orthogonal complement of span(b).
Eigen::MatrixXd complement(const Eigen::MatrixXd& b, Eigen::Index d) {
  const Eigen::MatrixXd q = orthonormal_basis(b);
  const Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(d, d) - q * q.transpose();
  return orthonormal_basis(proj);
}

Eigen::VectorXd unit(Eigen::Index d, Eigen::Index i) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v[i] = 1.0;
  return v;
}

Eigen::MatrixXd cols(std::initializer_list<Eigen::VectorXd> vs) {
  if (vs.size() == 0) return Eigen::MatrixXd();
  Eigen::MatrixXd m(vs.begin()->size(), static_cast<Eigen::Index>(vs.size()));
  Eigen::Index j = 0;
  for (const auto& v : vs) m.col(j++) = v;
  return m;
}

Eigen::MatrixXd none(Eigen::Index d) { return Eigen::MatrixXd(d, 0); }

}  // namespace

OnlineStream random_online_stream(SubspaceVariant variant, std::size_t dim, std::size_t length, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(dim);
  OnlineStream s;
  s.variant = variant;
  s.dim = dim;
  if (variant == SubspaceVariant::Orthogonal) {
    s.name = "random_orthogonal_d" + std::to_string(dim);
    const auto r = static_cast<Eigen::Index>(rng.uniform_index(dim + 1));
    s.hstar = gaussian(d, r, rng);
    if (r > 0 && rng.bernoulli(0.3)) {
      // A redundant hidden vector: dim span(h*) < |h*|.
      s.hstar = hstack(s.hstar, s.hstar * gaussian(r, 1, rng));
    }
    const Eigen::MatrixXd comp = complement(s.hstar, d);
    for (std::size_t i = 0; i < length; ++i) {
      const auto k = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(comp.cols()) + 1));
      const Eigen::MatrixXd x0 = comp.cols() == 0 ? none(d) : Eigen::MatrixXd(comp * gaussian(comp.cols(), k, rng));
      Eigen::VectorXd x1;
      const double u = rng.uniform01();
      if (u < 0.45 && s.hstar.cols() > 0) {
        x1 = s.hstar * gaussian(s.hstar.cols(), 1, rng);
        if (k > 0) x1 += x0 * gaussian(k, 1, rng);
      } else if (u < 0.6 && k > 0) {
        x1 = x0 * gaussian(k, 1, rng);
      } else {
        x1 = gaussian(d, 1, rng);
      }
      s.steps.emplace_back(x0, x1);
    }
  } else {
    s.name = "random_general_d" + std::to_string(dim);
    s.hstar = rng.bernoulli(0.1) ? Eigen::MatrixXd(Eigen::MatrixXd::Zero(d, 1)) : gaussian(d, 1, rng);
    for (std::size_t i = 0; i < length; ++i) {
      const auto k = static_cast<Eigen::Index>(rng.uniform_index(dim));
      Eigen::MatrixXd x0 = gaussian(d, k, rng);
      if (k > 0 && rng.bernoulli(0.25)) {
        // Put h* inside span(x₀) to reach case 1.
        x0.col(0) = s.hstar.col(0) + (k > 1 ? Eigen::VectorXd(x0.rightCols(k - 1) * gaussian(k - 1, 1, rng))
                                            : Eigen::VectorXd::Zero(d));
      }
      Eigen::VectorXd x1;
      const double u = rng.uniform01();
      if (u < 0.4) {
        x1 = s.hstar.col(0) * rng.normal();
        if (k > 0) x1 += x0 * gaussian(k, 1, rng);
      } else if (u < 0.55 && k > 0) {
        x1 = x0 * gaussian(k, 1, rng);
      } else {
        x1 = gaussian(d, 1, rng);
      }
      s.steps.emplace_back(x0, x1);
    }
  }
  return s;
}

std::vector<OnlineStream> adversarial_online_streams() {
  std::vector<OnlineStream> out;
  auto add = [&](std::string name, SubspaceVariant v, std::size_t d, Eigen::MatrixXd hstar,
                 std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> steps) {
    out.push_back({std::move(name), v, d, std::move(hstar), std::move(steps)});
  };
  using V = SubspaceVariant;

  // The worked example: one mistake on e₃, then e₁+e₃ is accepted.
  add("e3_then_e1_plus_e3", V::Orthogonal, 3, cols({unit(3, 2)}),
      {{cols({unit(3, 0)}), unit(3, 2)}, {cols({unit(3, 0)}), unit(3, 0) + unit(3, 2)}});

  // Each hidden direction revealed separately: mistakes equal dim span(h*).
  {
    std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> steps;
    for (int i = 1; i < 4; ++i) steps.emplace_back(cols({unit(4, 0)}), unit(4, i) + unit(4, 0));
    for (int i = 1; i < 4; ++i) steps.emplace_back(cols({unit(4, 0)}), unit(4, i));
    add("reveal_one_axis_at_a_time", V::Orthogonal, 4, cols({unit(4, 1), unit(4, 2), unit(4, 3)}), steps);
  }

  // Empty problems, five hidden axes, interleaved invalid steps.
  {
    std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> steps;
    for (int i = 1; i < 6; ++i) {
      steps.emplace_back(none(6), unit(6, 0));
      steps.emplace_back(none(6), unit(6, i) + 0.5 * unit(6, (i % 5) + 1));
    }
    add("empty_problems_d6", V::Orthogonal, 6,
        cols({unit(6, 1), unit(6, 2), unit(6, 3), unit(6, 4), unit(6, 5)}), steps);
  }

  // h* = ∅: every step outside span(x₀) is invalid.
  add("empty_hidden_set", V::Orthogonal, 2, none(2),
      {{cols({unit(2, 0)}), unit(2, 1)}, {cols({unit(2, 0)}), unit(2, 0)}, {none(2), unit(2, 1)}});

  // Redundant hidden vectors: bound is the span dimension, not the count.
  add("redundant_hidden_vectors", V::Orthogonal, 3,
      cols({unit(3, 1), 2.0 * unit(3, 1), unit(3, 1) + unit(3, 2), unit(3, 2)}),
      {{cols({unit(3, 0)}), unit(3, 1)}, {cols({unit(3, 0)}), 3.0 * unit(3, 1) - unit(3, 2)},
       {cols({unit(3, 0)}), unit(3, 2) + unit(3, 0)}, {none(3), unit(3, 0)}});

  // General variant: the first mistake from an empty problem pins S* = span(h*).
  add("general_first_mistake_empty_problem", V::General, 2, cols({unit(2, 1)}),
      {{none(2), unit(2, 1)}, {cols({unit(2, 0)}), unit(2, 1)}, {cols({unit(2, 0)}), unit(2, 0) + unit(2, 1)},
       {none(2), unit(2, 0)}});

  // General variant hitting case 1b then case 2.
  {
    const Eigen::VectorXd e1 = unit(3, 0), e2 = unit(3, 1), e3 = unit(3, 2);
    add("general_case_1b_then_2", V::General, 3, cols({e3}),
        {{cols({e1}), e1 + e3}, {cols({e3}), e1}, {cols({e1}), e3 + e1}, {cols({e2}), e1 + e2},
         {cols({e2}), e2 + e3}, {cols({e1, e2}), e3}});
  }

  // General variant, h* = 0: only steps inside span(x₀) are valid.
  {
    std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> steps;
    for (int i = 0; i < 4; ++i) {
      steps.emplace_back(cols({unit(4, i)}), unit(4, (i + 1) % 4));
      steps.emplace_back(cols({unit(4, i)}), 2.0 * unit(4, i));
    }
    add("general_zero_hidden", V::General, 4, Eigen::MatrixXd::Zero(4, 1), steps);
  }

  // General variant, d = 5: valid steps that each shave one dimension off S*.
  {
    const Eigen::Index d = 5;
    Eigen::VectorXd h = Eigen::VectorXd::Ones(d);
    std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> steps;
    steps.emplace_back(cols({unit(d, 0), unit(d, 1), unit(d, 2), unit(d, 3)}), h);
    for (Eigen::Index i = 0; i < d; ++i) {
      Eigen::MatrixXd x0 = none(d);
      for (Eigen::Index j = 0; j < d; ++j) {
        if (j != i) x0 = hstack(x0, unit(d, j));
      }
      steps.emplace_back(x0, h);
      steps.emplace_back(x0, unit(d, i));
    }
    add("general_shrinking_d5", V::General, 5, cols({h}), steps);
  }

  // General variant, d = 6, alternating near-miss steps.
  {
    const Eigen::Index d = 6;
    Eigen::VectorXd h = unit(d, 0) + unit(d, 5);
    std::vector<std::pair<Eigen::MatrixXd, Eigen::VectorXd>> steps;
    for (Eigen::Index i = 1; i < d; ++i) {
      steps.emplace_back(cols({unit(d, i)}), h + unit(d, i));
      steps.emplace_back(cols({unit(d, i)}), unit(d, 0));
      steps.emplace_back(cols({unit(d, 0)}), unit(d, 5));
    }
    add("general_near_misses_d6", V::General, 6, cols({h}), steps);
  }
  return out;
}

OnlineOutcome run_online_stream(const OnlineStream& stream) {
  OnlineSubspaceLearner learner(stream.variant, stream.dim);
  OnlineOutcome out;
  out.bound = stream.variant == SubspaceVariant::Orthogonal
                  ? static_cast<std::size_t>(orthonormal_basis(stream.hstar).cols())
                  : stream.dim + 1;
  for (const auto& [x0, x1] : stream.steps) {
    const bool truth = subspace_truth(x0, x1, stream.hstar);
    const OnlineStepResult r = learner.step(x0, x1, truth);
    if (r.mistake && r.prediction == Verdict::Yes) ++out.false_positives;
  }
  out.mistakes = learner.mistakes();
  return out;
}

// ---------------------------------------------------------------------------

StatusPair random_status_pair(Rng& rng, std::uint64_t max_traces) {
  std::size_t alphabet = 0;
  std::size_t horizon = 0;
  std::uint64_t total = 0;
  while (true) {
    alphabet = 1 + static_cast<std::size_t>(rng.uniform_index(4));
    horizon = 1 + static_cast<std::size_t>(rng.uniform_index(8));
    const auto count = TraceSpace(alphabet, horizon).trace_count(horizon);
    if (count && *count <= max_traces) {
      total = *count;
      break;
    }
  }
  const TraceSpace space(alphabet, horizon, ProblemKind::Enumerated, 1);
  const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_index(std::min<std::uint64_t>(total, 6)));
  std::set<std::uint64_t> ranks;
  while (ranks.size() < k) ranks.insert(rng.uniform_index(total));
  std::vector<Trace> traces;
  for (std::uint64_t r : ranks) traces.push_back(trace_from_rank(r, horizon, alphabet));
  auto gold = std::make_shared<GoldReasoner>(space);
  std::vector<double> weights;
  if (rng.bernoulli(0.5)) weights = normalized_random_weights(k, rng);
  gold->add(ProblemId{0}, traces, weights);

  std::shared_ptr<TableVerifier> verifier;
  const double u = rng.uniform01();
  if (u < 0.2) {
    verifier = prefix_closed_table(space, {traces}, "tree");
  } else if (u < 0.75) {
    // Flip a few bits on or next to the tree, where the two checks could disagree.
    auto base = prefix_closed_table(space, {traces}, "near_tree");
    std::vector<std::uint64_t> bits = base->bits();
    const std::size_t flips = 1 + static_cast<std::size_t>(rng.uniform_index(3));
    const TraceTree& tree = gold->entry(ProblemId{0}).tree;
    for (std::size_t f = 0; f < flips; ++f) {
      const std::size_t node = static_cast<std::size_t>(rng.uniform_index(tree.nodes().size()));
      Trace prefix = tree.path(node);
      if (prefix.size() < horizon && rng.bernoulli(0.6)) {
        prefix.push_back(static_cast<Step>(rng.uniform_index(alphabet)));
      }
      if (prefix.empty()) continue;
      if (rng.bernoulli(0.3)) {
        const std::size_t extra = static_cast<std::size_t>(rng.uniform_index(horizon - prefix.size() + 1));
        for (std::size_t e = 0; e < extra; ++e) prefix.push_back(static_cast<Step>(rng.uniform_index(alphabet)));
      }
      const std::uint64_t bit = base->indexer().index(prefix);
      bits[bit >> 6] ^= std::uint64_t{1} << (bit & 63);
    }
    verifier = std::make_shared<TableVerifier>(space, std::move(bits), "near_tree");
  } else {
    const double yes = rng.uniform(0.3, 0.98);
    verifier = TableVerifier::tabulate(space, [&](std::size_t, Prefix) { return rng.bernoulli(yes); }, "random");
  }
  return {gold, verifier};
}

}  // namespace cotv
