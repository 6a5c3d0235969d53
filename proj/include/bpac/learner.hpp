#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bpac/core.hpp"
#include "bpac/env.hpp"
#include "bpac/logbarrier.hpp"
#include "bpac/oracle.hpp"
#include "bpac/rng.hpp"
#include "bpac/spiderfw.hpp"

namespace bpac {

enum class Mode { kTheory, kPractical };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// Worst-case constants certified by the analysis (natural logarithms).
struct TheoryConstants {
  std::uint64_t m1 = 0;          ///< phase-1 dataset size, ceil(58000 (K/gamma)^8 ln(16N/delta))
  std::uint64_t budget = 0;      ///< phase-1 trial cap, 4 K M1
  std::uint64_t iterations = 0;  ///< FW rounds, ceil(240 (K/gamma)^4 sqrt(ln(16N/delta)))
  double mu = 0.0;               ///< optimization tolerance gamma^2 / (2 K^2)
  std::uint64_t m2 = 0;          ///< phase-2 rounds, ceil of the larger branch below
  double m2_variance_branch = 0.0;  ///< 144 ln(2N/delta) / eps^2
  double m2_scale_branch = 0.0;     ///< 8 K ln(2N/delta) / (gamma eps)
};

/// Throws ValidationError unless gamma in (0, 1/2], eps and delta in (0, 1),
/// K >= 2 and N >= 1.
TheoryConstants theory_constants(std::size_t num_labels, double gamma, std::size_t num_hypotheses,
                                 double delta, double eps);

/// Desk-scale replacements for the worst-case constants.
struct PracticalFactors {
  double c1 = 500.0;  ///< M1 = ceil(c1 ln(16N/delta))
  double c2 = 8.0;    ///< replaces 144 in the variance branch of M2
  double cb = 3.0;    ///< uniform baseline rounds, ceil(cb K ln(2N/delta) / eps^2)
  double cs = 8.0;    ///< cover sample-size constant
  double t_mult = 1.0;      ///< caps FW rounds at ceil(t_mult * 2000)
  double reset_mult = 25.0;  ///< scales reset-round batch sizes
};

struct LearnerConfig {
  double eps = 0.1;
  double delta = 0.1;
  double gamma = 0.5;
  Mode mode = Mode::kPractical;
  PracticalFactors factors;
  std::uint64_t seed = 0;
  /// Refuse runs whose expected sample use (K M1 + M2) exceeds this.
  std::uint64_t max_env_samples = 400'000'000;
  bool compact_ledger = true;
};

struct RunPlan {
  std::uint64_t m1 = 0;
  std::uint64_t budget = 0;
  std::uint64_t m2 = 0;
  double mu = 0.0;
  double m2_variance_branch = 0.0;
  double m2_scale_branch = 0.0;
  FWSchedule schedule;
};

/// Resolves the constants for one run (theory or practical mode).
RunPlan plan_run(std::size_t num_labels, std::size_t num_hypotheses, const LearnerConfig& cfg);

struct CoverSummary {
  std::uint64_t samples = 0;
  std::size_t base_size = 0;
  std::size_t representatives = 0;
  std::size_t natarajan_dim = 0;
  std::optional<double> radius;  ///< filled by the harness from the instance
};

struct RunReport {
  std::string algorithm;  ///< "log-barrier", "uniform", or "cover"
  std::size_t num_labels = 0;
  std::size_t num_hypotheses = 0;
  double eps = 0.0;
  double delta = 0.0;
  double gamma = 0.0;
  Mode mode = Mode::kPractical;
  PracticalFactors factors;
  std::uint64_t seed = 0;

  std::uint64_t m1 = 0;
  std::uint64_t phase1_budget = 0;
  std::uint64_t fw_iterations = 0;
  double mu = 0.0;
  double m2_variance_branch = 0.0;
  double m2_scale_branch = 0.0;

  std::uint64_t phase1_trials = 0;
  std::uint64_t phase1_kept = 0;
  std::uint64_t fw_oracle_calls = 0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t phase2_rounds = 0;
  std::uint64_t total_env_samples = 0;
  std::size_t exploration_support = 0;
  /// Empirical max_h mean of 1{h(x)=y} / W^gamma on the phase-1 data.
  std::optional<double> variance_estimate;
  bool variance_warning = false;

  std::size_t chosen = 0;
  std::optional<double> excess;  ///< filled by the harness from the instance
  double wall_time_s = 0.0;
  std::optional<CoverSummary> cover;
  std::string build_id = BPAC_BUILD_ID;
};

struct Phase1Data {
  std::vector<LabeledExample> dataset;
  std::uint64_t trials = 0;
};

/// Predicts uniformly at random and keeps (x, yhat) whenever the feedback
/// says it was correct, until `target` pairs are kept. Throws BudgetExhausted
/// if `budget` trials do not suffice.
Phase1Data phase1_collect(BanditEnv& env, std::uint64_t target, std::uint64_t budget, Rng& rng);

/// Approximately minimizes the empirical log-barrier objective on the
/// phase-1 data with SPIDER Frank-Wolfe.
FWResult phase1_solve(ErmOracle& oracle, std::span<const LabeledExample> dataset,
                      const GammaConfig& cfg, const FWSchedule& fw, Rng& rng,
                      const FWOptions& options = {});

/// Runs `rounds` exploration rounds: yhat is uniform with probability gamma,
/// otherwise h(x) for h ~ P. Each round yields (x, yhat, alpha) with
/// alpha = 1{correct} / W^gamma_P(x, yhat); incorrect rounds keep alpha = 0.
std::vector<WeightedExample> phase2_explore(BanditEnv& env, const HypothesisClass& cls,
                                            const SparseSimplex& exploration,
                                            const GammaConfig& cfg, std::uint64_t rounds,
                                            Rng& rng);

/// One weighted-ERM call; equals argmax_h of the importance-weighted reward.
std::size_t finalize(ErmOracle& oracle, std::span<const WeightedExample> examples);

struct LearnResult {
  std::size_t chosen = 0;
  RunReport report;
  SparseSimplex exploration;
};

/// Two-phase bandit learner. Random streams derive from cfg.seed; the
/// environment is seeded by the caller.
LearnResult learn(BanditEnv& env, ErmOracle& oracle, const LearnerConfig& cfg);

/// Phase-2-only learning with gamma = 1 (uniform predictions, weights
/// K * 1{correct}) for ceil(cb K ln(2N/delta) / eps^2) rounds.
LearnResult uniform_baseline(BanditEnv& env, ErmOracle& oracle, const LearnerConfig& cfg);

}  // namespace bpac
