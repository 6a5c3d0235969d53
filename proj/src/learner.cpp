#include "bpac/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "bpac/errors.hpp"

namespace bpac {

namespace {

constexpr double kVarianceBound = 3.0;
constexpr double kDefaultIterations = 2000.0;

void check_accuracy(double eps, double delta) {
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
}

std::uint64_t ceil_u64(double v) { return static_cast<std::uint64_t>(std::ceil(v)); }

struct M2Branches {
  double variance;
  double scale;
};

M2Branches m2_branches(double variance_const, std::size_t k, std::size_t n, double gamma,
                       double delta, double eps) {
  const double log_term = std::log(2.0 * static_cast<double>(n) / delta);
  return {variance_const * log_term / (eps * eps),
          8.0 * static_cast<double>(k) * log_term / (gamma * eps)};
}

void fill_config(RunReport& report, const std::string& algorithm, std::size_t k, std::size_t n,
                 const LearnerConfig& cfg) {
  report.algorithm = algorithm;
  report.num_labels = k;
  report.num_hypotheses = n;
  report.eps = cfg.eps;
  report.delta = cfg.delta;
  report.gamma = cfg.gamma;
  report.mode = cfg.mode;
  report.factors = cfg.factors;
  report.seed = cfg.seed;
}

// max_h of the empirical mean of 1{h(x)=y} / W^gamma_P(x, y) over `data`,
// located with one oracle call.
double empirical_variance_term(ErmOracle& oracle, const SparseSimplex& p,
                               std::span<const LabeledExample> data, const GammaConfig& cfg) {
  const auto& cls = oracle.hypotheses();
  LabelCache cache;
  std::vector<WeightedExample> query;
  query.reserve(data.size());
  for (const auto& s : data) {
    const double w = (1.0 - cfg.gamma) * cache.at(p, cls, s.x)[s.y] + cfg.floor();
    query.push_back({s.x, s.y, 1.0 / w});
  }
  const std::size_t h = oracle(query);
  double total = 0.0;
  for (const auto& q : query) {
    if (cls(h, q.x) == q.y) total += q.weight;
  }
  return total / static_cast<double>(data.size());
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::kTheory ? "theory" : "practical"; }

Mode parse_mode(const std::string& text) {
  if (text == "theory") return Mode::kTheory;
  if (text == "practical") return Mode::kPractical;
  throw ValidationError("unknown mode '" + text + "' (expected theory or practical)");
}

TheoryConstants theory_constants(std::size_t num_labels, double gamma, std::size_t num_hypotheses,
                                 double delta, double eps) {
  if (num_labels < 2) throw ValidationError("theory constants need K >= 2");
  if (num_hypotheses < 1) throw ValidationError("theory constants need N >= 1");
  if (!(gamma > 0.0 && gamma <= 0.5)) throw ValidationError("theory constants need gamma in (0, 1/2]");
  check_accuracy(eps, delta);

  const double k = static_cast<double>(num_labels);
  const double ratio = k / gamma;
  const double log16 = std::log(16.0 * static_cast<double>(num_hypotheses) / delta);

  TheoryConstants c;
  c.m1 = ceil_u64(58000.0 * std::pow(ratio, 8) * log16);
  c.budget = 4 * num_labels * c.m1;
  c.iterations = ceil_u64(240.0 * std::pow(ratio, 4) * std::sqrt(log16));
  c.mu = gamma * gamma / (2.0 * k * k);
  const auto branches = m2_branches(144.0, num_labels, num_hypotheses, gamma, delta, eps);
  c.m2_variance_branch = branches.variance;
  c.m2_scale_branch = branches.scale;
  c.m2 = ceil_u64(std::max(branches.variance, branches.scale));
  return c;
}

RunPlan plan_run(std::size_t num_labels, std::size_t num_hypotheses, const LearnerConfig& cfg) {
  RunPlan plan;
  if (cfg.mode == Mode::kTheory) {
    const auto c = theory_constants(num_labels, cfg.gamma, num_hypotheses, cfg.delta, cfg.eps);
    plan.m1 = c.m1;
    plan.budget = c.budget;
    plan.m2 = c.m2;
    plan.mu = c.mu;
    plan.m2_variance_branch = c.m2_variance_branch;
    plan.m2_scale_branch = c.m2_scale_branch;
    plan.schedule = FWSchedule::log_barrier(num_labels, cfg.gamma, c.iterations);
  } else {
    if (num_labels < 2) throw ValidationError("learning needs K >= 2");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
    check_accuracy(cfg.eps, cfg.delta);
    const auto& f = cfg.factors;
    if (!(f.c1 > 0.0 && f.c2 > 0.0 && f.t_mult > 0.0 && f.reset_mult > 0.0)) {
      throw ValidationError("practical constants must be positive");
    }
    const double k = static_cast<double>(num_labels);
    const double log16 = std::log(16.0 * static_cast<double>(num_hypotheses) / cfg.delta);
    plan.m1 = std::max<std::uint64_t>(1, ceil_u64(f.c1 * log16));
    plan.budget = 4 * num_labels * plan.m1;
    plan.mu = cfg.gamma * cfg.gamma / (2.0 * k * k);
    const auto branches =
        m2_branches(f.c2, num_labels, num_hypotheses, cfg.gamma, cfg.delta, cfg.eps);
    plan.m2_variance_branch = branches.variance;
    plan.m2_scale_branch = branches.scale;
    plan.m2 = ceil_u64(std::max(branches.variance, branches.scale));

    auto fw = FWSchedule::log_barrier(num_labels, cfg.gamma, 1, ScheduleMode::kPractical,
                                      f.reset_mult);
    const auto fits = max_iterations_within(fw, plan.m1);
    if (fits == 0) throw ValidationError("phase-1 dataset too small for a single FW round");
    fw.iterations = std::min<std::uint64_t>(fits, ceil_u64(f.t_mult * kDefaultIterations));
    plan.schedule = fw;
  }
  const double expected = static_cast<double>(num_labels) * static_cast<double>(plan.m1) +
                          static_cast<double>(plan.m2);
  if (expected > static_cast<double>(cfg.max_env_samples)) {
    std::ostringstream msg;
    msg.precision(3);
    msg << "run would need about " << expected << " samples, above the execution cap of "
        << static_cast<double>(cfg.max_env_samples);
    throw ValidationError(msg.str());
  }
  return plan;
}

Phase1Data phase1_collect(BanditEnv& env, std::uint64_t target, std::uint64_t budget, Rng& rng) {
  if (budget < target) throw ValidationError("phase-1 budget smaller than the dataset target");
  const std::size_t k = env.num_labels();
  Phase1Data out;
  out.dataset.reserve(target);
  while (out.dataset.size() < target) {
    if (out.trials == budget) throw BudgetExhausted(out.trials, out.dataset.size(), target);
    const std::size_t x = env.open_round();
    const auto guess = static_cast<Label>(rng.below(k));
    ++out.trials;
    if (env.predict(guess).correct) out.dataset.push_back({x, guess});
  }
  return out;
}

FWResult phase1_solve(ErmOracle& oracle, std::span<const LabeledExample> dataset,
                      const GammaConfig& cfg, const FWSchedule& fw, Rng& rng,
                      const FWOptions& options) {
  return run_fw(oracle, dataset, cfg, fw, rng, options);
}

std::vector<WeightedExample> phase2_explore(BanditEnv& env, const HypothesisClass& cls,
                                            const SparseSimplex& exploration,
                                            const GammaConfig& cfg, std::uint64_t rounds,
                                            Rng& rng) {
  cfg.validate();
  if (exploration.empty() || exploration.entries().back().index >= cls.size()) {
    throw ValidationError("exploration distribution does not fit the class");
  }
  const std::size_t k = env.num_labels();
  LabelCache cache;
  std::vector<WeightedExample> out;
  out.reserve(rounds);
  for (std::uint64_t i = 0; i < rounds; ++i) {
    const std::size_t x = env.open_round();
    Label prediction;
    if (rng.bernoulli(cfg.gamma)) {
      prediction = static_cast<Label>(rng.below(k));
    } else {
      prediction = cls(exploration.sample(rng.uniform()), x);
    }
    const bool correct = env.predict(prediction).correct;
    double weight = 0.0;
    if (correct) {
      weight = 1.0 / ((1.0 - cfg.gamma) * cache.at(exploration, cls, x)[prediction] + cfg.floor());
    }
    out.push_back({x, prediction, weight});
  }
  return out;
}

std::size_t finalize(ErmOracle& oracle, std::span<const WeightedExample> examples) {
  return oracle(examples);
}

LearnResult learn(BanditEnv& env, ErmOracle& oracle, const LearnerConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const auto& cls = oracle.hypotheses();
  if (cls.num_labels() != env.num_labels() || cls.num_examples() != env.num_examples()) {
    throw ValidationError("class and environment disagree on K or m");
  }
  const RunPlan plan = plan_run(cls.num_labels(), cls.size(), cfg);
  const GammaConfig gamma_cfg{cfg.gamma, cls.num_labels()};

  LearnResult result;
  RunReport& report = result.report;
  fill_config(report, "log-barrier", cls.num_labels(), cls.size(), cfg);
  report.m1 = plan.m1;
  report.phase1_budget = plan.budget;
  report.fw_iterations = plan.schedule.iterations;
  report.mu = plan.mu;
  report.m2_variance_branch = plan.m2_variance_branch;
  report.m2_scale_branch = plan.m2_scale_branch;

  const std::uint64_t env_before = env.sample_budget();
  const std::uint64_t calls_before = oracle.calls();

  Rng phase1_rng(cfg.seed, Stream::kPhase1);
  Rng optimizer_rng(cfg.seed, Stream::kOptimizer);
  Rng phase2_rng(cfg.seed, Stream::kPhase2);

  const auto phase1 = phase1_collect(env, plan.m1, plan.budget, phase1_rng);
  report.phase1_trials = phase1.trials;
  report.phase1_kept = phase1.dataset.size();

  FWOptions options;
  options.compact_ledger = cfg.compact_ledger;
  options.keep_rounds = false;
  auto solved = phase1_solve(oracle, phase1.dataset, gamma_cfg, plan.schedule, optimizer_rng,
                             options);
  report.fw_oracle_calls = solved.diagnostics.loo_calls;
  report.exploration_support = solved.solution.support_size();

  const double variance = empirical_variance_term(oracle, solved.solution, phase1.dataset,
                                                  gamma_cfg);
  report.variance_estimate = variance;
  // The bound holds only with probability 1 - delta/2; a miss is reported,
  // not fatal.
  report.variance_warning = variance > kVarianceBound;

  const auto weighted =
      phase2_explore(env, cls, solved.solution, gamma_cfg, plan.m2, phase2_rng);
  report.phase2_rounds = weighted.size();
  result.chosen = finalize(oracle, weighted);

  report.chosen = result.chosen;
  report.oracle_calls = oracle.calls() - calls_before;
  report.total_env_samples = env.sample_budget() - env_before;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.exploration = std::move(solved.solution);
  return result;
}

LearnResult uniform_baseline(BanditEnv& env, ErmOracle& oracle, const LearnerConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const auto& cls = oracle.hypotheses();
  if (cls.num_labels() != env.num_labels() || cls.num_examples() != env.num_examples()) {
    throw ValidationError("class and environment disagree on K or m");
  }
  check_accuracy(cfg.eps, cfg.delta);
  if (!(cfg.factors.cb > 0.0)) throw ValidationError("baseline constant must be positive");
  const double k = static_cast<double>(cls.num_labels());
  const std::uint64_t rounds = ceil_u64(cfg.factors.cb * k *
                                        std::log(2.0 * static_cast<double>(cls.size()) / cfg.delta) /
                                        (cfg.eps * cfg.eps));

  LearnResult result;
  RunReport& report = result.report;
  fill_config(report, "uniform", cls.num_labels(), cls.size(), cfg);
  report.gamma = 1.0;

  const std::uint64_t env_before = env.sample_budget();
  const std::uint64_t calls_before = oracle.calls();
  Rng phase2_rng(cfg.seed, Stream::kPhase2);
  // With gamma = 1 the exploration distribution is never consulted.
  result.exploration = SparseSimplex::vertex(0);
  const auto weighted = phase2_explore(env, cls, result.exploration,
                                       GammaConfig{1.0, cls.num_labels()}, rounds, phase2_rng);
  report.phase2_rounds = weighted.size();
  result.chosen = finalize(oracle, weighted);

  report.chosen = result.chosen;
  report.oracle_calls = oracle.calls() - calls_before;
  report.total_env_samples = env.sample_budget() - env_before;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace bpac
