#include "bpac/spiderfw.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bpac/errors.hpp"

namespace bpac {

namespace {

constexpr double kPruneThreshold = 1e-15;
constexpr std::uint64_t kRenormalizeEvery = 100;

std::vector<WeightedExample> unit_weights(std::span<const LabeledExample> data) {
  std::vector<WeightedExample> query;
  query.reserve(data.size());
  for (const auto& s : data) query.push_back({s.x, s.y, 1.0});
  return query;
}

}  // namespace

FWSchedule FWSchedule::log_barrier(std::size_t num_labels, double gamma,
                                   std::uint64_t iterations, ScheduleMode mode,
                                   double reset_batch_mult) {
  GammaConfig{gamma, num_labels}.validate();
  const double k_over_gamma = static_cast<double>(num_labels) / gamma;
  FWSchedule fw;
  fw.lipschitz = k_over_gamma;
  fw.smoothness = k_over_gamma * k_over_gamma;
  fw.diameter = 2.0;
  fw.iterations = iterations;
  fw.mode = mode;
  fw.reset_batch_mult = reset_batch_mult;
  fw.validate();
  return fw;
}

void FWSchedule::validate() const {
  if (!(lipschitz > 0.0 && smoothness > 0.0 && diameter > 0.0)) {
    throw ValidationError("schedule constants G, beta, D must be positive");
  }
  if (iterations < 1) throw ValidationError("schedule needs at least one iteration");
  if (!(reset_batch_mult > 0.0)) throw ValidationError("reset batch multiplier must be positive");
}

bool is_reset_round(std::uint64_t t) { return t >= 1 && ((t + 1) & t) == 0; }

ScheduleStep schedule(std::uint64_t t, const FWSchedule& fw) {
  if (t < 1) throw ValidationError("schedule rounds start at t = 1");
  ScheduleStep step;
  step.eta = 1.0 / static_cast<double>(t);
  step.reset = is_reset_round(t);
  if (step.reset) {
    const double ratio = fw.lipschitz / (fw.smoothness * fw.diameter);
    const double mult = fw.mode == ScheduleMode::kPractical ? fw.reset_batch_mult : 1.0;
    const double td = static_cast<double>(t);
    const double raw = mult * ratio * ratio * td * td;
    // Products that are integers up to rounding must not round up.
    const double b = std::ceil(raw * (1.0 - 1e-12));
    step.batch = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(b));
  } else {
    step.batch = t;
  }
  return step;
}

std::uint64_t total_batch(const FWSchedule& fw) {
  std::uint64_t total = 0;
  for (std::uint64_t t = 1; t <= fw.iterations; ++t) total += schedule(t, fw).batch;
  return total;
}

std::uint64_t max_iterations_within(const FWSchedule& fw, std::uint64_t samples) {
  std::uint64_t used = 0;
  std::uint64_t t = 0;
  while (true) {
    const auto b = schedule(t + 1, fw).batch;
    if (used + b > samples) return t;
    used += b;
    ++t;
  }
}

FWState FWState::start_at(SparseSimplex start) {
  if (start.empty()) throw ValidationError("optimizer start point is empty");
  FWState state;
  state.current = start;
  state.previous = std::move(start);
  return state;
}

RoundRecord fw_step(FWState& state, std::span<const LabeledExample> batch,
                    const GammaConfig& cfg, ErmOracle& oracle, const FWSchedule& fw,
                    bool compact_ledger) {
  cfg.validate();
  const auto& cls = oracle.hypotheses();
  const ScheduleStep step = schedule(state.t, fw);
  if (batch.size() != step.batch) {
    throw ValidationError("round " + std::to_string(state.t) + " expects a batch of " +
                          std::to_string(step.batch) + " samples, got " +
                          std::to_string(batch.size()));
  }
  const double inv_b = 1.0 / static_cast<double>(step.batch);

  if (step.reset) {
    state.ledger.clear();
    for (const auto& s : batch) {
      const double w = state.current_cache.at(state.current, cls, s.x)[s.y];
      state.ledger.append(s.x, s.y, inv_b * grad_coeff_from_w(w, cfg));
    }
  } else {
    for (const auto& s : batch) {
      const double w_now = state.current_cache.at(state.current, cls, s.x)[s.y];
      const double w_before = state.previous_cache.at(state.previous, cls, s.x)[s.y];
      state.ledger.append(s.x, s.y, inv_b * grad_coeff_from_w(w_now, cfg));
      state.ledger.append(s.x, s.y, -inv_b * grad_coeff_from_w(w_before, cfg));
    }
  }
  if (compact_ledger) state.ledger.compact();

  const std::size_t vertex = loo_from_ledger(oracle, state.ledger);
  ++state.oracle_calls;

  state.previous = state.current;
  std::swap(state.previous_cache, state.current_cache);
  state.current_cache.clear();

  state.current.step_toward(vertex, step.eta);
  const bool pruned = state.current.prune(kPruneThreshold) > 0;
  if (pruned || state.t % kRenormalizeEvery == 0) state.current.renormalize();

  RoundRecord record;
  record.t = state.t;
  record.eta = step.eta;
  record.batch = step.batch;
  record.reset = step.reset;
  record.support_size = state.current.support_size();
  record.oracle_calls = state.oracle_calls;
  record.vertex = vertex;
  ++state.t;
  return record;
}

FWResult run_fw(ErmOracle& oracle, std::span<const LabeledExample> data, const GammaConfig& cfg,
                const FWSchedule& fw, Rng& rng, const FWOptions& options) {
  fw.validate();
  cfg.validate();
  const std::uint64_t needed = total_batch(fw);
  if (needed > data.size()) {
    throw DatasetExhausted("schedule needs " + std::to_string(needed) +
                           " samples but the dataset holds " + std::to_string(data.size()));
  }

  std::vector<LabeledExample> shuffled(data.begin(), data.end());
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  }

  FWResult result;
  std::size_t start = 0;
  if (options.start_vertex) {
    start = *options.start_vertex;
    if (start >= oracle.hypotheses().size()) throw ValidationError("start vertex out of range");
  } else {
    const auto query = unit_weights(data);
    start = oracle(query);
    result.diagnostics.init_calls = 1;
  }

  FWState state = FWState::start_at(SparseSimplex::vertex(start));
  result.diagnostics.max_support = 1;
  if (options.keep_rounds) result.diagnostics.rounds.reserve(fw.iterations);

  for (std::uint64_t t = 1; t <= fw.iterations; ++t) {
    const auto b = schedule(t, fw).batch;
    const std::span<const LabeledExample> batch(shuffled.data() + state.cursor, b);
    state.cursor += b;
    RoundRecord record = fw_step(state, batch, cfg, oracle, fw, options.compact_ledger);
    if (!options.holdout.empty()) {
      record.phi_estimate = phi_empirical(state.current, oracle.hypotheses(), options.holdout, cfg);
    }
    result.diagnostics.max_support =
        std::max(result.diagnostics.max_support, state.current.support_size());
    if (options.observer) options.observer(record, state.current);
    if (options.keep_rounds) result.diagnostics.rounds.push_back(record);
  }

  state.current.renormalize();
  result.solution = std::move(state.current);
  result.diagnostics.loo_calls = state.oracle_calls;
  result.diagnostics.samples_consumed = state.cursor;
  return result;
}

void write_rounds_csv(std::ostream& out, std::span<const RoundRecord> rounds) {
  out << "t,eta,b,reset,phi_estimate,support_size,oracle_calls\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : rounds) {
    out << r.t << ',' << r.eta << ',' << r.batch << ',' << (r.reset ? 1 : 0) << ',';
    if (!std::isnan(r.phi_estimate)) out << r.phi_estimate;
    out << ',' << r.support_size << ',' << r.oracle_calls << '\n';
  }
  out.precision(old_precision);
}

}  // namespace bpac
