#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "bpac/core.hpp"
#include "bpac/logbarrier.hpp"
#include "bpac/oracle.hpp"
#include "bpac/rng.hpp"

namespace bpac {

enum class ScheduleMode { kTheory, kPractical };

/// Step and batch schedule of stochastic Frank-Wolfe with SPIDER estimates.
/// Reset rounds are t = 2^k - 1; they take ceil((G / (beta D))^2 t^2)
/// samples (scaled by `reset_batch_mult` in practical mode), other rounds
/// take t samples. Step size is 1/t.
struct FWSchedule {
  double lipschitz = 1.0;   ///< G, bound on the sup-norm of sample gradients
  double smoothness = 1.0;  ///< beta, L1 smoothness
  double diameter = 2.0;    ///< D, L1 diameter of the simplex
  std::uint64_t iterations = 1;
  ScheduleMode mode = ScheduleMode::kTheory;
  double reset_batch_mult = 1.0;

  /// Constants of the log-barrier objective: G = K / gamma, beta = K^2 / gamma^2.
  static FWSchedule log_barrier(std::size_t num_labels, double gamma, std::uint64_t iterations,
                                ScheduleMode mode = ScheduleMode::kTheory,
                                double reset_batch_mult = 1.0);
  void validate() const;
};

struct ScheduleStep {
  double eta = 1.0;
  std::uint64_t batch = 1;
  bool reset = true;
};

/// True for t in {1, 3, 7, 15, ...}.
bool is_reset_round(std::uint64_t t);
ScheduleStep schedule(std::uint64_t t, const FWSchedule& fw);
/// Sum of b_t over t = 1..iterations.
std::uint64_t total_batch(const FWSchedule& fw);
/// Largest T for which the schedule with `iterations = T` consumes at most
/// `samples`; zero when even one round does not fit.
std::uint64_t max_iterations_within(const FWSchedule& fw, std::uint64_t samples);

/// Optimizer state at the start of round t: P_t, P_{t-1}, and g_{t-1} held
/// implicitly as a ledger of (x, y, coefficient) terms.
struct FWState {
  std::uint64_t t = 1;
  SparseSimplex current;
  SparseSimplex previous;
  GradientLedger ledger;
  std::uint64_t cursor = 0;  ///< next unread position in the shuffled dataset
  std::uint64_t oracle_calls = 0;
  LabelCache current_cache;
  LabelCache previous_cache;

  /// State with P_1 = `start` (normally a vertex) and an empty ledger.
  static FWState start_at(SparseSimplex start);
};

struct RoundRecord {
  std::uint64_t t = 0;
  double eta = 0.0;
  std::uint64_t batch = 0;
  bool reset = false;
  double phi_estimate = std::numeric_limits<double>::quiet_NaN();
  std::size_t support_size = 0;  ///< of P_{t+1}
  std::uint64_t oracle_calls = 0;
  std::size_t vertex = 0;  ///< Q_t
};

struct FWOptions {
  /// Merge repeated (x, y) ledger terms after every round.
  bool compact_ledger = true;
  /// Start vertex; when unset, P_1 is the unit-weight ERM vertex of the data.
  std::optional<std::size_t> start_vertex;
  /// When nonempty, each round records phi_empirical of P_{t+1} on this slice.
  std::span<const LabeledExample> holdout;
  /// Called after each round with the record and P_{t+1}.
  std::function<void(const RoundRecord&, const SparseSimplex&)> observer;
  bool keep_rounds = true;
};

/// One round. `batch` must hold exactly b_t samples. On reset rounds the
/// ledger is rebuilt from the batch; otherwise it gains the SPIDER
/// correction terms (1/b_t)(grad phi(P_t) - grad phi(P_{t-1})). Then
/// Q_t = LOO(g_t) through one oracle call and P_{t+1} = (1 - eta_t) P_t + eta_t Q_t.
RoundRecord fw_step(FWState& state, std::span<const LabeledExample> batch,
                    const GammaConfig& cfg, ErmOracle& oracle, const FWSchedule& fw,
                    bool compact_ledger = true);

struct FWDiagnostics {
  std::vector<RoundRecord> rounds;
  std::uint64_t loo_calls = 0;
  std::uint64_t init_calls = 0;
  std::uint64_t samples_consumed = 0;
  std::size_t max_support = 0;
};

struct FWResult {
  SparseSimplex solution;  ///< last iterate P_{T+1}
  FWDiagnostics diagnostics;
};

/// Runs `fw.iterations` rounds on a once-shuffled copy of `data`, drawing
/// each batch without replacement. Throws DatasetExhausted when the schedule
/// needs more samples than `data` holds.
FWResult run_fw(ErmOracle& oracle, std::span<const LabeledExample> data, const GammaConfig& cfg,
                const FWSchedule& fw, Rng& rng, const FWOptions& options = {});

/// Columns: t,eta,b,reset,phi_estimate,support_size,oracle_calls
void write_rounds_csv(std::ostream& out, std::span<const RoundRecord> rounds);

}  // namespace bpac
