#pragma once

// Executable invariant suite behind `bpac verify` and the acceptance binary.
// Every check compares the fast sparse path against the dense reference
// module or against a closed-form bound, and counts violations.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bpac/core.hpp"
#include "bpac/logbarrier.hpp"
#include "bpac/reference.hpp"
#include "bpac/spiderfw.hpp"

namespace bpac::verify {

struct InvariantResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t violations = 0;
  double worst = 0.0;  ///< largest observed value of the checked quantity
  double limit = 0.0;  ///< the bound it is checked against
  double seconds = 0.0;

  bool passed() const { return cases > 0 && violations == 0; }
};

/// Signature of phi_grad_coeff; injectable so tests can plant a faulty one.
using CoeffFn = std::function<double(const SparseSimplex&, const HypothesisClass&, std::size_t,
                                     Label, const GammaConfig&)>;

struct VerifyConfig {
  std::uint64_t seed = 0;
  double gamma = 0.5;
  std::size_t gradient_cases = 50;
  std::size_t bound_samples = 1000;
  std::size_t convexity_pairs = 200;
  std::size_t moment_cases = 20;
  std::size_t first_order_directions = 100;
  std::size_t optimizer_cases = 3;
  std::uint64_t optimizer_iterations = 2000;
  double reset_mult = 25.0;
  CoeffFn coeff = phi_grad_coeff;
};

/// Small random instance: K in [2, max_k], N in [2, max_n], m in [2, max_m],
/// support on about half of the (x, y) pairs.
Instance random_check_instance(Rng& rng, std::size_t max_k, std::size_t max_n, std::size_t max_m);

InvariantResult check_exact_gradient(const VerifyConfig& cfg);
InvariantResult check_sample_gradient(const VerifyConfig& cfg);
InvariantResult check_lipschitz(const VerifyConfig& cfg);
InvariantResult check_smoothness(const VerifyConfig& cfg);
InvariantResult check_omega_grid();
InvariantResult check_normalization(const VerifyConfig& cfg);
InvariantResult check_convexity(const VerifyConfig& cfg);
InvariantResult check_unbiasedness(const VerifyConfig& cfg);
InvariantResult check_first_order(const VerifyConfig& cfg);
InvariantResult check_variance_bound(const VerifyConfig& cfg);
InvariantResult check_optimizer(const VerifyConfig& cfg);

/// One practical-mode SPIDER-FW solve on an i.i.d. dataset sized to the
/// schedule, scored against the exact minimizer at tolerance mu / 100.
struct OptimizerCase {
  double mu = 0.0;
  double phi_star = 0.0;
  double phi_hat = 0.0;
  double suboptimality = 0.0;
  double variance = 0.0;  ///< max_h E[1{h(x)=y} / W^gamma] at the FW output
  reference::ExactMinimum star;
  SparseSimplex solution;
  FWDiagnostics diagnostics;
};

OptimizerCase solve_case(const Instance& instance, double gamma, const FWSchedule& fw,
                         std::uint64_t seed);

/// Exact sub-optimality of every iterate of one SPIDER-FW run. Point t
/// describes P_{t+1}, the iterate after t rounds.
struct TracePoint {
  std::uint64_t t = 0;
  double suboptimality = 0.0;
  std::size_t support_size = 0;
};

struct FWTrace {
  std::vector<TracePoint> points;
  double phi_star = 0.0;
  double star_gap = 0.0;
};

/// Runs the schedule on an i.i.d. dataset of exactly the size it consumes
/// and scores each iterate against the exact minimizer at tolerance `tol`.
FWTrace trace_fw(const Instance& instance, double gamma, const FWSchedule& fw,
                 std::uint64_t seed, double tol = 1e-10);

/// Least-squares slope of ln(sub-optimality) against ln t over lo <= t <= hi.
/// Non-positive sub-optimalities are skipped.
double loglog_slope(const FWTrace& trace, std::uint64_t lo, std::uint64_t hi);

std::vector<InvariantResult> run_all(const VerifyConfig& cfg);

/// One line per invariant: name, cases, violations, worst / limit, time.
void print_results(std::ostream& out, const std::vector<InvariantResult>& results);

}  // namespace bpac::verify
