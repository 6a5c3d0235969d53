#include "bpac/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "bpac/rng.hpp"

namespace bpac::verify {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kFiniteDifferenceStep = 1e-6;
constexpr double kGradientTolerance = 1e-5;
constexpr double kVarianceBound = 3.0;

// Each check draws from its own stream so that adding cases to one check
// does not reshuffle the others.
Rng check_rng(std::uint64_t seed, std::uint64_t tag) {
  return Rng(splitmix64(seed) ^ (tag * 0x9e3779b97f4a7c15ULL), Stream::kTest);
}

struct Timer {
  InvariantResult& result;
  Clock::time_point start = Clock::now();
  ~Timer() { result.seconds = std::chrono::duration<double>(Clock::now() - start).count(); }
};

void record(InvariantResult& r, double value, bool ok) {
  ++r.cases;
  if (!ok) ++r.violations;
  if (r.cases == 1 || value > r.worst) r.worst = value;
}

// Half the draws are interior points, half sit on a few coordinates, where
// W can reach its floor.
reference::DenseSimplex random_point(std::size_t n, Rng& rng) {
  if (rng.bernoulli(0.5)) return reference::random_simplex(n, rng);
  return reference::random_sparse_simplex(n, 1 + rng.below(std::min<std::size_t>(n, 4)), rng);
}

const SupportPoint& random_support_point(const Instance& inst, Rng& rng) {
  return inst.support[rng.below(inst.support.size())];
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

// -ln W^gamma_P(x, y) from a dense P, written out independently of both the
// sparse path and the reference module.
double dense_phi(const HypothesisClass& cls, std::span<const double> p, std::size_t x, Label y,
                 double gamma) {
  double w = 0.0;
  for (std::size_t h = 0; h < cls.size(); ++h) {
    if (cls(h, x) == y) w += p[h];
  }
  return -std::log((1.0 - gamma) * w + gamma / static_cast<double>(cls.num_labels()));
}

}  // namespace

Instance random_check_instance(Rng& rng, std::size_t max_k, std::size_t max_n,
                               std::size_t max_m) {
  const std::size_t k = 2 + rng.below(max_k - 1);
  const std::size_t n = 2 + rng.below(max_n - 1);
  const std::size_t m = 2 + rng.below(max_m - 1);
  const std::size_t support = std::max<std::size_t>(2, (m * k) / 2);
  return make_random_instance({m, k, n, support}, rng.next_u64());
}

InvariantResult check_exact_gradient(const VerifyConfig& cfg) {
  InvariantResult r{"exact-gradient"};
  r.limit = kGradientTolerance;
  Timer timer{r};
  auto rng = check_rng(cfg.seed, 1);
  const double s = kFiniteDifferenceStep;
  for (std::size_t c = 0; c < cfg.gradient_cases; ++c) {
    const auto inst = random_check_instance(rng, 5, 20, 10);
    const auto p = reference::random_simplex(inst.hypotheses.size(), rng).weights;
    const auto grad = reference::exact_grad(inst, p, cfg.gamma);
    double worst = 0.0;
    for (std::size_t h = 0; h < p.size(); ++h) {
      auto plus = p;
      auto minus = p;
      plus[h] += s;
      minus[h] -= s;
      const double fd = (reference::exact_phi(inst, plus, cfg.gamma) -
                         reference::exact_phi(inst, minus, cfg.gamma)) /
                        (2.0 * s);
      const double rel = std::abs(fd - grad[h]) / std::max(std::abs(grad[h]), 1e-12);
      worst = std::max(worst, rel);
    }
    record(r, worst, worst <= kGradientTolerance);
  }
  return r;
}

InvariantResult check_sample_gradient(const VerifyConfig& cfg) {
  InvariantResult r{"sample-gradient"};
  r.limit = kGradientTolerance;
  Timer timer{r};
  auto rng = check_rng(cfg.seed, 2);
  const double s = kFiniteDifferenceStep;
  std::size_t attempts = 0;
  while (r.cases < cfg.gradient_cases && attempts++ < 100 * cfg.gradient_cases) {
    const auto inst = random_check_instance(rng, 5, 20, 10);
    const auto& cls = inst.hypotheses;
    const auto& sp = random_support_point(inst, rng);
    // Direction e_i - e_j with h_i(x) = y and h_j(x) != y stays on the
    // simplex and isolates the coefficient: d phi = c (1 - 0).
    std::vector<std::size_t> hit, miss;
    for (std::size_t h = 0; h < cls.size(); ++h) (cls(h, sp.x) == sp.y ? hit : miss).push_back(h);
    if (hit.empty() || miss.empty()) continue;
    const std::size_t i = hit[rng.below(hit.size())];
    const std::size_t j = miss[rng.below(miss.size())];

    const auto p = reference::random_simplex(cls.size(), rng).weights;
    auto plus = p;
    auto minus = p;
    plus[i] += s;
    plus[j] -= s;
    minus[i] -= s;
    minus[j] += s;
    const double fd = (dense_phi(cls, plus, sp.x, sp.y, cfg.gamma) -
                       dense_phi(cls, minus, sp.x, sp.y, cfg.gamma)) /
                      (2.0 * s);
    const GammaConfig g{cfg.gamma, cls.num_labels()};
    const double c = cfg.coeff(SparseSimplex::from_dense(p), cls, sp.x, sp.y, g);
    const double rel = std::abs(fd - c) / std::abs(fd);
    record(r, rel, rel <= kGradientTolerance);
  }
  return r;
}

InvariantResult check_lipschitz(const VerifyConfig& cfg) {
  InvariantResult r{"lipschitz"};
  r.limit = 1.0;  // ratio to K / gamma
  Timer timer{r};
  auto rng = check_rng(cfg.seed, 3);
  for (std::size_t c = 0; c < cfg.bound_samples; ++c) {
    const auto inst = random_check_instance(rng, 5, 20, 10);
    const auto& cls = inst.hypotheses;
    const GammaConfig g{cfg.gamma, cls.num_labels()};
    const auto p = random_point(cls.size(), rng).weights;
    const auto& sp = random_support_point(inst, rng);
    const double bound = static_cast<double>(cls.num_labels()) / cfg.gamma;
    const double fast = std::abs(cfg.coeff(SparseSimplex::from_dense(p), cls, sp.x, sp.y, g));
    double dense = 0.0;
    for (double v : reference::sample_grad(cls, p, sp.x, sp.y, cfg.gamma)) {
      dense = std::max(dense, std::abs(v));
    }
    const double ratio = std::max(fast, dense) / bound;
    record(r, ratio, ratio <= 1.0 + 1e-12);
  }
  return r;
}

InvariantResult check_smoothness(const VerifyConfig& cfg) {
  InvariantResult r{"smoothness"};
  r.limit = 1.0;  // ratio of the gradient change to (K / gamma)^2 |P - Q|_1
  Timer timer{r};
  auto rng = check_rng(cfg.seed, 4);
  while (r.cases < cfg.bound_samples) {
    const auto inst = random_check_instance(rng, 5, 20, 10);
    const auto& cls = inst.hypotheses;
    const std::size_t n = cls.size();
    const auto p = random_point(n, rng).weights;
    auto q = random_point(n, rng).weights;
    // Nearby pairs probe the local constant, far pairs the global one.
    if (rng.bernoulli(0.5)) {
      const double lambda = std::pow(10.0, -1.0 - 5.0 * rng.uniform());
      for (std::size_t h = 0; h < n; ++h) q[h] = (1.0 - lambda) * p[h] + lambda * q[h];
    }
    const double dist = l1_distance(p, q);
    if (dist == 0.0) continue;
    const auto& sp = random_support_point(inst, rng);
    const auto gp = reference::sample_grad(cls, p, sp.x, sp.y, cfg.gamma);
    const auto gq = reference::sample_grad(cls, q, sp.x, sp.y, cfg.gamma);
    double diff = 0.0;
    for (std::size_t h = 0; h < n; ++h) diff = std::max(diff, std::abs(gp[h] - gq[h]));
    const double kg = static_cast<double>(cls.num_labels()) / cfg.gamma;
    const double ratio = diff / (kg * kg * dist);
    record(r, ratio, ratio <= 1.0 + 1e-9);
  }
  return r;
}

InvariantResult check_omega_grid() {
  InvariantResult r{"omega-inequality"};
  r.limit = 0.0;  // bound minus omega
  Timer timer{r};
  for (int i = 1; i <= 1000; ++i) {
    const double z = i / 100.0;
    const double gap = omega_lower_bound(z) - omega(z);
    record(r, gap, gap <= 0.0);
  }
  return r;
}

InvariantResult check_normalization(const VerifyConfig& cfg) {
  InvariantResult r{"normalization"};
  r.limit = 1e-12;
  Timer timer{r};
  auto rng = check_rng(cfg.seed, 5);
  for (std::size_t c = 0; c < cfg.bound_samples; ++c) {
    const auto inst = random_check_instance(rng, 5, 20, 10);
    const auto& cls = inst.hypotheses;
    const GammaConfig g{cfg.gamma, cls.num_labels()};
    const auto p = SparseSimplex::from_dense(random_point(cls.size(), rng).weights);
    const std::size_t x = rng.below(cls.num_examples());
    double sum = 0.0, sum_gamma = 0.0, floor_violation = 0.0;
    for (Label y = 0; y < cls.num_labels(); ++y) {
      sum += w_prob(p, cls, x, y);
      const double wg = w_prob_gamma(p, cls, x, y, g);
      sum_gamma += wg;
      floor_violation = std::max({floor_violation, g.floor() - wg,
                                  wg - (1.0 - cfg.gamma + g.floor())});
    }
    const double err = std::max({std::abs(sum - 1.0), std::abs(sum_gamma - 1.0),
                                 floor_violation - 1e-15});
    record(r, err, err <= 1e-12);
  }
  return r;
}

InvariantResult check_convexity(const VerifyConfig& cfg) {
  InvariantResult r{"convexity"};
  r.limit = 1e-12;  // midpoint value minus chord
  Timer timer{r};
  auto rng = check_rng(cfg.seed, 6);
  for (std::size_t c = 0; c < cfg.convexity_pairs; ++c) {
    const auto inst = random_check_instance(rng, 5, 20, 10);
    const std::size_t n = inst.hypotheses.size();
    const auto p = random_point(n, rng).weights;
    const auto q = random_point(n, rng).weights;
    std::vector<double> mid(n);
    for (std::size_t h = 0; h < n; ++h) mid[h] = 0.5 * (p[h] + q[h]);
    const double excess = reference::exact_phi(inst, mid, cfg.gamma) -
                          0.5 * (reference::exact_phi(inst, p, cfg.gamma) +
                                 reference::exact_phi(inst, q, cfg.gamma));
    record(r, excess, excess <= 1e-12);
  }
  return r;
}

InvariantResult check_unbiasedness(const VerifyConfig& cfg) {
  InvariantResult r{"unbiasedness"};
  r.limit = 1e-12;
  Timer timer{r};
  auto rng = check_rng(cfg.seed, 7);
  for (std::size_t c = 0; c < cfg.moment_cases; ++c) {
    const auto inst = random_check_instance(rng, 5, 20, 10);
    const auto p = random_point(inst.hypotheses.size(), rng).weights;
    double worst = 0.0;
    for (std::size_t h = 0; h < inst.hypotheses.size(); ++h) {
      const auto moments = reference::exact_estimator_moments(inst, p, cfg.gamma, h);
      worst = std::max(worst, std::abs(moments.mean - reference::reward(inst, h)));
    }
    record(r, worst, worst <= 1e-12);
  }
  return r;
}

InvariantResult check_first_order(const VerifyConfig& cfg) {
  InvariantResult r{"first-order"};
  r.limit = 1e-3;  // E[W_P / W_P*] - 1
  Timer timer{r};
  auto rng = check_rng(cfg.seed, 8);
  const std::size_t instances = std::max<std::size_t>(1, cfg.moment_cases / 4);
  for (std::size_t c = 0; c < instances; ++c) {
    const auto inst = random_check_instance(rng, 5, 20, 10);
    const double k = static_cast<double>(inst.num_labels());
    const double mu = cfg.gamma * cfg.gamma / (2.0 * k * k);
    const auto star = reference::exact_minimize_phi(inst, cfg.gamma, mu / 100.0);
    const std::size_t n = inst.hypotheses.size();
    for (std::size_t d = 0; d < cfg.first_order_directions; ++d) {
      const auto p = d < n ? reference::DenseSimplex::vertex(n, d) : random_point(n, rng);
      const double excess =
          reference::ratio_expectation(inst, p.weights, star.point.weights, cfg.gamma) - 1.0;
      record(r, excess, excess <= 1e-3);
    }
  }
  return r;
}

InvariantResult check_variance_bound(const VerifyConfig& cfg) {
  InvariantResult r{"variance-bound"};
  r.limit = kVarianceBound;
  Timer timer{r};
  auto rng = check_rng(cfg.seed, 9);
  for (std::size_t c = 0; c < cfg.moment_cases; ++c) {
    const auto inst = random_check_instance(rng, 5, 20, 10);
    const double k = static_cast<double>(inst.num_labels());
    const double mu = cfg.gamma * cfg.gamma / (2.0 * k * k);
    const auto star = reference::exact_minimize_phi(inst, cfg.gamma, mu / 100.0);
    double worst = reference::max_variance_term(inst, star.point.weights, cfg.gamma);
    // The second moment of every importance-weighted estimate is the same
    // quantity; check it through the estimator as well.
    for (std::size_t h = 0; h < inst.hypotheses.size(); ++h) {
      worst = std::max(
          worst,
          reference::exact_estimator_moments(inst, star.point.weights, cfg.gamma, h).second_moment);
    }
    record(r, worst, worst <= kVarianceBound);
  }
  return r;
}

OptimizerCase solve_case(const Instance& instance, double gamma, const FWSchedule& fw,
                         std::uint64_t seed) {
  OptimizerCase out;
  const double k = static_cast<double>(instance.num_labels());
  out.mu = gamma * gamma / (2.0 * k * k);
  out.star = reference::exact_minimize_phi(instance, gamma, out.mu / 100.0);
  out.phi_star = out.star.value;

  Rng data_rng(seed, Stream::kTest);
  const auto data = reference::sample_dataset(instance, total_batch(fw), data_rng);
  EnumerationOracle oracle(instance.hypotheses);
  Rng opt_rng(seed, Stream::kOptimizer);
  FWOptions options;
  options.keep_rounds = false;
  auto result = run_fw(oracle, data, GammaConfig{gamma, instance.num_labels()}, fw, opt_rng,
                       options);
  const auto dense = result.solution.to_dense(instance.hypotheses.size());
  out.phi_hat = reference::exact_phi(instance, dense, gamma);
  out.suboptimality = out.phi_hat - out.phi_star;
  out.variance = reference::max_variance_term(instance, dense, gamma);
  out.solution = std::move(result.solution);
  out.diagnostics = std::move(result.diagnostics);
  return out;
}

InvariantResult check_optimizer(const VerifyConfig& cfg) {
  InvariantResult r{"optimizer"};
  r.limit = 1.0;  // ratio of sub-optimality to mu
  Timer timer{r};
  auto rng = check_rng(cfg.seed, 10);
  for (std::size_t c = 0; c < cfg.optimizer_cases; ++c) {
    const auto inst = random_check_instance(rng, 5, 50, 12);
    const auto fw = FWSchedule::log_barrier(inst.num_labels(), cfg.gamma,
                                            cfg.optimizer_iterations, ScheduleMode::kPractical,
                                            cfg.reset_mult);
    const auto result = solve_case(inst, cfg.gamma, fw, rng.next_u64());
    const double ratio = result.suboptimality / result.mu;
    const bool ok = ratio <= 1.0 && result.variance <= kVarianceBound &&
                    result.diagnostics.max_support <= cfg.optimizer_iterations;
    record(r, ratio, ok);
  }
  return r;
}

FWTrace trace_fw(const Instance& instance, double gamma, const FWSchedule& fw,
                 std::uint64_t seed, double tol) {
  FWTrace trace;
  const auto star = reference::exact_minimize_phi(instance, gamma, tol);
  trace.phi_star = star.value;
  trace.star_gap = star.gap;

  Rng data_rng(seed, Stream::kTest);
  const auto data = reference::sample_dataset(instance, total_batch(fw), data_rng);
  EnumerationOracle oracle(instance.hypotheses);
  Rng opt_rng(seed, Stream::kOptimizer);
  const std::size_t n = instance.hypotheses.size();
  FWOptions options;
  options.keep_rounds = false;
  options.observer = [&](const RoundRecord& rec, const SparseSimplex& next) {
    const double value = reference::exact_phi(instance, next.to_dense(n), gamma);
    trace.points.push_back({rec.t, value - trace.phi_star, next.support_size()});
  };
  run_fw(oracle, data, GammaConfig{gamma, instance.num_labels()}, fw, opt_rng, options);
  return trace;
}

double loglog_slope(const FWTrace& trace, std::uint64_t lo, std::uint64_t hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (const auto& p : trace.points) {
    if (p.t < lo || p.t > hi || !(p.suboptimality > 0.0)) continue;
    const double x = std::log(static_cast<double>(p.t));
    const double y = std::log(p.suboptimality);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::numeric_limits<double>::quiet_NaN();
  const double c = static_cast<double>(count);
  return (c * sxy - sx * sy) / (c * sxx - sx * sx);
}

std::vector<InvariantResult> run_all(const VerifyConfig& cfg) {
  std::vector<InvariantResult> out;
  out.push_back(check_exact_gradient(cfg));
  out.push_back(check_sample_gradient(cfg));
  out.push_back(check_lipschitz(cfg));
  out.push_back(check_smoothness(cfg));
  out.push_back(check_omega_grid());
  out.push_back(check_normalization(cfg));
  out.push_back(check_convexity(cfg));
  out.push_back(check_unbiasedness(cfg));
  out.push_back(check_first_order(cfg));
  out.push_back(check_variance_bound(cfg));
  if (cfg.optimizer_cases > 0) out.push_back(check_optimizer(cfg));
  return out;
}

void print_results(std::ostream& out, const std::vector<InvariantResult>& results) {
  char line[256];
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-18s %s cases=%zu violations=%zu worst=%.3e limit=%.3e %.2fs",
                  r.name.c_str(), r.passed() ? "PASS" : "FAIL", r.cases, r.violations, r.worst,
                  r.limit, r.seconds);
    out << line << '\n';
  }
}

}  // namespace bpac::verify
