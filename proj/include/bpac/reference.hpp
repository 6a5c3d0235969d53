#pragma once

// Brute-force, sampling-free oracles for tests, the verify suite, and the
// optimizer benchmark. Everything here works on dense N-vectors and
// recomputes W from the class table directly, sharing no code path with the
// sparse fast path it checks.

#include <cstddef>
#include <span>
#include <vector>

#include "bpac/core.hpp"
#include "bpac/oracle.hpp"
#include "bpac/rng.hpp"

namespace bpac::reference {

inline constexpr std::size_t kMaxHypotheses = 10000;
inline constexpr std::size_t kMaxSupport = 10000;

/// Dense distribution over the full class.
struct DenseSimplex {
  std::vector<double> weights;

  /// Throws ValidationError unless nonnegative and summing to 1 within 1e-12.
  void validate() const;
  static DenseSimplex vertex(std::size_t n, std::size_t h);
  static DenseSimplex uniform(std::size_t n);
};

/// Random point of the simplex (normalized exponentials); every coordinate
/// is strictly positive.
DenseSimplex random_simplex(std::size_t n, Rng& rng);
/// Random point supported on `support` random coordinates.
DenseSimplex random_sparse_simplex(std::size_t n, std::size_t support, Rng& rng);

/// W^gamma_P(x_j, y_j) for every support point j.
std::vector<double> support_w_gamma(const Instance& instance, std::span<const double> p,
                                    double gamma);

/// Phi(P) = E[-ln W^gamma_P(x, y)] over the exact support. P need not be
/// normalized, which lets finite differences move off the simplex.
double exact_phi(const Instance& instance, std::span<const double> p, double gamma);

/// grad Phi(P)_h = -(1 - gamma) E[1{h(x) = y} / W^gamma_P(x, y)].
std::vector<double> exact_grad(const Instance& instance, std::span<const double> p,
                               double gamma);

/// Dense per-sample gradient -(1 - gamma) J_{x,y} / W^gamma_P(x, y).
std::vector<double> sample_grad(const HypothesisClass& cls, std::span<const double> p,
                                std::size_t x, Label y, double gamma);

/// max_h E[1{h(x) = y} / W^gamma_P(x, y)], the second-moment bound of the
/// importance-weighted reward estimates.
double max_variance_term(const Instance& instance, std::span<const double> p, double gamma);

/// E[W^gamma_P(x, y) / W^gamma_Q(x, y)].
double ratio_expectation(const Instance& instance, std::span<const double> p,
                         std::span<const double> q, double gamma);

struct ExactMinimum {
  DenseSimplex point;
  double value = 0.0;
  double gap = 0.0;  ///< Frank-Wolfe duality gap at `point`; bounds Phi(point) - min Phi
  std::size_t iterations = 0;
};

/// Minimizes Phi over the simplex with exact-gradient pairwise Frank-Wolfe
/// and exact line search, stopping once the Frank-Wolfe duality gap
/// max_Q (P - Q) . grad Phi(P) is at most `tol`. Throws GuardExceeded past
/// 10^7 iterations or outside the size guards.
ExactMinimum exact_minimize_phi(const Instance& instance, double gamma, double tol);

/// Duality gap max_Q (P - Q) . grad Phi(P) at an arbitrary point.
double duality_gap(const Instance& instance, std::span<const double> p, double gamma);

struct EstimatorMoments {
  double mean = 0.0;
  double second_moment = 0.0;
};

/// Exact moments of X(h) = alpha * 1{h(x) = yhat} where yhat is uniform with
/// probability gamma and h'(x) for h' ~ P otherwise, and
/// alpha = 1{yhat = y} / W^gamma_P(x, yhat). Enumerates every branch.
EstimatorMoments exact_estimator_moments(const Instance& instance, std::span<const double> p,
                                         double gamma, std::size_t h);

/// Pr[h(x) = y].
double reward(const Instance& instance, std::size_t h);

/// L_D(h) - min_h' L_D(h'), recomputed from scratch.
double excess_loss(const Instance& instance, std::size_t h);

/// Independent weighted ERM: all losses first, then the first minimum.
std::size_t brute_force_erm(const HypothesisClass& cls,
                            std::span<const WeightedExample> examples);

/// argmin_h of the ledger functional by direct enumeration of g(h).
std::size_t brute_force_ledger_argmin(const HypothesisClass& cls, const GradientLedger& ledger);

/// d(h, h') = Pr[h(x) != h'(x)] under the instance's example marginal.
double disagreement(const Instance& instance, std::size_t h1, std::size_t h2);

/// n i.i.d. labeled draws (x, y) ~ D, as a full-information learner would see them.
std::vector<LabeledExample> sample_dataset(const Instance& instance, std::size_t n, Rng& rng);

}  // namespace bpac::reference
