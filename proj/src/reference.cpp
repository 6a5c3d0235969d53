#include "bpac/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bpac/errors.hpp"

namespace bpac::reference {

namespace {

void guard(const Instance& instance) {
  if (instance.hypotheses.size() > kMaxHypotheses) {
    throw GuardExceeded("reference path limited to " + std::to_string(kMaxHypotheses) +
                        " hypotheses");
  }
  if (instance.support.size() > kMaxSupport) {
    throw GuardExceeded("reference path limited to " + std::to_string(kMaxSupport) +
                        " support points");
  }
}

void check_dimension(const Instance& instance, std::span<const double> p) {
  if (p.size() != instance.hypotheses.size()) {
    throw ValidationError("dense distribution has the wrong dimension");
  }
}

double w_gamma_at(const HypothesisClass& cls, std::span<const double> p, std::size_t x, Label y,
                  double gamma) {
  double w = 0.0;
  for (std::size_t h = 0; h < cls.size(); ++h) {
    if (cls(h, x) == y) w += p[h];
  }
  return (1.0 - gamma) * w + gamma / static_cast<double>(cls.num_labels());
}

// For each support point, the hypotheses that predict its label.
std::vector<std::vector<std::size_t>> match_lists(const Instance& instance) {
  const auto& cls = instance.hypotheses;
  std::vector<std::vector<std::size_t>> matches(instance.support.size());
  for (std::size_t j = 0; j < instance.support.size(); ++j) {
    const auto& s = instance.support[j];
    for (std::size_t h = 0; h < cls.size(); ++h) {
      if (cls(h, s.x) == s.y) matches[j].push_back(h);
    }
  }
  return matches;
}

}  // namespace

void DenseSimplex::validate() const {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("dense distribution has a negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("dense distribution not normalized");
}

DenseSimplex DenseSimplex::vertex(std::size_t n, std::size_t h) {
  DenseSimplex p{std::vector<double>(n, 0.0)};
  p.weights.at(h) = 1.0;
  return p;
}

DenseSimplex DenseSimplex::uniform(std::size_t n) {
  return DenseSimplex{std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

DenseSimplex random_simplex(std::size_t n, Rng& rng) {
  DenseSimplex p{std::vector<double>(n)};
  double sum = 0.0;
  for (auto& w : p.weights) {
    w = -std::log(1.0 - rng.uniform()) + 1e-3;
    sum += w;
  }
  for (auto& w : p.weights) w /= sum;
  return p;
}

DenseSimplex random_sparse_simplex(std::size_t n, std::size_t support, Rng& rng) {
  support = std::clamp<std::size_t>(support, 1, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < support; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  DenseSimplex p{std::vector<double>(n, 0.0)};
  double sum = 0.0;
  for (std::size_t i = 0; i < support; ++i) {
    const double w = -std::log(1.0 - rng.uniform()) + 1e-3;
    p.weights[idx[i]] = w;
    sum += w;
  }
  for (auto& w : p.weights) w /= sum;
  return p;
}

std::vector<double> support_w_gamma(const Instance& instance, std::span<const double> p,
                                    double gamma) {
  guard(instance);
  check_dimension(instance, p);
  std::vector<double> w;
  w.reserve(instance.support.size());
  for (const auto& s : instance.support) {
    w.push_back(w_gamma_at(instance.hypotheses, p, s.x, s.y, gamma));
  }
  return w;
}

double exact_phi(const Instance& instance, std::span<const double> p, double gamma) {
  const auto w = support_w_gamma(instance, p, gamma);
  double value = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) value -= instance.support[j].p * std::log(w[j]);
  return value;
}

std::vector<double> exact_grad(const Instance& instance, std::span<const double> p,
                               double gamma) {
  const auto w = support_w_gamma(instance, p, gamma);
  const auto& cls = instance.hypotheses;
  std::vector<double> grad(cls.size(), 0.0);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const auto& s = instance.support[j];
    const double c = -(1.0 - gamma) * s.p / w[j];
    for (std::size_t h = 0; h < cls.size(); ++h) {
      if (cls(h, s.x) == s.y) grad[h] += c;
    }
  }
  return grad;
}

std::vector<double> sample_grad(const HypothesisClass& cls, std::span<const double> p,
                                std::size_t x, Label y, double gamma) {
  if (p.size() != cls.size()) throw ValidationError("dense distribution has the wrong dimension");
  const double c = -(1.0 - gamma) / w_gamma_at(cls, p, x, y, gamma);
  std::vector<double> grad(cls.size(), 0.0);
  for (std::size_t h = 0; h < cls.size(); ++h) {
    if (cls(h, x) == y) grad[h] = c;
  }
  return grad;
}

double max_variance_term(const Instance& instance, std::span<const double> p, double gamma) {
  const auto w = support_w_gamma(instance, p, gamma);
  const auto& cls = instance.hypotheses;
  std::vector<double> term(cls.size(), 0.0);
  for (std::size_t j = 0; j < w.size(); ++j) {
    const auto& s = instance.support[j];
    for (std::size_t h = 0; h < cls.size(); ++h) {
      if (cls(h, s.x) == s.y) term[h] += s.p / w[j];
    }
  }
  return *std::max_element(term.begin(), term.end());
}

double ratio_expectation(const Instance& instance, std::span<const double> p,
                         std::span<const double> q, double gamma) {
  const auto wp = support_w_gamma(instance, p, gamma);
  const auto wq = support_w_gamma(instance, q, gamma);
  double value = 0.0;
  for (std::size_t j = 0; j < wp.size(); ++j) value += instance.support[j].p * wp[j] / wq[j];
  return value;
}

double duality_gap(const Instance& instance, std::span<const double> p, double gamma) {
  const auto grad = exact_grad(instance, p, gamma);
  double inner = 0.0;
  for (std::size_t h = 0; h < grad.size(); ++h) inner += p[h] * grad[h];
  return inner - *std::min_element(grad.begin(), grad.end());
}

ExactMinimum exact_minimize_phi(const Instance& instance, double gamma, double tol) {
  guard(instance);
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
  constexpr std::size_t kMaxIterations = 10'000'000;

  const auto& cls = instance.hypotheses;
  const std::size_t n = cls.size();
  const std::size_t support = instance.support.size();
  const double floor = gamma / static_cast<double>(cls.num_labels());
  const auto matches = match_lists(instance);

  std::vector<double> p(n, 1.0 / static_cast<double>(n));
  std::vector<double> w(support), grad(n);
  std::vector<std::size_t> moved;
  std::vector<double> delta;

  ExactMinimum result;
  for (std::size_t it = 0;; ++it) {
    for (std::size_t j = 0; j < support; ++j) {
      double acc = 0.0;
      for (std::size_t h : matches[j]) acc += p[h];
      w[j] = (1.0 - gamma) * acc + floor;
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t j = 0; j < support; ++j) {
      const double c = -(1.0 - gamma) * instance.support[j].p / w[j];
      for (std::size_t h : matches[j]) grad[h] += c;
    }

    std::size_t toward = 0;
    std::size_t away = n;
    double inner = 0.0;
    for (std::size_t h = 0; h < n; ++h) {
      if (grad[h] < grad[toward]) toward = h;
      if (p[h] > 0.0) {
        inner += p[h] * grad[h];
        if (away == n || grad[h] > grad[away]) away = h;
      }
    }
    const double gap = inner - grad[toward];
    if (gap <= tol || toward == away) {
      result.gap = std::max(gap, 0.0);
      result.iterations = it;
      break;
    }
    if (it >= kMaxIterations) throw GuardExceeded("exact minimizer hit its iteration cap");

    // Pairwise direction e_toward - e_away, feasible up to p[away].
    moved.clear();
    delta.clear();
    for (std::size_t j = 0; j < support; ++j) {
      const auto& s = instance.support[j];
      const double d = (cls(toward, s.x) == s.y ? 1.0 : 0.0) - (cls(away, s.x) == s.y ? 1.0 : 0.0);
      if (d != 0.0) {
        moved.push_back(j);
        delta.push_back((1.0 - gamma) * d);
      }
    }
    auto slope = [&](double step) {
      double v = 0.0;
      for (std::size_t k = 0; k < moved.size(); ++k) {
        v -= instance.support[moved[k]].p * delta[k] / (w[moved[k]] + step * delta[k]);
      }
      return v;
    };
    auto curvature = [&](double step) {
      double v = 0.0;
      for (std::size_t k = 0; k < moved.size(); ++k) {
        const double r = delta[k] / (w[moved[k]] + step * delta[k]);
        v += instance.support[moved[k]].p * r * r;
      }
      return v;
    };

    const double max_step = p[away];
    double step = max_step;
    if (slope(max_step) > 0.0) {
      // Safeguarded Newton on the convex 1-D restriction.
      double lo = 0.0, hi = max_step;
      step = 0.5 * max_step;
      for (int k = 0; k < 100 && hi - lo > 1e-18; ++k) {
        const double g = slope(step);
        if (g > 0.0) hi = step; else lo = step;
        const double c = curvature(step);
        double next = c > 0.0 ? step - g / c : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - step) <= 1e-17 * max_step) {
          step = next;
          break;
        }
        step = next;
      }
    }
    p[toward] += step;
    p[away] = step >= max_step ? 0.0 : p[away] - step;
  }

  double sum = 0.0;
  for (double v : p) sum += v;
  for (auto& v : p) v /= sum;
  result.point = DenseSimplex{std::move(p)};
  result.value = exact_phi(instance, result.point.weights, gamma);
  return result;
}

EstimatorMoments exact_estimator_moments(const Instance& instance, std::span<const double> p,
                                         double gamma, std::size_t h) {
  guard(instance);
  check_dimension(instance, p);
  const auto& cls = instance.hypotheses;
  if (h >= cls.size()) throw ValidationError("hypothesis index out of range");
  const std::size_t k = cls.num_labels();

  EstimatorMoments moments;
  for (const auto& s : instance.support) {
    // Every way the prediction can arise: a uniform label, or a hypothesis
    // drawn from P.
    auto accumulate = [&](double branch_prob, Label prediction) {
      if (branch_prob == 0.0 || prediction != s.y || cls(h, s.x) != prediction) return;
      const double x_value = 1.0 / w_gamma_at(cls, p, s.x, prediction, gamma);
      moments.mean += s.p * branch_prob * x_value;
      moments.second_moment += s.p * branch_prob * x_value * x_value;
    };
    for (Label y_hat = 0; y_hat < k; ++y_hat) accumulate(gamma / static_cast<double>(k), y_hat);
    for (std::size_t g = 0; g < cls.size(); ++g) accumulate((1.0 - gamma) * p[g], cls(g, s.x));
  }
  return moments;
}

double reward(const Instance& instance, std::size_t h) {
  double r = 0.0;
  for (const auto& s : instance.support) {
    if (instance.hypotheses(h, s.x) == s.y) r += s.p;
  }
  return r;
}

double excess_loss(const Instance& instance, std::size_t h) {
  const auto& cls = instance.hypotheses;
  if (h >= cls.size()) throw ValidationError("hypothesis index out of range");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < cls.size(); ++g) best = std::min(best, 1.0 - reward(instance, g));
  return (1.0 - reward(instance, h)) - best;
}

std::size_t brute_force_erm(const HypothesisClass& cls,
                            std::span<const WeightedExample> examples) {
  std::vector<double> losses(cls.size(), 0.0);
  for (std::size_t h = 0; h < cls.size(); ++h) {
    for (const auto& e : examples) {
      if (cls(h, e.x) != e.y) losses[h] += e.weight;
    }
  }
  return static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) -
                                  losses.begin());
}

std::size_t brute_force_ledger_argmin(const HypothesisClass& cls, const GradientLedger& ledger) {
  std::vector<double> values(cls.size(), 0.0);
  for (std::size_t h = 0; h < cls.size(); ++h) {
    for (const auto& t : ledger.terms()) {
      if (cls(h, t.x) == t.y) values[h] += t.coeff;
    }
  }
  return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) -
                                  values.begin());
}

double disagreement(const Instance& instance, std::size_t h1, std::size_t h2) {
  const auto marginal = instance.example_marginal();
  double d = 0.0;
  for (std::size_t x = 0; x < marginal.size(); ++x) {
    if (instance.hypotheses(h1, x) != instance.hypotheses(h2, x)) d += marginal[x];
  }
  return d;
}

std::vector<LabeledExample> sample_dataset(const Instance& instance, std::size_t n, Rng& rng) {
  std::vector<double> cdf;
  cdf.reserve(instance.support.size());
  double total = 0.0;
  for (const auto& s : instance.support) cdf.push_back(total += s.p);
  std::vector<LabeledExample> out(n);
  for (auto& e : out) {
    const double u = rng.uniform() * total;
    auto j = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    j = std::min(j, cdf.size() - 1);
    e = {instance.support[j].x, instance.support[j].y};
  }
  return out;
}

}  // namespace bpac::reference
