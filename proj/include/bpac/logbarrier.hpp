#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "bpac/core.hpp"

namespace bpac {

/// Probability distribution over hypothesis indices, stored as sorted
/// (index, weight) pairs with strictly positive weights.
class SparseSimplex {
 public:
  struct Entry {
    std::size_t index;
    double weight;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  SparseSimplex() = default;

  static SparseSimplex vertex(std::size_t h);
  /// Sorts, validates positivity and normalization (1e-9), rejects repeats.
  static SparseSimplex from_entries(std::vector<Entry> entries);
  /// Keeps the positive coordinates of a dense vector.
  static SparseSimplex from_dense(std::span<const double> weights);

  /// P <- (1 - eta) P + eta * delta_h. eta = 1 lands exactly on the vertex.
  void step_toward(std::size_t h, double eta);
  /// Drops weights below `threshold` and returns how many were dropped.
  /// Does not rescale; call renormalize() afterwards.
  std::size_t prune(double threshold);
  void renormalize();

  double weight(std::size_t h) const;
  double total() const;
  std::span<const Entry> entries() const { return entries_; }
  std::size_t support_size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::vector<double> to_dense(std::size_t n) const;
  /// Inverse-CDF draw of a hypothesis index for u in [0, 1).
  std::size_t sample(double u) const;

  friend bool operator==(const SparseSimplex&, const SparseSimplex&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Mixing weight of the uniform label distribution.
struct GammaConfig {
  double gamma = 0.5;
  std::size_t num_labels = 2;

  /// Throws ValidationError unless 0 < gamma <= 1 and K >= 1.
  void validate() const;
  /// Floor of W^gamma, gamma / K.
  double floor() const { return gamma / static_cast<double>(num_labels); }
};

/// W_P(x, y) = sum_h P(h) 1{h(x) = y}, over the sparse support.
double w_prob(const SparseSimplex& p, const HypothesisClass& cls, std::size_t x, Label y);

/// W_P(x, .) for every label at once, in O(|support|).
std::vector<double> label_distribution(const SparseSimplex& p, const HypothesisClass& cls,
                                       std::size_t x);

/// W^gamma_P(x, y) = (1 - gamma) W_P(x, y) + gamma / K.
double w_prob_gamma(const SparseSimplex& p, const HypothesisClass& cls, std::size_t x, Label y,
                    const GammaConfig& cfg);

/// phi(P; x, y) = -ln W^gamma_P(x, y).
double phi(const SparseSimplex& p, const HypothesisClass& cls, std::size_t x, Label y,
           const GammaConfig& cfg);

/// Coefficient c of the per-sample gradient: grad phi(P; x, y)(h) = c * 1{h(x) = y}
/// with c = -(1 - gamma) / W^gamma_P(x, y).
double phi_grad_coeff(const SparseSimplex& p, const HypothesisClass& cls, std::size_t x,
                      Label y, const GammaConfig& cfg);

/// Same coefficient from an already computed W_P(x, y).
inline double grad_coeff_from_w(double w, const GammaConfig& cfg) {
  return -(1.0 - cfg.gamma) / ((1.0 - cfg.gamma) * w + cfg.floor());
}

/// Memo of W_P(x, .) per example for one fixed distribution P. Must be
/// cleared whenever P changes.
class LabelCache {
 public:
  const std::vector<double>& at(const SparseSimplex& p, const HypothesisClass& cls,
                                std::size_t x);
  void clear() { rows_.clear(); }

 private:
  std::unordered_map<std::size_t, std::vector<double>> rows_;
};

/// Mean of phi over a dataset. Terms are evaluated in parallel and summed
/// in index order, so the value does not depend on the thread count.
/// Throws ValidationError on an empty dataset.
double phi_empirical(const SparseSimplex& p, const HypothesisClass& cls,
                     std::span<const LabeledExample> data, const GammaConfig& cfg);

namespace serial {
double phi_empirical(const SparseSimplex& p, const HypothesisClass& cls,
                     std::span<const LabeledExample> data, const GammaConfig& cfg);
}  // namespace serial

/// omega(z) = -ln z + z - 1, for z > 0.
double omega(double z);
/// min{(1 - z)^2 / 2, (z / 2)(1 - 1/z)^2}, a lower bound on omega.
double omega_lower_bound(double z);

}  // namespace bpac
