#include "bpac/logbarrier.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "bpac/errors.hpp"

namespace bpac {

namespace {

constexpr std::size_t kParallelTerms = 4096;

void check_index(const HypothesisClass& cls, std::size_t x, Label y) {
  if (x >= cls.num_examples()) throw ValidationError("example index out of range");
  if (y >= cls.num_labels()) throw ValidationError("label out of range");
}

void check_support(const SparseSimplex& p, const HypothesisClass& cls) {
  if (p.empty()) throw ValidationError("distribution has empty support");
  if (p.entries().back().index >= cls.size()) {
    throw ValidationError("distribution refers to a hypothesis outside the class");
  }
}

}  // namespace

SparseSimplex SparseSimplex::vertex(std::size_t h) {
  SparseSimplex p;
  p.entries_.push_back({h, 1.0});
  return p;
}

SparseSimplex SparseSimplex::from_entries(std::vector<Entry> entries) {
  if (entries.empty()) throw ValidationError("distribution has empty support");
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });
  double sum = 0.0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!(entries[i].weight > 0.0) || !std::isfinite(entries[i].weight)) {
      throw ValidationError("distribution weights must be positive and finite");
    }
    if (i > 0 && entries[i].index == entries[i - 1].index) {
      throw ValidationError("distribution lists a hypothesis twice");
    }
    sum += entries[i].weight;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("distribution weights do not sum to 1");
  SparseSimplex p;
  p.entries_ = std::move(entries);
  return p;
}

SparseSimplex SparseSimplex::from_dense(std::span<const double> weights) {
  std::vector<Entry> entries;
  for (std::size_t h = 0; h < weights.size(); ++h) {
    if (weights[h] > 0.0) entries.push_back({h, weights[h]});
  }
  return from_entries(std::move(entries));
}

void SparseSimplex::step_toward(std::size_t h, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("step size must lie in [0, 1]");
  if (eta == 1.0) {
    entries_.assign(1, {h, 1.0});
    return;
  }
  for (auto& e : entries_) e.weight *= 1.0 - eta;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), h,
                             [](const Entry& e, std::size_t idx) { return e.index < idx; });
  if (it != entries_.end() && it->index == h) {
    it->weight += eta;
  } else if (eta > 0.0) {
    entries_.insert(it, {h, eta});
  }
}

std::size_t SparseSimplex::prune(double threshold) {
  return std::erase_if(entries_, [threshold](const Entry& e) { return e.weight < threshold; });
}

void SparseSimplex::renormalize() {
  const double sum = total();
  if (!(sum > 0.0)) throw ValidationError("cannot renormalize an empty distribution");
  for (auto& e : entries_) e.weight /= sum;
}

double SparseSimplex::weight(std::size_t h) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), h,
                             [](const Entry& e, std::size_t idx) { return e.index < idx; });
  return it != entries_.end() && it->index == h ? it->weight : 0.0;
}

double SparseSimplex::total() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.weight;
  return sum;
}

std::vector<double> SparseSimplex::to_dense(std::size_t n) const {
  std::vector<double> dense(n, 0.0);
  for (const auto& e : entries_) dense.at(e.index) = e.weight;
  return dense;
}

std::size_t SparseSimplex::sample(double u) const {
  if (entries_.empty()) throw ValidationError("cannot sample an empty distribution");
  double acc = 0.0;
  const double target = u * total();
  for (const auto& e : entries_) {
    acc += e.weight;
    if (target < acc) return e.index;
  }
  return entries_.back().index;
}

void GammaConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValidationError("gamma must lie in (0, 1]");
  if (num_labels < 1) throw ValidationError("label count must be positive");
}

double w_prob(const SparseSimplex& p, const HypothesisClass& cls, std::size_t x, Label y) {
  check_index(cls, x, y);
  check_support(p, cls);
  double w = 0.0;
  for (const auto& e : p.entries()) {
    if (cls(e.index, x) == y) w += e.weight;
  }
  return w;
}

std::vector<double> label_distribution(const SparseSimplex& p, const HypothesisClass& cls,
                                       std::size_t x) {
  if (x >= cls.num_examples()) throw ValidationError("example index out of range");
  check_support(p, cls);
  std::vector<double> w(cls.num_labels(), 0.0);
  for (const auto& e : p.entries()) w[cls(e.index, x)] += e.weight;
  return w;
}

const std::vector<double>& LabelCache::at(const SparseSimplex& p, const HypothesisClass& cls,
                                          std::size_t x) {
  auto it = rows_.find(x);
  if (it == rows_.end()) it = rows_.emplace(x, label_distribution(p, cls, x)).first;
  return it->second;
}

double w_prob_gamma(const SparseSimplex& p, const HypothesisClass& cls, std::size_t x, Label y,
                    const GammaConfig& cfg) {
  cfg.validate();
  return (1.0 - cfg.gamma) * w_prob(p, cls, x, y) + cfg.floor();
}

double phi(const SparseSimplex& p, const HypothesisClass& cls, std::size_t x, Label y,
           const GammaConfig& cfg) {
  const double w = w_prob_gamma(p, cls, x, y, cfg);
  assert(w >= cfg.floor() * (1.0 - 1e-12));
  return -std::log(w);
}

double phi_grad_coeff(const SparseSimplex& p, const HypothesisClass& cls, std::size_t x,
                      Label y, const GammaConfig& cfg) {
  return -(1.0 - cfg.gamma) / w_prob_gamma(p, cls, x, y, cfg);
}

double phi_empirical(const SparseSimplex& p, const HypothesisClass& cls,
                     std::span<const LabeledExample> data, const GammaConfig& cfg) {
  if (data.empty()) throw ValidationError("phi_empirical needs a nonempty dataset");
  if (data.size() < kParallelTerms) return serial::phi_empirical(p, cls, data, cfg);
  cfg.validate();
  check_support(p, cls);
  for (const auto& s : data) check_index(cls, s.x, s.y);

  std::vector<double> terms(data.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i) {
    const auto& s = data[static_cast<std::size_t>(i)];
    double w = 0.0;
    for (const auto& e : p.entries()) {
      if (cls(e.index, s.x) == s.y) w += e.weight;
    }
    terms[static_cast<std::size_t>(i)] = -std::log((1.0 - cfg.gamma) * w + cfg.floor());
  }
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum / static_cast<double>(data.size());
}

namespace serial {
double phi_empirical(const SparseSimplex& p, const HypothesisClass& cls,
                     std::span<const LabeledExample> data, const GammaConfig& cfg) {
  if (data.empty()) throw ValidationError("phi_empirical needs a nonempty dataset");
  double sum = 0.0;
  for (const auto& s : data) sum += phi(p, cls, s.x, s.y, cfg);
  return sum / static_cast<double>(data.size());
}
}  // namespace serial

double omega(double z) {
  if (!(z > 0.0)) throw ValidationError("omega is defined for z > 0");
  return -std::log(z) + z - 1.0;
}

double omega_lower_bound(double z) {
  if (!(z > 0.0)) throw ValidationError("omega is defined for z > 0");
  const double below = 0.5 * (1.0 - z) * (1.0 - z);
  const double r = 1.0 - 1.0 / z;
  const double above = 0.5 * z * r * r;
  return std::min(below, above);
}

}  // namespace bpac
