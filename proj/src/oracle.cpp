#include "bpac/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bpac/errors.hpp"

namespace bpac {

namespace {

// Below this many table lookups the thread fork costs more than it saves.
constexpr std::size_t kParallelWork = std::size_t{1} << 15;

void check_query(const HypothesisClass& cls, std::span<const WeightedExample> examples) {
  for (const auto& e : examples) {
    if (e.x >= cls.num_examples()) {
      throw ValidationError("weighted example index " + std::to_string(e.x) + " out of range");
    }
    if (e.y >= cls.num_labels()) {
      throw ValidationError("weighted example label " + std::to_string(e.y) + " out of range");
    }
    if (!std::isfinite(e.weight)) throw ValidationError("weighted example weight not finite");
  }
}

double loss_unchecked(const HypothesisClass& cls, std::span<const WeightedExample> examples,
                      std::size_t h) {
  const auto row = cls.row(h);
  double loss = 0.0;
  for (const auto& e : examples) {
    if (row[e.x] != e.y) loss += e.weight;
  }
  return loss;
}

struct Candidate {
  double loss;
  std::size_t index;

  bool beats(const Candidate& other) const {
    return loss < other.loss || (loss == other.loss && index < other.index);
  }
};

std::size_t serial_scan(const HypothesisClass& cls, std::span<const WeightedExample> examples) {
  Candidate best{loss_unchecked(cls, examples, 0), 0};
  for (std::size_t h = 1; h < cls.size(); ++h) {
    const Candidate c{loss_unchecked(cls, examples, h), h};
    if (c.beats(best)) best = c;
  }
  return best.index;
}

}  // namespace

std::size_t weighted_erm(const HypothesisClass& cls, std::span<const WeightedExample> examples) {
  check_query(cls, examples);
  if (examples.empty()) return 0;
  const std::size_t n = cls.size();
  if (n * examples.size() < kParallelWork) return serial_scan(cls, examples);

  Candidate best{std::numeric_limits<double>::infinity(), n};
#pragma omp parallel
  {
    Candidate local{std::numeric_limits<double>::infinity(), n};
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t h = 0; h < static_cast<std::ptrdiff_t>(n); ++h) {
      const Candidate c{loss_unchecked(cls, examples, static_cast<std::size_t>(h)),
                        static_cast<std::size_t>(h)};
      if (c.beats(local)) local = c;
    }
#pragma omp critical(bpac_erm_reduce)
    {
      if (local.beats(best)) best = local;
    }
  }
  return best.index;
}

double weighted_loss(const HypothesisClass& cls, std::span<const WeightedExample> examples,
                     std::size_t h) {
  if (h >= cls.size()) throw ValidationError("hypothesis index out of range");
  check_query(cls, examples);
  return loss_unchecked(cls, examples, h);
}

namespace serial {
std::size_t weighted_erm(const HypothesisClass& cls, std::span<const WeightedExample> examples) {
  check_query(cls, examples);
  if (examples.empty()) return 0;
  return serial_scan(cls, examples);
}
}  // namespace serial

void GradientLedger::compact() {
  std::stable_sort(terms_.begin(), terms_.end(), [](const LedgerTerm& a, const LedgerTerm& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  std::vector<LedgerTerm> merged;
  merged.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().x == t.x && merged.back().y == t.y) {
      merged.back().coeff += t.coeff;
    } else {
      merged.push_back(t);
    }
  }
  terms_ = std::move(merged);
}

double evaluate_ledger(const GradientLedger& ledger, const HypothesisClass& cls, std::size_t h) {
  if (h >= cls.size()) throw ValidationError("hypothesis index out of range");
  const auto row = cls.row(h);
  double value = 0.0;
  for (const auto& t : ledger.terms()) {
    if (t.x >= cls.num_examples()) throw ValidationError("ledger example index out of range");
    if (row[t.x] == t.y) value += t.coeff;
  }
  return value;
}

std::size_t loo_from_ledger(ErmOracle& oracle, const GradientLedger& ledger) {
  std::vector<WeightedExample> query;
  query.reserve(ledger.size());
  for (const auto& t : ledger.terms()) query.push_back({t.x, t.y, -t.coeff});
  return oracle(query);
}

}  // namespace bpac
