#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bpac/core.hpp"

namespace bpac {

/// One entry of a weighted-ERM query: mismatching (x, y) costs `weight`.
struct WeightedExample {
  std::size_t x = 0;
  Label y = 0;
  double weight = 0.0;
};

/// Exact weighted ERM: argmin_h sum_s weight_s * 1{h(x_s) != y_s}, by full
/// enumeration of the class. Ties go to the lowest index; an empty query
/// returns 0. Enumeration over hypotheses runs in parallel when large enough;
/// the (loss, index) reduction keeps the answer identical to the serial scan.
/// Throws ValidationError on x >= m, y >= K, or a non-finite weight.
std::size_t weighted_erm(const HypothesisClass& cls, std::span<const WeightedExample> examples);

/// Weighted mismatch count of one hypothesis.
double weighted_loss(const HypothesisClass& cls, std::span<const WeightedExample> examples,
                     std::size_t h);

namespace serial {
/// Single-threaded twin of bpac::weighted_erm, kept for cross-checks and
/// benchmarking.
std::size_t weighted_erm(const HypothesisClass& cls, std::span<const WeightedExample> examples);
}  // namespace serial

/// Oracle seam. The learner and optimizer only see hypotheses through this
/// interface; structured classes can plug in their own argmin.
class ErmOracle {
 public:
  virtual ~ErmOracle() = default;

  std::size_t operator()(std::span<const WeightedExample> examples) {
    ++calls_;
    return argmin(examples);
  }

  std::uint64_t calls() const { return calls_; }
  virtual const HypothesisClass& hypotheses() const = 0;

 protected:
  virtual std::size_t argmin(std::span<const WeightedExample> examples) = 0;

 private:
  std::uint64_t calls_ = 0;
};

/// Oracle backed by exhaustive enumeration of an explicit class. Holds a
/// reference; the class must outlive the oracle.
class EnumerationOracle final : public ErmOracle {
 public:
  explicit EnumerationOracle(const HypothesisClass& cls) : cls_(cls) {}

  const HypothesisClass& hypotheses() const override { return cls_; }

 protected:
  std::size_t argmin(std::span<const WeightedExample> examples) override {
    return weighted_erm(cls_, examples);
  }

 private:
  const HypothesisClass& cls_;
};

struct LedgerTerm {
  std::size_t x = 0;
  Label y = 0;
  double coeff = 0.0;
};

/// Implicit linear functional over hypotheses:
///   g(h) = sum_j coeff_j * 1{h(x_j) = y_j}.
/// Terms are appended as-is; compact() merges repeated (x, y) keys.
class GradientLedger {
 public:
  void append(std::size_t x, Label y, double coeff) { terms_.push_back({x, y, coeff}); }
  void clear() { terms_.clear(); }
  /// Merges duplicate keys, ordering terms by (x, y). Per-key sums follow
  /// append order, so compaction is deterministic.
  void compact();

  std::span<const LedgerTerm> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

 private:
  std::vector<LedgerTerm> terms_;
};

/// g(h) for one hypothesis, in O(|terms|).
double evaluate_ledger(const GradientLedger& ledger, const HypothesisClass& cls, std::size_t h);

/// argmin_h g(h) through one oracle call: argmin sum c_j 1{h(x_j)=y_j} equals
/// argmin sum (-c_j) 1{h(x_j) != y_j}, a weighted-ERM query with weights -c_j.
std::size_t loo_from_ledger(ErmOracle& oracle, const GradientLedger& ledger);

}  // namespace bpac
