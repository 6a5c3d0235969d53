#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bpac {

/// Labels are 0-indexed: a K-label problem uses {0, ..., K-1}.
using Label = std::uint32_t;

/// An example index x in [0, m) paired with a label.
struct LabeledExample {
  std::size_t x = 0;
  Label y = 0;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Explicit finite hypothesis class: an N x m table whose (h, x) entry is h(x).
class HypothesisClass {
 public:
  /// `table` is row-major, one row of length `num_examples` per hypothesis.
  /// Throws ValidationError on an empty class or a shape mismatch. Label
  /// range is checked by validate_instance, not here.
  HypothesisClass(std::size_t num_labels, std::size_t num_hypotheses, std::size_t num_examples,
                  std::vector<Label> table);

  static HypothesisClass from_rows(std::size_t num_labels,
                                   const std::vector<std::vector<Label>>& rows);

  std::size_t num_labels() const { return num_labels_; }
  std::size_t size() const { return num_hypotheses_; }
  std::size_t num_examples() const { return num_examples_; }

  Label operator()(std::size_t h, std::size_t x) const { return table_[h * num_examples_ + x]; }
  std::span<const Label> row(std::size_t h) const {
    return {table_.data() + h * num_examples_, num_examples_};
  }
  const std::vector<Label>& table() const { return table_; }

  /// Subclass made of the listed rows, in the listed order.
  HypothesisClass restrict_to(std::span<const std::size_t> rows) const;

  friend bool operator==(const HypothesisClass&, const HypothesisClass&) = default;

 private:
  std::size_t num_labels_;
  std::size_t num_hypotheses_;
  std::size_t num_examples_;
  std::vector<Label> table_;
};

struct SupportPoint {
  std::size_t x = 0;
  Label y = 0;
  double p = 0.0;

  friend bool operator==(const SupportPoint&, const SupportPoint&) = default;
};

/// A finite joint distribution over (example, label) pairs together with the
/// hypothesis class being learned. Treated as immutable once built.
struct Instance {
  HypothesisClass hypotheses;
  std::vector<SupportPoint> support;

  std::size_t num_labels() const { return hypotheses.num_labels(); }
  std::size_t num_examples() const { return hypotheses.num_examples(); }

  /// Marginal probability of each example index.
  std::vector<double> example_marginal() const;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// All invariant violations of `instance`; empty when valid.
std::vector<std::string> validate_instance(const Instance& instance);

/// Throws ValidationError listing every violation.
void require_valid(const Instance& instance);

struct PlantedSpec {
  std::size_t num_examples = 1;
  std::size_t num_labels = 2;
  std::size_t num_hypotheses = 1;
  double noise = 0.0;
};

/// Uniform examples; hypothesis 0 is correct with probability exactly
/// 1 - noise on every example, the noise mass spread evenly over the K - 1
/// wrong labels. Other rows are uniformly random.
Instance make_planted_instance(const PlantedSpec& spec, std::uint64_t seed);

struct DuplicatedSpec {
  std::size_t support_examples = 8;  ///< examples carrying probability mass
  std::size_t offsupport_examples = 8;  ///< examples never drawn
  std::size_t num_labels = 3;
  std::size_t distinct_behaviours = 20;  ///< distinct rows on the support
  std::size_t num_hypotheses = 200;
  double noise = 0.0;
};

/// Planted instance whose class contains many hypotheses that coincide on the
/// support but differ off it. Row 0 is the planted hypothesis.
Instance make_duplicated_instance(const DuplicatedSpec& spec, std::uint64_t seed);

struct RandomSpec {
  std::size_t num_examples = 4;
  std::size_t num_labels = 3;
  std::size_t num_hypotheses = 10;
  std::size_t support_points = 6;  ///< distinct (x, y) pairs, at most m K
};

/// Uniformly random table and a random distribution over `support_points`
/// distinct (x, y) pairs.
Instance make_random_instance(const RandomSpec& spec, std::uint64_t seed);

/// L_D(h) = Pr[h(x) != y], summed exactly over the support.
double hypothesis_loss(const Instance& instance, std::size_t h);

struct BestHypothesis {
  std::size_t index = 0;
  double loss = 0.0;
};

/// Exact argmin of the loss; ties go to the lowest index.
BestHypothesis best_hypothesis(const Instance& instance);

}  // namespace bpac
