#include "bpac/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

#include "bpac/errors.hpp"
#include "bpac/rng.hpp"

namespace bpac {

HypothesisClass::HypothesisClass(std::size_t num_labels, std::size_t num_hypotheses,
                                 std::size_t num_examples, std::vector<Label> table)
    : num_labels_(num_labels),
      num_hypotheses_(num_hypotheses),
      num_examples_(num_examples),
      table_(std::move(table)) {
  if (num_hypotheses_ == 0) throw ValidationError("hypothesis class is empty");
  if (num_examples_ == 0) throw ValidationError("hypothesis class has no examples");
  if (table_.size() != num_hypotheses_ * num_examples_) {
    throw ValidationError("hypothesis table has " + std::to_string(table_.size()) +
                          " entries, expected " +
                          std::to_string(num_hypotheses_ * num_examples_));
  }
}

HypothesisClass HypothesisClass::from_rows(std::size_t num_labels,
                                           const std::vector<std::vector<Label>>& rows) {
  if (rows.empty()) throw ValidationError("hypothesis class is empty");
  const std::size_t m = rows.front().size();
  std::vector<Label> table;
  table.reserve(rows.size() * m);
  for (std::size_t h = 0; h < rows.size(); ++h) {
    if (rows[h].size() != m) {
      throw ValidationError("hypothesis row " + std::to_string(h) + " has " +
                            std::to_string(rows[h].size()) + " entries, expected " +
                            std::to_string(m));
    }
    table.insert(table.end(), rows[h].begin(), rows[h].end());
  }
  return HypothesisClass(num_labels, rows.size(), m, std::move(table));
}

HypothesisClass HypothesisClass::restrict_to(std::span<const std::size_t> rows) const {
  std::vector<Label> table;
  table.reserve(rows.size() * num_examples_);
  for (std::size_t h : rows) {
    if (h >= num_hypotheses_) throw ValidationError("hypothesis index out of range");
    const auto r = row(h);
    table.insert(table.end(), r.begin(), r.end());
  }
  return HypothesisClass(num_labels_, rows.size(), num_examples_, std::move(table));
}

std::vector<double> Instance::example_marginal() const {
  std::vector<double> marginal(num_examples(), 0.0);
  for (const auto& s : support) marginal.at(s.x) += s.p;
  return marginal;
}

std::vector<std::string> validate_instance(const Instance& instance) {
  std::vector<std::string> errors;
  const auto& cls = instance.hypotheses;
  const std::size_t k = cls.num_labels();
  if (k == 0) errors.emplace_back("label count K must be positive");

  for (std::size_t h = 0; h < cls.size(); ++h) {
    for (std::size_t x = 0; x < cls.num_examples(); ++x) {
      if (cls(h, x) >= k) {
        std::ostringstream msg;
        msg << "label out of range: hypotheses[" << h << "][" << x << "] = " << cls(h, x)
            << " with K = " << k;
        errors.push_back(msg.str());
      }
    }
  }

  if (instance.support.empty()) errors.emplace_back("support is empty");

  std::set<std::pair<std::size_t, Label>> seen;
  double total = 0.0;
  for (std::size_t i = 0; i < instance.support.size(); ++i) {
    const auto& s = instance.support[i];
    if (s.x >= cls.num_examples()) {
      errors.push_back("example index out of range: support[" + std::to_string(i) +
                       "].x = " + std::to_string(s.x));
    }
    if (s.y >= k) {
      errors.push_back("label out of range: support[" + std::to_string(i) +
                       "].y = " + std::to_string(s.y));
    }
    if (!(s.p > 0.0) || !std::isfinite(s.p)) {
      errors.push_back("probability not strictly positive: support[" + std::to_string(i) + "]");
    }
    if (!seen.emplace(s.x, s.y).second) {
      errors.push_back("duplicate support pair: support[" + std::to_string(i) + "]");
    }
    total += s.p;
  }
  if (!instance.support.empty() && std::abs(total - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "support not normalized: probabilities sum to " << total;
    errors.push_back(msg.str());
  }
  return errors;
}

void require_valid(const Instance& instance) {
  auto errors = validate_instance(instance);
  if (!errors.empty()) {
    std::string what = "invalid instance: " + errors.front();
    if (errors.size() > 1) what += " (+" + std::to_string(errors.size() - 1) + " more)";
    throw ValidationError(what, std::move(errors));
  }
}

namespace {

// Support for a planted row: (1 - noise) on the planted label, the rest split
// evenly over the other labels. Example mass is `example_mass` each.
void add_planted_support(std::vector<SupportPoint>& support, std::size_t x, Label correct,
                         std::size_t k, double noise, double example_mass) {
  support.push_back({x, correct, (1.0 - noise) * example_mass});
  if (noise > 0.0) {
    const double wrong = noise * example_mass / static_cast<double>(k - 1);
    for (Label y = 0; y < k; ++y) {
      if (y != correct) support.push_back({x, y, wrong});
    }
  }
}

}  // namespace

Instance make_planted_instance(const PlantedSpec& spec, std::uint64_t seed) {
  if (spec.num_hypotheses < 1) throw ValidationError("planted instance needs N >= 1");
  if (spec.num_labels < 2) throw ValidationError("planted instance needs K >= 2");
  if (spec.num_examples < 1) throw ValidationError("planted instance needs m >= 1");
  if (!(spec.noise >= 0.0 && spec.noise < 1.0)) {
    throw ValidationError("planted noise must lie in [0, 1)");
  }
  Rng rng(seed, Stream::kGenerator);
  const std::size_t m = spec.num_examples;
  const std::size_t k = spec.num_labels;

  std::vector<Label> table(spec.num_hypotheses * m);
  for (auto& entry : table) entry = static_cast<Label>(rng.below(k));

  std::vector<SupportPoint> support;
  const double example_mass = 1.0 / static_cast<double>(m);
  for (std::size_t x = 0; x < m; ++x) {
    add_planted_support(support, x, table[x], k, spec.noise, example_mass);
  }
  Instance instance{HypothesisClass(k, spec.num_hypotheses, m, std::move(table)),
                    std::move(support)};
  require_valid(instance);
  return instance;
}

Instance make_duplicated_instance(const DuplicatedSpec& spec, std::uint64_t seed) {
  if (spec.support_examples < 1) throw ValidationError("need at least one support example");
  if (spec.num_labels < 2) throw ValidationError("duplicated instance needs K >= 2");
  if (spec.distinct_behaviours < 1 || spec.distinct_behaviours > spec.num_hypotheses) {
    throw ValidationError("distinct behaviours must lie in [1, N]");
  }
  if (!(spec.noise >= 0.0 && spec.noise < 1.0)) {
    throw ValidationError("noise must lie in [0, 1)");
  }
  Rng rng(seed, Stream::kGenerator);
  const std::size_t k = spec.num_labels;
  const std::size_t on = spec.support_examples;
  const std::size_t m = on + spec.offsupport_examples;

  std::vector<std::vector<Label>> behaviours(spec.distinct_behaviours, std::vector<Label>(on));
  for (auto& b : behaviours) {
    for (auto& label : b) label = static_cast<Label>(rng.below(k));
  }

  std::vector<Label> table(spec.num_hypotheses * m);
  for (std::size_t h = 0; h < spec.num_hypotheses; ++h) {
    // The first `distinct_behaviours` rows cover every behaviour once; the
    // rest are copies that differ only off the support.
    const std::size_t b = h < spec.distinct_behaviours ? h : rng.below(spec.distinct_behaviours);
    for (std::size_t x = 0; x < on; ++x) table[h * m + x] = behaviours[b][x];
    for (std::size_t x = on; x < m; ++x) table[h * m + x] = static_cast<Label>(rng.below(k));
  }

  // Uneven example masses so that a finite sample can miss light examples.
  std::vector<double> mass(on);
  double total = 0.0;
  for (auto& w : mass) {
    w = 0.25 + rng.uniform();
    total += w;
  }
  std::vector<SupportPoint> support;
  for (std::size_t x = 0; x < on; ++x) {
    add_planted_support(support, x, table[x], k, spec.noise, mass[x] / total);
  }
  // Absorb rounding so the probabilities sum to one.
  double sum = 0.0;
  for (const auto& s : support) sum += s.p;
  support.front().p += 1.0 - sum;

  Instance instance{HypothesisClass(k, spec.num_hypotheses, m, std::move(table)),
                    std::move(support)};
  require_valid(instance);
  return instance;
}

Instance make_random_instance(const RandomSpec& spec, std::uint64_t seed) {
  const std::size_t m = spec.num_examples;
  const std::size_t k = spec.num_labels;
  if (m < 1 || k < 1 || spec.num_hypotheses < 1) {
    throw ValidationError("random instance needs m, K, N >= 1");
  }
  if (spec.support_points < 1 || spec.support_points > m * k) {
    throw ValidationError("random instance support must lie in [1, m K]");
  }
  Rng rng(seed, Stream::kGenerator);
  std::vector<Label> table(spec.num_hypotheses * m);
  for (auto& entry : table) entry = static_cast<Label>(rng.below(k));

  // Partial Fisher-Yates over all m K pairs.
  std::vector<std::size_t> pairs(m * k);
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i] = i;
  for (std::size_t i = 0; i < spec.support_points; ++i) {
    std::swap(pairs[i], pairs[i + rng.below(pairs.size() - i)]);
  }
  std::sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(spec.support_points));

  std::vector<SupportPoint> support;
  double total = 0.0;
  for (std::size_t i = 0; i < spec.support_points; ++i) {
    const double w = 0.05 + rng.uniform();
    support.push_back({pairs[i] / k, static_cast<Label>(pairs[i] % k), w});
    total += w;
  }
  double sum = 0.0;
  for (auto& s : support) {
    s.p /= total;
    sum += s.p;
  }
  support.front().p += 1.0 - sum;

  Instance instance{HypothesisClass(k, spec.num_hypotheses, m, std::move(table)),
                    std::move(support)};
  require_valid(instance);
  return instance;
}

double hypothesis_loss(const Instance& instance, std::size_t h) {
  if (h >= instance.hypotheses.size()) {
    throw ValidationError("hypothesis index " + std::to_string(h) + " out of range");
  }
  double loss = 0.0;
  for (const auto& s : instance.support) {
    if (instance.hypotheses(h, s.x) != s.y) loss += s.p;
  }
  return loss;
}

BestHypothesis best_hypothesis(const Instance& instance) {
  BestHypothesis best{0, hypothesis_loss(instance, 0)};
  for (std::size_t h = 1; h < instance.hypotheses.size(); ++h) {
    const double loss = hypothesis_loss(instance, h);
    if (loss < best.loss) best = {h, loss};
  }
  return best;
}

}  // namespace bpac
