#include <cmath>
#include <vector>

#include "doctest.h"

#include "bpac/errors.hpp"
#include "bpac/logbarrier.hpp"
#include "bpac/oracle.hpp"
#include "bpac/reference.hpp"
#include "bpac/rng.hpp"

using namespace bpac;

namespace {

HypothesisClass random_class(Rng& rng, std::size_t k, std::size_t n, std::size_t m) {
  std::vector<Label> table(n * m);
  for (auto& v : table) v = static_cast<Label>(rng.below(k));
  return HypothesisClass(k, n, m, std::move(table));
}

std::vector<WeightedExample> random_query(Rng& rng, const HypothesisClass& cls, std::size_t size,
                                          bool allow_negative) {
  std::vector<WeightedExample> q(size);
  for (auto& e : q) {
    e.x = rng.below(cls.num_examples());
    e.y = static_cast<Label>(rng.below(cls.num_labels()));
    // Coarse weights make exact ties common.
    e.weight = static_cast<double>(rng.below(4)) - (allow_negative ? 1.5 : 0.0);
  }
  return q;
}

}  // namespace

TEST_CASE("weighted ERM on the worked example") {
  const auto cls = HypothesisClass::from_rows(3, {{1, 1}, {1, 2}, {2, 2}});
  const std::vector<WeightedExample> q{{0, 1, 1.0}, {1, 2, 2.0}};
  CHECK(weighted_loss(cls, q, 0) == 2.0);
  CHECK(weighted_loss(cls, q, 1) == 0.0);
  CHECK(weighted_loss(cls, q, 2) == 1.0);
  CHECK(weighted_erm(cls, q) == 1);
}

TEST_CASE("weighted ERM edge cases") {
  const auto cls = HypothesisClass::from_rows(3, {{0, 1}, {2, 1}, {2, 0}});
  CHECK(weighted_erm(cls, {}) == 0);
  const std::vector<WeightedExample> zero{{0, 2, 0.0}, {1, 0, 0.0}};
  CHECK(weighted_erm(cls, zero) == 0);
  const std::vector<WeightedExample> single{{0, 2, 1.0}};
  CHECK(weighted_erm(cls, single) == 1);

  const std::vector<WeightedExample> bad_x{{2, 0, 1.0}};
  const std::vector<WeightedExample> bad_y{{0, 3, 1.0}};
  const std::vector<WeightedExample> bad_w{{0, 0, std::nan("")}};
  const std::vector<WeightedExample> inf_w{{0, 0, INFINITY}};
  CHECK_THROWS_AS(weighted_erm(cls, bad_x), ValidationError);
  CHECK_THROWS_AS(weighted_erm(cls, bad_y), ValidationError);
  CHECK_THROWS_AS(weighted_erm(cls, bad_w), ValidationError);
  CHECK_THROWS_AS(weighted_erm(cls, inf_w), ValidationError);
}

TEST_CASE("weighted ERM agrees with the independent brute force") {
  Rng rng(1, Stream::kTest);
  for (int trial = 0; trial < 300; ++trial) {
    const auto cls = random_class(rng, 2 + rng.below(4), 1 + rng.below(50), 1 + rng.below(8));
    const auto q = random_query(rng, cls, rng.below(30), trial % 2 == 1);
    CHECK(weighted_erm(cls, q) == reference::brute_force_erm(cls, q));
    CHECK(serial::weighted_erm(cls, q) == reference::brute_force_erm(cls, q));
  }
}

TEST_CASE("parallel and serial ERM agree above the parallel threshold") {
  Rng rng(2, Stream::kTest);
  for (int trial = 0; trial < 5; ++trial) {
    const auto cls = random_class(rng, 3, 2000, 40);
    const auto q = random_query(rng, cls, 64, trial % 2 == 0);
    const auto a = weighted_erm(cls, q);
    CHECK(a == serial::weighted_erm(cls, q));
    CHECK(a == reference::brute_force_erm(cls, q));
  }
  // All-tied objective must still return index 0 under the parallel path.
  const auto cls = random_class(rng, 3, 4000, 10);
  const std::vector<WeightedExample> zero(20, WeightedExample{0, 0, 0.0});
  CHECK(weighted_erm(cls, zero) == 0);
}

TEST_CASE("oracle counts calls") {
  const auto cls = HypothesisClass::from_rows(2, {{0}, {1}});
  EnumerationOracle oracle(cls);
  CHECK(oracle.calls() == 0);
  const std::vector<WeightedExample> q{{0, 1, 1.0}};
  CHECK(oracle(q) == 1);
  CHECK(oracle(q) == 1);
  CHECK(oracle.calls() == 2);
  CHECK(&oracle.hypotheses() == &cls);
}

TEST_CASE("ledger evaluation") {
  const auto cls = HypothesisClass::from_rows(3, {{0, 1}, {2, 1}});
  GradientLedger ledger;
  CHECK(evaluate_ledger(ledger, cls, 0) == 0.0);
  ledger.append(1, 1, 3.5);
  CHECK(evaluate_ledger(ledger, cls, 0) == 3.5);
  ledger.append(0, 2, -1.0);
  CHECK(evaluate_ledger(ledger, cls, 0) == 3.5);
  CHECK(evaluate_ledger(ledger, cls, 1) == 2.5);
  CHECK_THROWS_AS(evaluate_ledger(ledger, cls, 2), ValidationError);
}

TEST_CASE("LOO from ledger: sign analysis and ties") {
  const auto cls = HypothesisClass::from_rows(3, {{1}, {0}, {2}, {0}});
  EnumerationOracle oracle(cls);
  GradientLedger ledger;
  CHECK(loo_from_ledger(oracle, ledger) == 0);
  ledger.append(0, 0, -2.0);
  CHECK(loo_from_ledger(oracle, ledger) == 1);
  // A positive coefficient pushes away from agreeing hypotheses.
  GradientLedger positive;
  positive.append(0, 1, 1.0);
  CHECK(loo_from_ledger(oracle, positive) == 1);
  CHECK(oracle.calls() == 3);
}

TEST_CASE("LOO from ledger matches brute-force argmin of g") {
  Rng rng(3, Stream::kTest);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto cls = random_class(rng, 2 + rng.below(4), 1 + rng.below(50), 1 + rng.below(6));
    EnumerationOracle oracle(cls);
    GradientLedger ledger;
    const auto terms = rng.below(25);
    for (std::uint64_t j = 0; j < terms; ++j) {
      ledger.append(rng.below(cls.num_examples()), static_cast<Label>(rng.below(cls.num_labels())),
                    static_cast<double>(rng.below(5)) - 2.0);
    }
    mismatches += loo_from_ledger(oracle, ledger) != reference::brute_force_ledger_argmin(cls, ledger);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("compaction merges keys without changing g") {
  Rng rng(4, Stream::kTest);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cls = random_class(rng, 3, 20, 4);
    GradientLedger ledger;
    for (int j = 0; j < 100; ++j) {
      ledger.append(rng.below(4), static_cast<Label>(rng.below(3)), rng.uniform() - 0.5);
    }
    GradientLedger compacted = ledger;
    compacted.compact();
    CHECK(compacted.size() <= 12);
    for (std::size_t i = 1; i < compacted.size(); ++i) {
      const auto& a = compacted.terms()[i - 1];
      const auto& b = compacted.terms()[i];
      CHECK((a.x < b.x || (a.x == b.x && a.y < b.y)));
    }
    for (std::size_t h = 0; h < cls.size(); ++h) {
      CHECK(evaluate_ledger(compacted, cls, h) ==
            doctest::Approx(evaluate_ledger(ledger, cls, h)).epsilon(1e-12));
    }
    EnumerationOracle oracle(cls);
    CHECK(loo_from_ledger(oracle, compacted) == reference::brute_force_ledger_argmin(cls, compacted));
  }
}

TEST_CASE("ledger of averaged sample gradients equals the dense mean") {
  Rng rng(5, Stream::kTest);
  const auto inst = make_random_instance({5, 3, 12, 8}, 17);
  const auto& cls = inst.hypotheses;
  const double gamma = 0.5;
  const auto dense_p = reference::random_simplex(cls.size(), rng);
  const auto p = SparseSimplex::from_dense(dense_p.weights);
  const GammaConfig cfg{gamma, cls.num_labels()};
  const int k = 9;
  GradientLedger ledger;
  std::vector<double> mean(cls.size(), 0.0);
  for (int i = 0; i < k; ++i) {
    const auto& s = inst.support[rng.below(inst.support.size())];
    ledger.append(s.x, s.y, phi_grad_coeff(p, cls, s.x, s.y, cfg) / k);
    const auto g = reference::sample_grad(cls, dense_p.weights, s.x, s.y, gamma);
    for (std::size_t h = 0; h < cls.size(); ++h) mean[h] += g[h] / k;
  }
  for (std::size_t h = 0; h < cls.size(); ++h) {
    CHECK(std::abs(evaluate_ledger(ledger, cls, h) - mean[h]) <= 1e-12);
  }
}
