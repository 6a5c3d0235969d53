#include <algorithm>
#include <set>
#include <string>

#include "doctest.h"

#include "bpac/core.hpp"
#include "bpac/errors.hpp"
#include "fixtures.hpp"

using namespace bpac;

namespace {

bool has_error(const std::vector<std::string>& errors, const std::string& needle) {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const std::string& e) { return e.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("hypothesis class shape checks") {
  CHECK_THROWS_AS(HypothesisClass(2, 2, 3, {0, 1, 0}), ValidationError);
  CHECK_THROWS_AS(HypothesisClass(2, 0, 3, {}), ValidationError);
  CHECK_THROWS_AS(HypothesisClass::from_rows(2, {{0, 1}, {1}}), ValidationError);
  const auto cls = HypothesisClass::from_rows(3, {{0, 1}, {2, 2}, {1, 0}});
  CHECK(cls.size() == 3);
  CHECK(cls.num_examples() == 2);
  CHECK(cls(1, 0) == 2);
  CHECK(cls(2, 1) == 0);
  const std::vector<std::size_t> keep{2, 0};
  const auto sub = cls.restrict_to(keep);
  CHECK(sub.size() == 2);
  CHECK(sub(0, 0) == 1);
  CHECK(sub(1, 1) == 1);
}

TEST_CASE("planted instance: single hypothesis without noise") {
  const auto inst = make_planted_instance({1, 2, 1, 0.0}, 7);
  CHECK(validate_instance(inst).empty());
  CHECK(hypothesis_loss(inst, 0) == 0.0);
}

TEST_CASE("planted instance: loss of h0 equals the noise level") {
  const auto inst = make_planted_instance({4, 3, 10, 0.2}, 1);
  CHECK(validate_instance(inst).empty());
  CHECK(hypothesis_loss(inst, 0) == doctest::Approx(0.2).epsilon(1e-12));
  // Examples are uniform.
  for (double p : inst.example_marginal()) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("planted generator is deterministic and validates across parameters") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PlantedSpec spec{1 + seed % 7, 2 + seed % 4, 1 + seed % 13, (seed % 3) * 0.15};
    const auto a = make_planted_instance(spec, seed);
    const auto b = make_planted_instance(spec, seed);
    CHECK(a == b);
    CHECK(validate_instance(a).empty());
    CHECK(hypothesis_loss(a, 0) == doctest::Approx(spec.noise).epsilon(1e-12));
  }
  CHECK(make_planted_instance({5, 3, 10, 0.1}, 1) != make_planted_instance({5, 3, 10, 0.1}, 2));
}

TEST_CASE("planted generator rejects bad parameters") {
  CHECK_THROWS_AS(make_planted_instance({1, 1, 1, 0.0}, 0), ValidationError);
  CHECK_THROWS_AS(make_planted_instance({1, 2, 0, 0.0}, 0), ValidationError);
  CHECK_THROWS_AS(make_planted_instance({0, 2, 1, 0.0}, 0), ValidationError);
  CHECK_THROWS_AS(make_planted_instance({1, 2, 1, 1.0}, 0), ValidationError);
  CHECK_THROWS_AS(make_planted_instance({1, 2, 1, -0.1}, 0), ValidationError);
}

TEST_CASE("hypothesis_loss special cases") {
  const auto realizable = testing::point_mass(3, 2, 1, 2, {{0, 2}, {1, 1}});
  CHECK(hypothesis_loss(realizable, 0) == 0.0);
  CHECK(hypothesis_loss(realizable, 1) == 1.0);
  CHECK_THROWS_AS(hypothesis_loss(realizable, 2), ValidationError);

  // Labels independent of the single hypothesis: loss 1/2.
  const Instance coin{HypothesisClass::from_rows(2, {{0, 0}}),
                      {{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}}};
  CHECK(hypothesis_loss(coin, 0) == 0.5);
}

TEST_CASE("best_hypothesis matches an exhaustive scan") {
  const auto single = make_planted_instance({3, 2, 1, 0.3}, 4);
  CHECK(best_hypothesis(single).index == 0);
  CHECK(best_hypothesis(single).loss == doctest::Approx(0.3));

  const auto planted = make_planted_instance({6, 3, 40, 0.0}, 9);
  CHECK(best_hypothesis(planted).index == 0);
  CHECK(best_hypothesis(planted).loss == 0.0);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = make_random_instance({5, 3, 1 + seed * 3, 8}, seed);
    std::size_t arg = 0;
    double best = 2.0;
    for (std::size_t h = 0; h < inst.hypotheses.size(); ++h) {
      double loss = 0.0;
      for (const auto& s : inst.support) loss += inst.hypotheses(h, s.x) != s.y ? s.p : 0.0;
      CHECK(loss >= 0.0);
      CHECK(loss <= 1.0 + 1e-12);
      if (loss < best) {
        best = loss;
        arg = h;
      }
    }
    const auto got = best_hypothesis(inst);
    CHECK(got.index == arg);
    CHECK(got.loss == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("best_hypothesis breaks ties by lowest index") {
  const Instance inst{HypothesisClass::from_rows(2, {{1}, {0}, {0}}), {{0, 0, 1.0}}};
  CHECK(best_hypothesis(inst).index == 1);
}

TEST_CASE("validate_instance reports every violation") {
  auto inst = make_planted_instance({3, 2, 2, 0.0}, 0);
  CHECK(validate_instance(inst).empty());

  auto unnormalized = inst;
  for (auto& s : unnormalized.support) s.p *= 0.9;
  CHECK(has_error(validate_instance(unnormalized), "support not normalized"));

  auto bad_label = inst;
  bad_label.support[0].y = 2;
  CHECK(has_error(validate_instance(bad_label), "label out of range"));

  const Instance bad_table{HypothesisClass(2, 1, 1, {2}), {{0, 0, 1.0}}};
  CHECK(has_error(validate_instance(bad_table), "label out of range"));

  auto dup = inst;
  dup.support.push_back(dup.support[0]);
  dup.support[0].p /= 2;
  dup.support.back().p /= 2;
  CHECK(has_error(validate_instance(dup), "duplicate support pair"));

  auto bad_x = inst;
  bad_x.support[1].x = 3;
  CHECK(has_error(validate_instance(bad_x), "example index out of range"));

  auto zero_p = inst;
  zero_p.support[0].p = 0.0;
  zero_p.support[1].p += 1.0 / 3.0;
  CHECK(has_error(validate_instance(zero_p), "probability not strictly positive"));

  auto empty = inst;
  empty.support.clear();
  CHECK(has_error(validate_instance(empty), "support is empty"));

  // Several problems at once are all listed.
  auto many = inst;
  many.support[0].y = 5;
  many.support[1].x = 9;
  CHECK(validate_instance(many).size() >= 2);
  CHECK_THROWS_AS(require_valid(many), ValidationError);
  try {
    require_valid(many);
  } catch (const ValidationError& e) {
    CHECK(e.details().size() == validate_instance(many).size());
  }
}

TEST_CASE("duplicated instance structure") {
  const DuplicatedSpec spec{6, 5, 3, 7, 120, 0.1};
  const auto inst = make_duplicated_instance(spec, 3);
  CHECK(validate_instance(inst).empty());
  CHECK(inst.num_examples() == 11);
  CHECK(hypothesis_loss(inst, 0) == doctest::Approx(0.1).epsilon(1e-9));
  std::set<std::vector<Label>> on_support, full;
  for (std::size_t h = 0; h < inst.hypotheses.size(); ++h) {
    const auto row = inst.hypotheses.row(h);
    on_support.emplace(row.begin(), row.begin() + 6);
    full.emplace(row.begin(), row.end());
  }
  CHECK(on_support.size() <= 7);
  CHECK(full.size() > on_support.size());
  // Off-support examples carry no mass.
  const auto marginal = inst.example_marginal();
  for (std::size_t x = 6; x < 11; ++x) CHECK(marginal[x] == 0.0);
}

TEST_CASE("random instance has the requested support") {
  const auto inst = make_random_instance({4, 3, 10, 6}, 11);
  CHECK(validate_instance(inst).empty());
  CHECK(inst.support.size() == 6);
  CHECK_THROWS_AS(make_random_instance({2, 2, 3, 5}, 0), ValidationError);
  CHECK(make_random_instance({4, 3, 10, 6}, 11) == inst);
}
