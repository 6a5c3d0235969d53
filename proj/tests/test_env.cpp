#include <cmath>
#include <type_traits>

#include "doctest.h"

#include "bpac/env.hpp"
#include "bpac/errors.hpp"
#include "fixtures.hpp"

using namespace bpac;

TEST_CASE("point mass reveals its example and answers correctly") {
  const auto inst = testing::point_mass(5, 4, 3, 2, {{0, 0, 0, 0}});
  BanditEnv env(inst, 1);
  CHECK(env.sample_budget() == 0);
  CHECK(env.open_round() == 3);
  CHECK(env.round_open());
  CHECK(env.predict(2).correct);
  CHECK_FALSE(env.round_open());
  env.open_round();
  CHECK_FALSE(env.predict(4).correct);
  CHECK(env.sample_budget() == 2);
}

TEST_CASE("protocol discipline") {
  const auto inst = testing::symmetric_instance();
  BanditEnv env(inst, 0);
  CHECK_THROWS_AS(env.predict(0), ProtocolError);
  env.open_round();
  CHECK_THROWS_AS(env.open_round(), ProtocolError);
  CHECK_THROWS_AS(env.predict(2), ValidationError);
  CHECK(env.round_open());
  env.predict(1);
  CHECK(env.sample_budget() == 1);
}

TEST_CASE("sample meter counts opened rounds") {
  const auto inst = make_planted_instance({4, 3, 2, 0.1}, 0);
  BanditEnv env(inst, 5);
  for (int i = 0; i < 17; ++i) {
    env.open_round();
    env.predict(0);
  }
  CHECK(env.sample_budget() == 17);
  // An opened but unanswered round is already a sample.
  env.open_round();
  CHECK(env.sample_budget() == 18);
}

TEST_CASE("example frequencies follow the instance") {
  const Instance inst{HypothesisClass::from_rows(2, {{0, 0}}), {{0, 1, 0.25}, {1, 0, 0.75}}};
  BanditEnv env(inst, 11);
  const int n = 1000000;
  int ones = 0;
  for (int i = 0; i < n; ++i) {
    ones += env.open_round() == 1 ? 1 : 0;
    env.predict(0);
  }
  CHECK(std::abs(ones / static_cast<double>(n) - 0.75) < 0.01);
}

TEST_CASE("uniform guesses on uniform labels are right 1/K of the time") {
  const std::size_t k = 4;
  std::vector<SupportPoint> support;
  for (Label y = 0; y < k; ++y) support.push_back({0, y, 0.25});
  const Instance inst{HypothesisClass::from_rows(k, {{0}}), support};
  BanditEnv env(inst, 3);
  Rng guesses(3, Stream::kTest);
  const int n = 100000;
  int correct = 0;
  for (int i = 0; i < n; ++i) {
    env.open_round();
    correct += env.predict(static_cast<Label>(guesses.below(k))).correct ? 1 : 0;
  }
  CHECK(std::abs(correct / static_cast<double>(n) - 0.25) < 0.01);
}

TEST_CASE("same seed and predictions give the same feedback") {
  const auto inst = make_planted_instance({6, 3, 4, 0.3}, 2);
  BanditEnv a(inst, 9), b(inst, 9), c(inst, 10);
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    const auto xa = a.open_round();
    const auto xb = b.open_round();
    const auto xc = c.open_round();
    CHECK(xa == xb);
    const Label guess = static_cast<Label>(i % 3);
    CHECK(a.predict(guess).correct == b.predict(guess).correct);
    differs |= xa != xc;
    c.predict(guess);
  }
  CHECK(differs);
}

TEST_CASE("transcript records what the learner saw, never the label") {
  // The public record type carries exactly three fields: example,
  // prediction, and the correctness bit.
  static_assert(sizeof(TranscriptEntry) <= 3 * sizeof(std::size_t));
  static_assert(std::is_same_v<decltype(TranscriptEntry{}.correct), bool>);
  static_assert(std::is_same_v<decltype(Feedback{}.correct), bool>);
  static_assert(sizeof(Feedback) == sizeof(bool));

  const auto inst = testing::point_mass(3, 1, 0, 2, {{0}});
  BanditEnv env(inst, 0);
  env.record_transcript(true);
  env.open_round();
  env.predict(1);
  env.open_round();
  env.predict(2);
  REQUIRE(env.transcript().size() == 2);
  CHECK(env.transcript()[0].prediction == 1);
  CHECK_FALSE(env.transcript()[0].correct);
  CHECK(env.transcript()[1].correct);
}
