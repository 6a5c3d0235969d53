#include <cmath>
#include <vector>

#include "doctest.h"

#include "bpac/errors.hpp"
#include "bpac/logbarrier.hpp"
#include "bpac/reference.hpp"
#include "bpac/rng.hpp"
#include "fixtures.hpp"

using namespace bpac;

TEST_CASE("sparse simplex construction and validation") {
  const auto v = SparseSimplex::vertex(4);
  CHECK(v.support_size() == 1);
  CHECK(v.weight(4) == 1.0);
  CHECK(v.weight(0) == 0.0);

  const auto p = SparseSimplex::from_entries({{5, 0.25}, {1, 0.75}});
  CHECK(p.entries()[0].index == 1);
  CHECK(p.entries()[1].index == 5);
  CHECK(p.total() == 1.0);
  CHECK_THROWS_AS(SparseSimplex::from_entries({}), ValidationError);
  CHECK_THROWS_AS(SparseSimplex::from_entries({{0, 0.5}, {0, 0.5}}), ValidationError);
  CHECK_THROWS_AS(SparseSimplex::from_entries({{0, 0.5}, {1, 0.4}}), ValidationError);
  CHECK_THROWS_AS(SparseSimplex::from_entries({{0, 1.5}, {1, -0.5}}), ValidationError);

  const std::vector<double> dense{0.0, 0.5, 0.0, 0.5};
  const auto d = SparseSimplex::from_dense(dense);
  CHECK(d.support_size() == 2);
  CHECK(d.to_dense(4) == dense);
}

TEST_CASE("sparse simplex steps, pruning and sampling") {
  auto p = SparseSimplex::vertex(0);
  p.step_toward(2, 0.25);
  CHECK(p.weight(0) == 0.75);
  CHECK(p.weight(2) == 0.25);
  p.step_toward(0, 0.5);
  CHECK(p.weight(0) == doctest::Approx(0.875));
  CHECK(p.support_size() == 2);
  p.step_toward(7, 1.0);
  CHECK(p == SparseSimplex::vertex(7));
  CHECK_THROWS_AS(p.step_toward(1, 1.5), ValidationError);

  auto q = SparseSimplex::from_entries({{0, 1e-16}, {1, 1.0 - 1e-16}});
  CHECK(q.prune(1e-15) == 1);
  CHECK(q.support_size() == 1);
  q.renormalize();
  CHECK(q.total() == 1.0);

  const auto r = SparseSimplex::from_entries({{3, 0.25}, {8, 0.75}});
  CHECK(r.sample(0.0) == 3);
  CHECK(r.sample(0.2499) == 3);
  CHECK(r.sample(0.25) == 8);
  CHECK(r.sample(0.999999) == 8);
}

TEST_CASE("W_P examples") {
  const auto cls = HypothesisClass::from_rows(3, {{1, 0}, {2, 0}, {1, 1}});
  CHECK(w_prob(SparseSimplex::vertex(0), cls, 0, 1) == 1.0);
  CHECK(w_prob(SparseSimplex::vertex(0), cls, 0, 2) == 0.0);
  const auto half = SparseSimplex::from_entries({{0, 0.5}, {1, 0.5}});
  CHECK(w_prob(half, cls, 0, 1) == 0.5);
  CHECK(w_prob(half, cls, 0, 2) == 0.5);
  const auto dist = label_distribution(half, cls, 1);
  CHECK(dist == std::vector<double>{1.0, 0.0, 0.0});
  CHECK_THROWS_AS(w_prob(half, cls, 2, 0), ValidationError);
  CHECK_THROWS_AS(w_prob(half, cls, 0, 3), ValidationError);
  CHECK_THROWS_AS(w_prob(SparseSimplex::vertex(3), cls, 0, 0), ValidationError);
}

TEST_CASE("W^gamma examples") {
  const auto sym = testing::symmetric_instance();
  const auto uniform = SparseSimplex::from_entries({{0, 0.5}, {1, 0.5}});
  CHECK(w_prob_gamma(uniform, sym.hypotheses, 0, 1, {0.5, 2}) == 0.5);

  const auto cls = HypothesisClass::from_rows(4, {{3}, {1}});
  CHECK(w_prob_gamma(SparseSimplex::vertex(0), cls, 0, 3, {0.5, 4}) == 0.625);
  for (Label y = 0; y < 4; ++y) {
    CHECK(w_prob_gamma(SparseSimplex::vertex(1), cls, 0, y, {1.0, 4}) == 0.25);
  }
}

TEST_CASE("W and W^gamma match the dense reference") {
  Rng rng(1, Stream::kTest);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = make_random_instance({4, 3, 1 + rng.below(50), 6}, trial);
    const auto& cls = inst.hypotheses;
    const double gamma = 0.1 + 0.8 * rng.uniform();
    const GammaConfig cfg{gamma, 3};
    const auto dense = reference::random_simplex(cls.size(), rng);
    const auto p = SparseSimplex::from_dense(dense.weights);
    const auto wg = reference::support_w_gamma(inst, dense.weights, gamma);
    LabelCache cache;
    for (std::size_t j = 0; j < inst.support.size(); ++j) {
      const auto& s = inst.support[j];
      double dot = 0.0;
      for (std::size_t h = 0; h < cls.size(); ++h) dot += cls(h, s.x) == s.y ? dense.weights[h] : 0.0;
      CHECK(std::abs(w_prob(p, cls, s.x, s.y) - dot) <= 1e-12);
      CHECK(std::abs(w_prob_gamma(p, cls, s.x, s.y, cfg) - wg[j]) <= 1e-12);
      CHECK(cache.at(p, cls, s.x)[s.y] == w_prob(p, cls, s.x, s.y));
    }
    for (std::size_t x = 0; x < cls.num_examples(); ++x) {
      double sum = 0.0, sum_gamma = 0.0;
      for (Label y = 0; y < 3; ++y) {
        sum += w_prob(p, cls, x, y);
        const double v = w_prob_gamma(p, cls, x, y, cfg);
        sum_gamma += v;
        CHECK(v >= cfg.floor() - 1e-15);
        CHECK(v <= 1.0 - gamma + cfg.floor() + 1e-15);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
      CHECK(std::abs(sum_gamma - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("phi examples") {
  const auto cls = HypothesisClass::from_rows(2, {{1}, {0}});
  CHECK(phi(SparseSimplex::vertex(0), cls, 0, 1, {0.5, 2}) == doctest::Approx(-std::log(0.75)));
  CHECK(phi(SparseSimplex::vertex(0), cls, 0, 1, {0.5, 2}) == doctest::Approx(0.2876820724517809));
  const auto uniform = SparseSimplex::from_entries({{0, 0.5}, {1, 0.5}});
  CHECK(phi(uniform, cls, 0, 1, {0.5, 2}) == doctest::Approx(std::log(2.0)));

  Rng rng(2, Stream::kTest);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = make_random_instance({3, 4, 8, 5}, trial);
    const double gamma = 0.05 + 0.9 * rng.uniform();
    const auto p = SparseSimplex::from_dense(
        reference::random_sparse_simplex(8, 1 + rng.below(3), rng).weights);
    for (const auto& s : inst.support) {
      CHECK(phi(p, inst.hypotheses, s.x, s.y, {gamma, 4}) <= std::log(4.0 / gamma) + 1e-12);
    }
  }
}

TEST_CASE("gradient coefficient examples") {
  const auto sym = testing::symmetric_instance();
  const auto uniform = SparseSimplex::from_entries({{0, 0.5}, {1, 0.5}});
  const GammaConfig cfg{0.5, 2};
  CHECK(phi_grad_coeff(uniform, sym.hypotheses, 0, 1, cfg) == -1.0);
  // The full per-sample gradient is (c * 1{h0(0) = 1}, c * 1{h1(0) = 1}) = (0, -1).
  const auto dense = reference::sample_grad(sym.hypotheses, uniform.to_dense(2), 0, 1, 0.5);
  CHECK(dense == std::vector<double>{0.0, -1.0});

  // Central difference along e_1 - e_0 recovers the coefficient.
  const double s = 1e-6;
  const auto plus = SparseSimplex::from_entries({{0, 0.5 - s}, {1, 0.5 + s}});
  const auto minus = SparseSimplex::from_entries({{0, 0.5 + s}, {1, 0.5 - s}});
  const double fd = (phi(plus, sym.hypotheses, 0, 1, cfg) - phi(minus, sym.hypotheses, 0, 1, cfg)) /
                    (2.0 * s);
  CHECK(fd == doctest::Approx(-1.0).epsilon(1e-8));

  CHECK(phi_grad_coeff(uniform, sym.hypotheses, 0, 1, {1.0, 2}) == 0.0);

  Rng rng(3, Stream::kTest);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = make_random_instance({3, 5, 10, 6}, trial);
    const double gamma = 0.05 + 0.9 * rng.uniform();
    const auto p = SparseSimplex::from_dense(
        reference::random_sparse_simplex(10, 1 + rng.below(4), rng).weights);
    const auto& sp = inst.support[rng.below(inst.support.size())];
    const double c = phi_grad_coeff(p, inst.hypotheses, sp.x, sp.y, {gamma, 5});
    CHECK(c <= 0.0);
    CHECK(std::abs(c) <= (1.0 - gamma) * 5.0 / gamma + 1e-12);
    CHECK(c == grad_coeff_from_w(w_prob(p, inst.hypotheses, sp.x, sp.y), {gamma, 5}));
  }
}

TEST_CASE("phi_empirical") {
  // Probabilities 1/8, 3/8, 4/8 realized as multiplicities 1, 3, 4.
  const Instance inst{HypothesisClass::from_rows(3, {{0, 1}, {2, 1}, {1, 0}}),
                      {{0, 0, 0.125}, {0, 2, 0.375}, {1, 1, 0.5}}};
  std::vector<LabeledExample> data;
  const int mult[] = {1, 3, 4};
  for (int j = 0; j < 3; ++j) {
    for (int r = 0; r < mult[j]; ++r) data.push_back({inst.support[j].x, inst.support[j].y});
  }
  const auto dense = std::vector<double>{0.2, 0.5, 0.3};
  const auto p = SparseSimplex::from_dense(dense);
  const GammaConfig cfg{0.5, 3};
  CHECK(std::abs(phi_empirical(p, inst.hypotheses, data, cfg) -
                 reference::exact_phi(inst, dense, 0.5)) <= 1e-12);

  const std::vector<LabeledExample> one{{0, 2}};
  CHECK(phi_empirical(p, inst.hypotheses, one, cfg) == phi(p, inst.hypotheses, 0, 2, cfg));

  auto doubled = data;
  doubled.insert(doubled.end(), data.begin(), data.end());
  CHECK(phi_empirical(p, inst.hypotheses, doubled, cfg) ==
        doctest::Approx(phi_empirical(p, inst.hypotheses, data, cfg)).epsilon(1e-14));

  CHECK_THROWS_AS(phi_empirical(p, inst.hypotheses, {}, cfg), ValidationError);
}

TEST_CASE("phi_empirical parallel path is bit-identical to the serial twin") {
  const auto inst = make_random_instance({20, 4, 60, 40}, 5);
  Rng rng(4, Stream::kTest);
  const auto data = reference::sample_dataset(inst, 20000, rng);
  const auto p = SparseSimplex::from_dense(reference::random_simplex(60, rng).weights);
  const GammaConfig cfg{0.5, 4};
  CHECK(phi_empirical(p, inst.hypotheses, data, cfg) ==
        serial::phi_empirical(p, inst.hypotheses, data, cfg));
}

TEST_CASE("omega and its lower bound") {
  CHECK(omega(1.0) == 0.0);
  CHECK(omega_lower_bound(1.0) == 0.0);
  CHECK(omega(0.5) == doctest::Approx(0.19315).epsilon(1e-4));
  CHECK(omega_lower_bound(0.5) == doctest::Approx(0.125));
  CHECK(omega(2.0) == doctest::Approx(0.30685).epsilon(1e-4));
  CHECK(omega_lower_bound(2.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(omega(0.0), ValidationError);
  CHECK_THROWS_AS(omega_lower_bound(-1.0), ValidationError);
  for (int i = 1; i <= 1000; ++i) {
    const double z = i / 100.0;
    CHECK(omega(z) >= omega_lower_bound(z));
  }
}

TEST_CASE("gamma config validation") {
  CHECK_THROWS_AS((GammaConfig{0.0, 2}.validate()), ValidationError);
  CHECK_THROWS_AS((GammaConfig{1.5, 2}.validate()), ValidationError);
  CHECK_THROWS_AS((GammaConfig{0.5, 0}.validate()), ValidationError);
  CHECK_NOTHROW(GammaConfig{1.0, 2}.validate());
  CHECK(GammaConfig{0.5, 4}.floor() == 0.125);
}
