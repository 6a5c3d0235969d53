// Serial vs OpenMP twins of the two data-parallel kernels: the enumeration
// oracle and the empirical log-barrier objective.
//
//   ./bench/bpac_bench --benchmark_filter=Erm

#include <benchmark/benchmark.h>

#include <vector>

#include "bpac/core.hpp"
#include "bpac/logbarrier.hpp"
#include "bpac/oracle.hpp"
#include "bpac/rng.hpp"

namespace {

struct ErmFixture {
  bpac::Instance instance;
  std::vector<bpac::WeightedExample> query;

  explicit ErmFixture(std::size_t n) : instance(bpac::make_random_instance({64, 4, n, 128}, 1)) {
    bpac::Rng rng(1, bpac::Stream::kTest);
    for (int i = 0; i < 256; ++i) {
      query.push_back({rng.below(64), static_cast<bpac::Label>(rng.below(4)), rng.uniform()});
    }
  }
};

void BM_ErmSerial(benchmark::State& state) {
  const ErmFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bpac::serial::weighted_erm(f.instance.hypotheses, f.query));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ErmParallel(benchmark::State& state) {
  const ErmFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bpac::weighted_erm(f.instance.hypotheses, f.query));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct PhiFixture {
  bpac::Instance instance;
  std::vector<bpac::LabeledExample> data;
  bpac::SparseSimplex p;

  explicit PhiFixture(std::size_t samples)
      : instance(bpac::make_random_instance({64, 4, 500, 128}, 2)) {
    bpac::Rng rng(2, bpac::Stream::kTest);
    for (std::size_t i = 0; i < samples; ++i) {
      const auto& s = instance.support[rng.below(instance.support.size())];
      data.push_back({s.x, s.y});
    }
    std::vector<bpac::SparseSimplex::Entry> entries;
    for (std::size_t h = 0; h < 500; h += 10) entries.push_back({h, 1.0 / 50.0});
    p = bpac::SparseSimplex::from_entries(entries);
  }
};

void BM_PhiSerial(benchmark::State& state) {
  const PhiFixture f(static_cast<std::size_t>(state.range(0)));
  const bpac::GammaConfig cfg{0.5, 4};
  for (auto _ : state) {
    benchmark::DoNotOptimize(bpac::serial::phi_empirical(f.p, f.instance.hypotheses, f.data, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_PhiParallel(benchmark::State& state) {
  const PhiFixture f(static_cast<std::size_t>(state.range(0)));
  const bpac::GammaConfig cfg{0.5, 4};
  for (auto _ : state) {
    benchmark::DoNotOptimize(bpac::phi_empirical(f.p, f.instance.hypotheses, f.data, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ErmSerial)->RangeMultiplier(8)->Range(512, 32768);
BENCHMARK(BM_ErmParallel)->RangeMultiplier(8)->Range(512, 32768);
BENCHMARK(BM_PhiSerial)->RangeMultiplier(8)->Range(4096, 262144);
BENCHMARK(BM_PhiParallel)->RangeMultiplier(8)->Range(4096, 262144);

BENCHMARK_MAIN();
