#include "bpac/cover.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>

#include "bpac/errors.hpp"
#include "bpac/oracle.hpp"

namespace bpac {

std::uint64_t cover_sample_size(std::size_t natarajan_dim, std::size_t num_labels, double eps,
                                double delta, double c_s) {
  if (natarajan_dim < 1) throw ValidationError("Natarajan dimension must be at least 1");
  if (num_labels < 2) throw ValidationError("cover sample size needs K >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("eps must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (!(c_s > 0.0)) throw ValidationError("cover constant must be positive");
  const double d = static_cast<double>(natarajan_dim);
  const double s = c_s *
                   (d * std::log(static_cast<double>(num_labels)) * std::log(1.0 / eps) +
                    std::log(1.0 / delta)) /
                   eps;
  return static_cast<std::uint64_t>(std::ceil(s));
}

double pattern_count_bound(std::size_t natarajan_dim, std::uint64_t samples,
                           std::size_t num_labels) {
  const double pairs = static_cast<double>(num_labels) * static_cast<double>(num_labels - 1) / 2.0;
  double total = 0.0;
  double binom = 1.0;  // C(s, i)
  double pair_power = 1.0;
  for (std::size_t i = 0; i <= natarajan_dim; ++i) {
    if (i > 0) {
      if (i > samples) break;
      binom *= static_cast<double>(samples - i + 1) / static_cast<double>(i);
      pair_power *= pairs;
    }
    total += binom * pair_power;
  }
  return total;
}

double pattern_count_closed_bound(std::size_t natarajan_dim, std::uint64_t samples,
                                  std::size_t num_labels) {
  const double d = static_cast<double>(natarajan_dim);
  return std::pow(std::exp(1.0) * static_cast<double>(samples) / d, d) *
         std::pow(static_cast<double>(num_labels), 2.0 * d);
}

CoverResult build_cover(const HypothesisClass& base, std::span<const std::size_t> sample) {
  if (sample.empty()) throw ValidationError("cover needs a nonempty sample");
  for (std::size_t x : sample) {
    if (x >= base.num_examples()) throw ValidationError("cover sample example out of range");
  }
  CoverResult cover;
  cover.sample_count = sample.size();
  cover.group_of.resize(base.size());
  std::vector<Label> pattern(sample.size());
  // Scanning in index order makes the first hit of each pattern its
  // lowest-index member.
  for (std::size_t h = 0; h < base.size(); ++h) {
    for (std::size_t i = 0; i < sample.size(); ++i) pattern[i] = base(h, sample[i]);
    auto [it, inserted] = cover.patterns.try_emplace(pattern, h);
    if (inserted) cover.representatives.push_back(h);
  }
  // Positions follow ascending representative order.
  for (std::size_t h = 0; h < base.size(); ++h) {
    for (std::size_t i = 0; i < sample.size(); ++i) pattern[i] = base(h, sample[i]);
    const std::size_t rep = cover.patterns.at(pattern);
    cover.group_of[h] = static_cast<std::size_t>(
        std::lower_bound(cover.representatives.begin(), cover.representatives.end(), rep) -
        cover.representatives.begin());
  }
  return cover;
}

double cover_radius(const Instance& instance, const CoverResult& cover) {
  const auto& cls = instance.hypotheses;
  if (cover.group_of.size() != cls.size()) throw ValidationError("cover does not match the class");
  const auto marginal = instance.example_marginal();
  double radius = 0.0;
  for (std::size_t h = 0; h < cls.size(); ++h) {
    const std::size_t rep = cover.representative_of(h);
    double d = 0.0;
    for (std::size_t x = 0; x < marginal.size(); ++x) {
      if (cls(h, x) != cls(rep, x)) d += marginal[x];
    }
    radius = std::max(radius, d);
  }
  return radius;
}

CoverLearnResult learn_via_cover(BanditEnv& env, const HypothesisClass& base,
                                 const LearnerConfig& cfg, const CoverConfig& cover_cfg) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t dim = cover_cfg.natarajan_dim.value_or(
      std::max<std::size_t>(1, std::bit_width(base.size()) - 1));
  const std::uint64_t s =
      cover_sample_size(dim, base.num_labels(), cfg.eps, cfg.delta, cfg.factors.cs);

  const std::uint64_t env_before = env.sample_budget();
  std::vector<std::size_t> sample;
  sample.reserve(s);
  for (std::uint64_t i = 0; i < s; ++i) {
    sample.push_back(env.open_round());
    env.predict(0);
  }

  CoverLearnResult result;
  result.cover = build_cover(base, sample);
  const HypothesisClass restricted = base.restrict_to(result.cover.representatives);
  EnumerationOracle oracle(restricted);

  LearnerConfig inner_cfg = cfg;
  inner_cfg.eps = cfg.eps / 2.0;
  inner_cfg.delta = cfg.delta / 2.0;
  result.inner = learn(env, oracle, inner_cfg);
  result.chosen = result.cover.representatives[result.inner.chosen];

  RunReport report = result.inner.report;
  report.algorithm = "cover";
  report.eps = cfg.eps;
  report.delta = cfg.delta;
  report.num_hypotheses = base.size();
  report.chosen = result.chosen;
  report.total_env_samples = env.sample_budget() - env_before;
  report.cover = CoverSummary{s, base.size(), result.cover.representatives.size(), dim, {}};
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.report = std::move(report);
  return result;
}

}  // namespace bpac
