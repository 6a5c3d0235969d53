#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bpac/core.hpp"
#include "bpac/env.hpp"
#include "bpac/learner.hpp"

namespace bpac {

/// s = ceil(c_s (d_N ln K ln(1/eps) + ln(1/delta)) / eps).
std::uint64_t cover_sample_size(std::size_t natarajan_dim, std::size_t num_labels, double eps,
                                double delta, double c_s);

/// sum_{i <= d} C(s, i) C(K, 2)^i, the number of patterns a class of
/// Natarajan dimension d can realize on s points.
double pattern_count_bound(std::size_t natarajan_dim, std::uint64_t samples,
                           std::size_t num_labels);
/// (e s / d)^d K^(2d).
double pattern_count_closed_bound(std::size_t natarajan_dim, std::uint64_t samples,
                                  std::size_t num_labels);

/// Hypotheses grouped by their labels on the sample; the lowest index of
/// each group represents it.
struct CoverResult {
  std::vector<std::size_t> representatives;  ///< ascending base indices
  std::vector<std::size_t> group_of;         ///< base h -> position in representatives
  std::map<std::vector<Label>, std::size_t> patterns;  ///< pattern -> representative base index
  std::size_t sample_count = 0;

  std::size_t representative_of(std::size_t h) const { return representatives[group_of[h]]; }
};

/// Throws ValidationError on an empty sample or an out-of-range example.
CoverResult build_cover(const HypothesisClass& base, std::span<const std::size_t> sample);

/// max_h Pr[h(x) != rep(h)(x)] under the instance's example marginal.
double cover_radius(const Instance& instance, const CoverResult& cover);

struct CoverConfig {
  /// Natarajan dimension used to size the sample; defaults to
  /// max(1, floor(log2 N)), which bounds it for any class of N functions.
  std::optional<std::size_t> natarajan_dim;
};

struct CoverLearnResult {
  LearnResult inner;  ///< run on the cover with (eps/2, delta/2)
  CoverResult cover;
  std::size_t chosen = 0;  ///< base index
  RunReport report;
};

/// Draws s examples (closing each round with label 0), builds the cover,
/// and runs the finite-class learner on it.
CoverLearnResult learn_via_cover(BanditEnv& env, const HypothesisClass& base,
                                 const LearnerConfig& cfg, const CoverConfig& cover_cfg = {});

}  // namespace bpac
