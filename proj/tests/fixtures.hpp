#pragma once

#include "bpac/core.hpp"

namespace bpac::testing {

// m = 1, h0(0) = 0, h1(0) = 1, both labels equally likely. Any P symmetric
// in the two hypotheses gives W^gamma = 1/2.
inline Instance symmetric_instance() {
  return Instance{HypothesisClass::from_rows(2, {{0}, {1}}), {{0, 0, 0.5}, {0, 1, 0.5}}};
}

// Single support pair (x, y) with probability one.
inline Instance point_mass(std::size_t k, std::size_t m, std::size_t x, Label y,
                           const std::vector<std::vector<Label>>& rows) {
  return Instance{HypothesisClass::from_rows(k, rows), {{x, y, 1.0}}};
}

// Constant-function class: row c predicts c everywhere.
inline HypothesisClass constant_class(std::size_t k, std::size_t m) {
  std::vector<std::vector<Label>> rows;
  for (Label c = 0; c < k; ++c) rows.emplace_back(m, c);
  return HypothesisClass::from_rows(k, rows);
}

}  // namespace bpac::testing
