#include <sstream>

#include "doctest.h"

#include "bpac/verify.hpp"

using namespace bpac;
using namespace bpac::verify;

TEST_CASE("the invariant suite passes on the shipped implementation") {
  VerifyConfig cfg;
  cfg.optimizer_cases = 1;
  const auto results = run_all(cfg);
  CHECK(results.size() == 11);
  for (const auto& r : results) {
    INFO(r.name << " violations " << r.violations << " worst " << r.worst << " limit " << r.limit);
    CHECK(r.passed());
  }
  std::ostringstream out;
  print_results(out, results);
  CHECK(out.str().find("FAIL") == std::string::npos);
}

TEST_CASE("a sign-flipped gradient is caught") {
  VerifyConfig cfg;
  cfg.coeff = [](const SparseSimplex& p, const HypothesisClass& cls, std::size_t x, Label y,
                 const GammaConfig& g) { return -phi_grad_coeff(p, cls, x, y, g); };
  const auto r = check_sample_gradient(cfg);
  CHECK_FALSE(r.passed());
  CHECK(r.violations == r.cases);
  std::ostringstream out;
  print_results(out, {r});
  CHECK(out.str().find("FAIL") != std::string::npos);
}

TEST_CASE("log-log slope of an exact power law") {
  FWTrace trace;
  for (std::uint64_t t = 1; t <= 100; ++t) {
    trace.points.push_back({t, 3.0 / static_cast<double>(t), 1});
  }
  CHECK(loglog_slope(trace, 4, 100) == doctest::Approx(-1.0).epsilon(1e-12));
}
