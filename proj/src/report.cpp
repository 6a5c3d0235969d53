#include "bpac/report.hpp"

#include <charconv>
#include <sstream>

namespace bpac {

using nlohmann::json;

json to_json(const RunReport& r) {
  json config = {
      {"algorithm", r.algorithm},
      {"K", r.num_labels},
      {"N", r.num_hypotheses},
      {"eps", r.eps},
      {"delta", r.delta},
      {"gamma", r.gamma},
      {"mode", to_string(r.mode)},
      {"seed", r.seed},
      {"c1", r.factors.c1},
      {"c2", r.factors.c2},
      {"cb", r.factors.cb},
      {"cs", r.factors.cs},
      {"t_mult", r.factors.t_mult},
      {"reset_mult", r.factors.reset_mult},
  };
  json plan = {
      {"m1", r.m1},
      {"phase1_budget", r.phase1_budget},
      {"fw_iterations", r.fw_iterations},
      {"mu", r.mu},
      {"m2_variance_branch", r.m2_variance_branch},
      {"m2_scale_branch", r.m2_scale_branch},
  };
  json doc = {
      {"build_id", r.build_id},
      {"config", config},
      {"plan", plan},
      {"phase1_trials", r.phase1_trials},
      {"phase1_kept", r.phase1_kept},
      {"fw_oracle_calls", r.fw_oracle_calls},
      {"oracle_calls", r.oracle_calls},
      {"phase2_rounds", r.phase2_rounds},
      {"total_env_samples", r.total_env_samples},
      {"exploration_support", r.exploration_support},
      {"variance_warning", r.variance_warning},
      {"chosen", r.chosen},
      {"wall_time_s", r.wall_time_s},
  };
  doc["variance_estimate"] = r.variance_estimate ? json(*r.variance_estimate) : json(nullptr);
  doc["excess"] = r.excess ? json(*r.excess) : json(nullptr);
  if (r.cover) {
    const auto& c = *r.cover;
    doc["cover"] = {{"samples", c.samples},
                    {"base_size", c.base_size},
                    {"representatives", c.representatives},
                    {"natarajan_dim", c.natarajan_dim},
                    {"radius", c.radius ? json(*c.radius) : json(nullptr)}};
  }
  return doc;
}

namespace {

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string aggregate_csv_row(const RunReport& r) {
  std::ostringstream out;
  out << r.seed << ',' << r.num_labels << ',' << r.num_hypotheses << ',' << shortest(r.eps) << ','
      << shortest(r.delta) << ',' << shortest(r.gamma) << ',' << to_string(r.mode) << ','
      << r.phase1_trials << ',' << r.phase2_rounds << ',' << r.total_env_samples << ','
      << r.oracle_calls << ',';
  if (r.excess) {
    out << shortest(*r.excess) << ',' << (*r.excess <= r.eps ? 1 : 0);
  } else {
    out << ',';
  }
  return out.str();
}

}  // namespace bpac
