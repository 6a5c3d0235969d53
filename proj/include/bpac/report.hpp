#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"

#include "bpac/learner.hpp"

namespace bpac {

/// Per-run JSON document, including the full config echo and build id.
nlohmann::json to_json(const RunReport& report);

/// Aggregate CSV: one row per run under a fixed header.
inline constexpr const char* kAggregateCsvHeader =
    "seed,K,N,eps,delta,gamma,mode,phase1_trials,phase2_rounds,total_samples,oracle_calls,"
    "excess,success";

/// `success` is excess <= eps; both columns stay empty when excess is unknown.
std::string aggregate_csv_row(const RunReport& report);

}  // namespace bpac
