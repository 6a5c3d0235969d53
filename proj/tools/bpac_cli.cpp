// bpac: experiment harness for the bandit PAC learner.
//
//   bpac generate --kind planted --m 20 --K 3 --N 50 --noise 0.1 --seed 1 --out inst.json
//   bpac learn    --instance inst.json --seeds 0..99 --out runs/
//   bpac baseline --instance inst.json --seeds 0..99 --out base/
//   bpac cover    --instance inst.json --seeds 0..9
//   bpac fw-bench --instance inst.json --iterations 1024 --out trace.csv
//   bpac verify
//
// Exit codes: 0 success, 1 unexpected error, 2 invalid input, 3 phase-1
// budget exhausted, 4 invariant failure.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bpac/core.hpp"
#include "bpac/cover.hpp"
#include "bpac/env.hpp"
#include "bpac/errors.hpp"
#include "bpac/instance_io.hpp"
#include "bpac/learner.hpp"
#include "bpac/oracle.hpp"
#include "bpac/report.hpp"
#include "bpac/spiderfw.hpp"
#include "bpac/verify.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kInvalid = 2,
  kBudget = 3,
  kInvariant = 4,
};

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

// "a..b" (inclusive) or a single seed.
SeedRange parse_seeds(const std::string& text) {
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty()) {
      throw bpac::ValidationError("bad seed range '" + text + "' (expected a..b or a)");
    }
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto v = number(text);
    return {v, v};
  }
  SeedRange r{number(std::string_view(text).substr(0, dots)),
              number(std::string_view(text).substr(dots + 2))};
  if (r.last < r.first) throw bpac::ValidationError("seed range '" + text + "' is empty");
  return r;
}

struct RunOptions {
  std::string instance;
  std::string seeds = "0";
  std::string out;
  std::string mode = "practical";
  std::optional<std::size_t> natarajan_dim;
  bpac::LearnerConfig learner;
};

void add_run_options(CLI::App& cmd, RunOptions& o) {
  auto& f = o.learner.factors;
  cmd.add_option("--instance", o.instance, "instance JSON file")->required();
  cmd.add_option("--eps", o.learner.eps, "accuracy")->capture_default_str();
  cmd.add_option("--delta", o.learner.delta, "failure probability")->capture_default_str();
  cmd.add_option("--gamma", o.learner.gamma, "uniform mixing weight")->capture_default_str();
  cmd.add_option("--mode", o.mode, "theory or practical")
      ->check(CLI::IsMember({"theory", "practical"}))
      ->capture_default_str();
  cmd.add_option("--seeds", o.seeds, "seed range a..b (inclusive) or a single seed")
      ->capture_default_str();
  cmd.add_option("--out", o.out, "output directory for run-<seed>.json and aggregate.csv");
  cmd.add_option("--c1", f.c1, "practical M1 constant")->capture_default_str();
  cmd.add_option("--c2", f.c2, "practical M2 variance constant")->capture_default_str();
  cmd.add_option("--cb", f.cb, "uniform baseline constant")->capture_default_str();
  cmd.add_option("--cs", f.cs, "cover sample constant")->capture_default_str();
  cmd.add_option("--t-mult", f.t_mult, "multiplier on the FW round cap")->capture_default_str();
  cmd.add_option("--reset-mult", f.reset_mult, "multiplier on reset-round batches")
      ->capture_default_str();
  cmd.add_option("--max-samples", o.learner.max_env_samples, "refuse runs above this sample use")
      ->capture_default_str();
}

struct RunOutcome {
  std::optional<bpac::RunReport> report;
  int code = kOk;
  std::string error;
};

int classify(const std::exception_ptr& e, std::string& message) {
  try {
    std::rethrow_exception(e);
  } catch (const bpac::BudgetExhausted& ex) {
    message = ex.what();
    return kBudget;
  } catch (const bpac::ValidationError& ex) {
    message = ex.what();
    return kInvalid;
  } catch (const std::exception& ex) {
    message = ex.what();
    return kOther;
  }
}

enum class Algorithm { kLearn, kBaseline, kCover };

bpac::RunReport run_one(Algorithm algo, const bpac::Instance& inst, const RunOptions& o,
                        std::uint64_t seed) {
  auto cfg = o.learner;
  cfg.seed = seed;
  bpac::BanditEnv env(inst, seed);
  const auto best = bpac::best_hypothesis(inst);
  bpac::RunReport report;
  std::size_t chosen = 0;
  if (algo == Algorithm::kCover) {
    bpac::CoverConfig cover_cfg;
    cover_cfg.natarajan_dim = o.natarajan_dim;
    auto result = bpac::learn_via_cover(env, inst.hypotheses, cfg, cover_cfg);
    report = std::move(result.report);
    report.cover->radius = bpac::cover_radius(inst, result.cover);
    chosen = result.chosen;
  } else {
    bpac::EnumerationOracle oracle(inst.hypotheses);
    auto result = algo == Algorithm::kLearn ? bpac::learn(env, oracle, cfg)
                                            : bpac::uniform_baseline(env, oracle, cfg);
    report = std::move(result.report);
    chosen = result.chosen;
  }
  report.excess = bpac::hypothesis_loss(inst, chosen) - best.loss;
  return report;
}

int run_command(Algorithm algo, RunOptions& o) {
  o.learner.mode = bpac::parse_mode(o.mode);
  const auto range = parse_seeds(o.seeds);
  const auto inst = bpac::load_instance(o.instance);
  const std::size_t count = range.last - range.first + 1;
  // Configuration errors are the same for every seed; report them once.
  if (algo != Algorithm::kBaseline) {
    bpac::plan_run(inst.num_labels(), inst.hypotheses.size(), o.learner);
  }

  std::vector<RunOutcome> outcomes(count);
  // Runs are independent; each owns its environment, oracle and streams.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < count; ++i) {
    try {
      outcomes[i].report = run_one(algo, inst, o, range.first + i);
    } catch (...) {
      outcomes[i].code = classify(std::current_exception(), outcomes[i].error);
    }
  }

  std::ostringstream csv;
  csv << bpac::kAggregateCsvHeader << '\n';
  int code = kOk;
  if (!o.out.empty()) fs::create_directories(o.out);
  for (std::size_t i = 0; i < count; ++i) {
    const auto seed = range.first + i;
    auto& r = outcomes[i];
    if (!r.report) {
      std::cerr << "seed " << seed << ": " << r.error << '\n';
      if (code == kOk) code = r.code;
      continue;
    }
    csv << bpac::aggregate_csv_row(*r.report) << '\n';
    if (!o.out.empty()) {
      auto doc = bpac::to_json(*r.report);
      doc["config"]["instance"] = o.instance;
      std::ofstream(fs::path(o.out) / ("run-" + std::to_string(seed) + ".json"))
          << doc.dump(2) << '\n';
    }
  }
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream(fs::path(o.out) / "aggregate.csv") << csv.str();
  }
  return code;
}

struct GenerateOptions {
  std::string kind = "planted";
  std::size_t m = 20;
  std::size_t k = 3;
  std::size_t n = 50;
  double noise = 0.0;
  std::size_t support_points = 0;
  std::size_t offsupport = 8;
  std::size_t distinct = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int generate_command(const GenerateOptions& g) {
  bpac::Instance inst = [&] {
    if (g.kind == "planted") return bpac::make_planted_instance({g.m, g.k, g.n, g.noise}, g.seed);
    if (g.kind == "duplicated") {
      return bpac::make_duplicated_instance({g.m, g.offsupport, g.k, g.distinct, g.n, g.noise},
                                            g.seed);
    }
    const std::size_t points = g.support_points ? g.support_points : std::max<std::size_t>(1, g.m * g.k / 2);
    return bpac::make_random_instance({g.m, g.k, g.n, points}, g.seed);
  }();
  if (g.out.empty()) {
    std::cout << bpac::dump_instance(inst);
  } else {
    bpac::save_instance(inst, g.out);
  }
  return kOk;
}

struct BenchOptions {
  std::string instance;
  double gamma = 0.5;
  std::uint64_t iterations = 1024;
  double reset_mult = 25.0;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  std::string out;
};

int fw_bench_command(const BenchOptions& b) {
  const auto inst = bpac::load_instance(b.instance);
  const auto fw = bpac::FWSchedule::log_barrier(inst.num_labels(), b.gamma, b.iterations,
                                                bpac::ScheduleMode::kPractical, b.reset_mult);
  const auto trace = bpac::verify::trace_fw(inst, b.gamma, fw, b.seed, b.tol);

  std::ostringstream csv;
  csv.precision(17);
  csv << "t,suboptimality,support_size\n";
  for (const auto& p : trace.points) {
    csv << p.t << ',' << p.suboptimality << ',' << p.support_size << '\n';
  }
  if (b.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream(b.out) << csv.str();
  }
  const auto hi = std::min<std::uint64_t>(1024, b.iterations);
  std::cerr << "phi* = " << trace.phi_star << " (gap " << trace.star_gap << "), slope over [16, "
            << hi << "] = " << bpac::verify::loglog_slope(trace, 16, hi) << '\n';
  return kOk;
}

int verify_command(const bpac::verify::VerifyConfig& cfg) {
  const auto results = bpac::verify::run_all(cfg);
  bpac::verify::print_results(std::cout, results);
  const bool ok = std::all_of(results.begin(), results.end(),
                              [](const auto& r) { return r.passed(); });
  std::cout << (ok ? "all invariants hold\n" : "invariant failure\n");
  return ok ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandit PAC multiclass learning experiments"};
  app.set_config("--config", "", "TOML/INI file supplying defaults; flags override it");
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "write a synthetic instance");
  generate->add_option("--kind", gen.kind, "planted, random or duplicated")
      ->check(CLI::IsMember({"planted", "random", "duplicated"}))
      ->capture_default_str();
  generate->add_option("--m", gen.m, "examples (on-support examples for duplicated)")
      ->capture_default_str();
  generate->add_option("--K", gen.k, "labels")->capture_default_str();
  generate->add_option("--N", gen.n, "hypotheses")->capture_default_str();
  generate->add_option("--noise", gen.noise, "label noise rho")->capture_default_str();
  generate->add_option("--support-points", gen.support_points, "random: distinct (x, y) pairs");
  generate->add_option("--offsupport", gen.offsupport, "duplicated: examples never drawn")
      ->capture_default_str();
  generate->add_option("--distinct", gen.distinct, "duplicated: distinct on-support rows")
      ->capture_default_str();
  generate->add_option("--seed", gen.seed)->capture_default_str();
  generate->add_option("--out", gen.out, "output path (stdout when omitted)");

  RunOptions learn_opts, base_opts, cover_opts;
  auto* learn = app.add_subcommand("learn", "run the two-phase learner per seed");
  add_run_options(*learn, learn_opts);
  auto* baseline = app.add_subcommand("baseline", "run uniform exploration per seed");
  add_run_options(*baseline, base_opts);
  auto* cover = app.add_subcommand("cover", "learn through a data-dependent cover per seed");
  add_run_options(*cover, cover_opts);
  cover->add_option("--natarajan-dim", cover_opts.natarajan_dim,
                    "dimension used to size the cover sample (default floor(log2 N))");

  BenchOptions bench;
  auto* fw_bench = app.add_subcommand("fw-bench", "trace exact sub-optimality of SPIDER-FW");
  fw_bench->add_option("--instance", bench.instance)->required();
  fw_bench->add_option("--gamma", bench.gamma)->capture_default_str();
  fw_bench->add_option("--iterations", bench.iterations)->capture_default_str();
  fw_bench->add_option("--reset-mult", bench.reset_mult)->capture_default_str();
  fw_bench->add_option("--seed", bench.seed)->capture_default_str();
  fw_bench->add_option("--tol", bench.tol, "duality-gap tolerance of the reference minimizer")
      ->capture_default_str();
  fw_bench->add_option("--out", bench.out, "CSV path (stdout when omitted)");

  bpac::verify::VerifyConfig vcfg;
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("--seed", vcfg.seed)->capture_default_str();
  verify->add_option("--gamma", vcfg.gamma)->capture_default_str();
  verify->add_option("--optimizer-cases", vcfg.optimizer_cases)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*generate) return generate_command(gen);
    if (*learn) return run_command(Algorithm::kLearn, learn_opts);
    if (*baseline) return run_command(Algorithm::kBaseline, base_opts);
    if (*cover) return run_command(Algorithm::kCover, cover_opts);
    if (*fw_bench) return fw_bench_command(bench);
    if (*verify) return verify_command(vcfg);
  } catch (...) {
    std::string message;
    const int code = classify(std::current_exception(), message);
    std::cerr << "error: " << message << '\n';
    return code;
  }
  return kOther;
}
