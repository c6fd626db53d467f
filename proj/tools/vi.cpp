// vi: experiment harness for the constrained mirror-descent solvers.
//
//   vi hphard   [--n 100 --m 10 --seed 0 --q uniform|zero --radius 1] [run flags]
//   vi forsaken [--x0 0 --y0 0] [run flags]
//   vi custom SPEC.json [run flags]
//
// Exit codes: 0 ok (MaxIter included), 2 bad flags or schema, 3 no productive steps.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mdvi/mdvi.hpp"
#include "mdvi/report.hpp"

namespace {

using mdvi::VIProblem;
using mdvi::EuclideanBall;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNoProductive = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunFlags {
  std::string alg = "2";
  int criterion = 1;
  double eps = 0.05;
  std::optional<double> delta;
  std::optional<std::uint64_t> max_iter;
  bool modified = false;
  std::uint64_t trace_every = 0;
  std::string out;
  std::string csv;
  bool verify_gap = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, double default_eps) {
  f.eps = default_eps;
  cmd->add_option("--alg", f.alg, "algorithm 1..7 or 'all'")->capture_default_str();
  cmd->add_option("--criterion", f.criterion, "stopping criterion")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  cmd->add_option("--eps", f.eps, "accuracy epsilon")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--delta", f.delta, "monotonicity slack added to the bound")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-iter", f.max_iter, "iteration budget")->check(CLI::PositiveNumber);
  cmd->add_flag("--modified", f.modified, "per-constraint switching (first violated constraint)");
  cmd->add_option("--trace-every", f.trace_every, "record every N-th iteration (0 = off)");
  cmd->add_option("--out", f.out, "summary JSON path (default stdout)");
  cmd->add_option("--csv", f.csv, "trace CSV path");
  cmd->add_flag("--verify-gap", f.verify_gap, "brute-force gap check (dimension <= 3)");
}

std::vector<mdvi::Algorithm> parse_algorithms(const std::string& s) {
  if (s == "all") {
    std::vector<mdvi::Algorithm> all;
    for (int a = 1; a <= 7; ++a) all.push_back(mdvi::algorithm_from_int(a));
    return all;
  }
  try {
    std::size_t used = 0;
    const int a = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return {mdvi::algorithm_from_int(a)};
  } catch (const std::exception&) {
    throw UsageError("--alg must be 1..7 or 'all', got '" + s + "'");
  }
}

// PATH.csv -> PATH_alg3.csv when several algorithms share one --csv.
std::string per_algorithm_path(const std::string& path, mdvi::Algorithm a, bool several) {
  if (!several) return path;
  std::filesystem::path p(path);
  const auto stem = p.stem().string() + "_alg" + std::to_string(mdvi::to_int(a));
  return (p.parent_path() / (stem + p.extension().string())).string();
}

struct Outcome {
  std::optional<mdvi::RunResult> result;
  mdvi::SolverConfig config;
  double wall = 0.0;
  std::string error;
};

struct Job {
  mdvi::Criterion criterion = mdvi::Criterion::kOne;
  double default_delta = 0.0;
  std::uint64_t default_trace_every = 0;
  std::function<std::optional<std::uint64_t>(mdvi::Algorithm)> default_budget;
  std::function<std::string(mdvi::Algorithm)> default_csv;
};

int run(const VIProblem<EuclideanBall>& problem, const RunFlags& f, const Job& job) {
  const auto algs = parse_algorithms(f.alg);
  const auto n = problem.geometry.dimension();
  if (f.verify_gap && n > 3) throw UsageError("--verify-gap needs dimension <= 3");

  std::vector<mdvi::SolverConfig> configs;
  for (auto a : algs) {
    mdvi::SolverConfig c;
    c.algorithm = a;
    c.criterion = job.criterion;
    c.epsilon = f.eps;
    c.delta = f.delta.value_or(job.default_delta);
    c.max_iter = f.max_iter;
    if (!c.max_iter && job.default_budget) c.max_iter = job.default_budget(a);
    c.many_constraints = f.modified;
    c.trace_every = f.trace_every;
    if (c.trace_every == 0 && (!f.csv.empty() || job.default_csv)) c.trace_every = job.default_trace_every;
    if (c.trace_every == 0 && !f.csv.empty()) c.trace_every = 1;
    configs.push_back(c);
  }

  // Independent runs over shared immutable problem data; collected in
  // algorithm order whatever the completion order.
  std::vector<std::future<Outcome>> futures;
  for (const auto& c : configs) {
    futures.push_back(std::async(std::launch::async, [&problem, c] {
      Outcome o;
      o.config = c;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        o.result = mdvi::solve(problem, c);
      } catch (const mdvi::NoProductiveSteps& e) {
        o.error = e.what();
      }
      o.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return o;
    }));
  }
  std::vector<Outcome> outcomes;
  for (auto& fut : futures) outcomes.push_back(fut.get());

  bool any_failed = false;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& o : outcomes) {
    if (!o.result) {
      any_failed = true;
      nlohmann::ordered_json j;
      j["algorithm"] = mdvi::to_int(o.config.algorithm);
      j["termination"] = "NoProductiveSteps";
      j["error"] = o.error;
      j["wall_time_s"] = o.wall;
      rows.push_back(j);
      std::cerr << "alg " << mdvi::to_int(o.config.algorithm) << ": " << o.error << '\n';
      continue;
    }
    const auto& r = *o.result;
    auto j = mdvi::summary_json(mdvi::make_record(o.config, r, o.wall));
    if (problem.witness) j["distance_to_witness"] = mdvi::distance_to_witness(problem, r.x_hat);
    if (f.verify_gap) {
      const std::uint32_t resolution = n <= 2 ? 400 : 100;
      j["gap_oracle"] = mdvi::gap_oracle(problem, r.x_hat, resolution);
      j["gap_resolution"] = resolution;
    }
    rows.push_back(j);

    std::string csv = f.csv;
    if (csv.empty() && job.default_csv) csv = job.default_csv(o.config.algorithm);
    if (!csv.empty()) {
      const auto path = per_algorithm_path(csv, o.config.algorithm, algs.size() > 1 && f.csv == csv);
      std::ofstream os(path);
      if (!os) throw std::runtime_error("cannot write " + path);
      mdvi::write_trace_csv(os, r.trace, n);
    }
  }

  const auto doc = algs.size() == 1 ? rows[0] : rows;
  if (f.out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream os(f.out);
    if (!os) throw std::runtime_error("cannot write " + f.out);
    os << doc.dump(2) << '\n';
  }

  if (algs.size() > 1) {
    std::fprintf(stderr, "%-4s %12s %10s %12s  %s\n", "alg", "iters", "time_s", "estim", "termination");
    for (const auto& o : outcomes) {
      if (!o.result) {
        std::fprintf(stderr, "%-4d %12s %10.3f %12s  %s\n", mdvi::to_int(o.config.algorithm), "-", o.wall,
                     "-", "NoProductiveSteps");
        continue;
      }
      const auto& r = *o.result;
      char est[32] = "-";
      if (r.certified_bound) std::snprintf(est, sizeof est, "%.3g", *r.certified_bound);
      std::fprintf(stderr, "%-4d %12llu %10.3f %12s  %s\n", mdvi::to_int(o.config.algorithm),
                   static_cast<unsigned long long>(r.iterations), o.wall, est,
                   std::string(to_string(r.termination)).c_str());
    }
  }
  return any_failed ? kExitNoProductive : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mirror descent for constrained variational inequalities"};
  app.require_subcommand(1);

  RunFlags hp_flags, fs_flags, cu_flags;

  auto* hp = app.add_subcommand("hphard", "random monotone affine problem with linear constraints");
  std::int64_t hp_n = 100, hp_m = 10;
  std::uint64_t hp_seed = 0;
  std::string hp_q = "uniform";
  double hp_radius = 1.0;
  hp->add_option("--n", hp_n, "dimension")->check(CLI::PositiveNumber)->capture_default_str();
  hp->add_option("--m", hp_m, "number of constraints")->check(CLI::PositiveNumber)->capture_default_str();
  hp->add_option("--seed", hp_seed, "generator seed")->capture_default_str();
  hp->add_option("--q", hp_q, "offset vector")->check(CLI::IsMember({"zero", "uniform"}))->capture_default_str();
  hp->add_option("--radius", hp_radius, "ball radius")->check(CLI::PositiveNumber)->capture_default_str();
  add_run_flags(hp, hp_flags, 0.05);

  auto* fs = app.add_subcommand("forsaken", "two-player forsaken game inside an ellipse");
  double fs_x0 = 0.0, fs_y0 = 0.0;
  fs->add_option("--x0", fs_x0, "start x")->capture_default_str();
  fs->add_option("--y0", fs_y0, "start y")->capture_default_str();
  add_run_flags(fs, fs_flags, 0.001);

  auto* cu = app.add_subcommand("custom", "problem read from a JSON spec");
  std::string cu_path;
  cu->add_option("spec", cu_path, "problem-spec JSON file")->required()->check(CLI::ExistingFile);
  add_run_flags(cu, cu_flags, 0.05);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (hp->parsed()) {
      mdvi::HpHardSpec spec{hp_n, hp_seed, mdvi::hphard_offset(hp_q, hp_n, hp_seed), hp_radius};
      const auto problem = mdvi::generate_hphard(
          spec, mdvi::generate_linear_constraints({hp_m, hp_n, hp_seed}));
      Job job;
      job.criterion = hp_flags.criterion == 1 ? mdvi::Criterion::kOne : mdvi::Criterion::kTwo;
      return run(problem, hp_flags, job);
    }
    if (fs->parsed()) {
      mdvi::Vector start(2);
      start << fs_x0, fs_y0;
      const mdvi::EuclideanBall probe(mdvi::Vector::Zero(2), mdvi::kForsakenRadius);
      if (!probe.contains(start)) throw UsageError("--x0/--y0 must lie inside the radius-1.2 ball");
      const auto problem = mdvi::forsaken_problem(start);
      Job job;
      job.criterion = mdvi::Criterion::kNone;
      job.default_trace_every = 1;
      job.default_budget = [](mdvi::Algorithm a) -> std::optional<std::uint64_t> {
        return a == mdvi::Algorithm::k6 ? 100000 : 10000;
      };
      job.default_csv = [](mdvi::Algorithm a) {
        return "forsaken_alg" + std::to_string(mdvi::to_int(a)) + ".csv";
      };
      return run(problem, fs_flags, job);
    }
    nlohmann::json spec;
    {
      std::ifstream is(cu_path);
      try {
        spec = nlohmann::json::parse(is);
      } catch (const nlohmann::json::parse_error& e) {
        throw mdvi::SchemaError(std::string("invalid JSON: ") + e.what());
      }
    }
    const auto problem = mdvi::problem_from_json(spec);
    Job job;
    job.criterion = cu_flags.criterion == 1 ? mdvi::Criterion::kOne : mdvi::Criterion::kTwo;
    job.default_delta = problem.op.monotonicity_slack;
    return run(problem, cu_flags, job);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const mdvi::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 1;
  }
}
