/// Command-line front end: generate instance suites, run solvers over them,
/// sweep accuracy grids for scaling studies, and aggregate result tables.
///
/// Verbs:
///   gen      write seeded instances as JSON files into a directory
///   solve    run one algorithm over a suite, emit one record per instance
///   scaling  run an eps grid over fresh seeded instances, fit a slope
///   table    aggregate a results CSV into per-dimension group means
///
/// Exit code: 0 when every run succeeded, 1 when any record failed or the
/// arguments were unusable.  A failed run never aborts the rest of a suite.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <minimax_al/instances.hpp>
#include <minimax_al/runner.hpp>

namespace {

using namespace minimax_al;

int default_jobs() {
  if (const char* env = std::getenv("MINIMAX_AL_JOBS")) {
    try {
      const int j = std::stoi(env);
      if (j >= 1) return j;
    } catch (...) {
    }
    std::cerr << "warning: ignoring non-positive MINIMAX_AL_JOBS=" << env << "\n";
  }
  return 1;
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out.good()) throw std::runtime_error("cannot open output file " + out_path);
  out << text;
}

struct GenArgs {
  std::string kind;
  int n = 0, m = 0, nt = 0, mt = 0;
  int seeds = 1;
  std::uint64_t seed_base = 1;
  std::string out = ".";
};

int cmd_gen(const GenArgs& a) {
  const bool constrained = a.kind == "constrained";
  if (!constrained && a.kind != "unconstrained")
    throw CLI::ValidationError("--kind must be unconstrained or constrained");
  if (constrained && (a.nt <= 0 || a.mt <= 0))
    throw CLI::ValidationError("constrained instances need --nt and --mt");
  std::filesystem::create_directories(a.out);
  for (int s = 0; s < a.seeds; ++s) {
    const std::uint64_t seed = a.seed_base + static_cast<std::uint64_t>(s);
    const QuadraticInstance q = constrained
                                    ? gen_constrained(a.n, a.m, a.nt, a.mt, seed)
                                    : gen_unconstrained(a.n, a.m, seed);
    const auto path = std::filesystem::path(a.out) / (q.id() + ".json");
    save_instance(q, path.string());
    std::cout << path.string() << "\n";
  }
  return 0;
}

struct SolveArgs {
  std::string algo;
  std::string suite;
  double eps = 1e-2;
  double eps_hat0 = std::numeric_limits<double>::quiet_NaN();
  double tau = 0.5;
  double lambda_cap = 10.0;
  std::string monitors = "off";
  int jobs = 1;
  std::string out;
  std::string format = "csv";
};

std::string render_records(const std::vector<RunRecord>& records, const std::string& fmt) {
  if (fmt == "csv") return records_to_csv(records);
  if (fmt == "md") return records_to_markdown(records);
  if (fmt == "json") return records_to_json(records);
  throw CLI::ValidationError("--format must be csv, md, or json");
}

int cmd_solve(const SolveArgs& a) {
  const auto algo = algo_from_name(a.algo);
  if (!algo) throw CLI::ValidationError("--algo must be foam, ppa, or alm");
  RunConfig cfg;
  cfg.algo = *algo;
  cfg.eps = a.eps;
  cfg.eps_hat0 = a.eps_hat0;
  cfg.tau = a.tau;
  cfg.Lambda = a.lambda_cap;
  cfg.monitors = a.monitors == "on";
  const auto records = run_suite(suite_paths(a.suite), cfg, a.jobs);
  write_output(a.out, render_records(records, a.format));
  int failed = 0;
  for (const auto& r : records) {
    if (!r.ok()) ++failed;
    for (const auto& w : r.warnings)
      std::cerr << "note [" << r.instance_id << "]: " << w << "\n";
  }
  if (failed > 0) std::cerr << failed << " run(s) failed\n";
  return failed > 0 ? 1 : 0;
}

struct ScalingArgs {
  std::string algo;
  std::string kind;
  int n = 20, m = 20, nt = 2, mt = 4;
  std::vector<double> eps_grid;
  int seeds = 5;
  std::uint64_t seed_base = 1;
  double tau = 0.5;
  double lambda_cap = 10.0;
  int jobs = 1;
  std::string out;
  std::string format = "csv";
};

int cmd_scaling(const ScalingArgs& a) {
  const auto algo = algo_from_name(a.algo);
  if (!algo) throw CLI::ValidationError("--algo must be foam, ppa, or alm");
  if (a.eps_grid.size() < 3)
    throw CLI::ValidationError("scaling needs at least 3 --eps values");
  if (a.seeds < 5) throw CLI::ValidationError("scaling needs at least 5 seeds");
  ScalingSpec spec;
  spec.constrained = a.kind.empty() ? (*algo == Algo::alm) : a.kind == "constrained";
  if (!a.kind.empty() && a.kind != "constrained" && a.kind != "unconstrained")
    throw CLI::ValidationError("--kind must be unconstrained or constrained");
  spec.n = a.n;
  spec.m = a.m;
  spec.nt = a.nt;
  spec.mt = a.mt;
  spec.eps_grid = a.eps_grid;
  spec.seeds = a.seeds;
  spec.seed_base = a.seed_base;
  spec.base.algo = *algo;
  spec.base.tau = a.tau;
  spec.base.Lambda = a.lambda_cap;
  spec.jobs = a.jobs;
  const auto rep = run_scaling(spec);
  std::string text;
  if (a.format == "csv") text = scaling_to_csv(rep);
  else if (a.format == "md") text = scaling_to_markdown(rep);
  else if (a.format == "json") text = scaling_to_json(rep);
  else throw CLI::ValidationError("--format must be csv, md, or json");
  write_output(a.out, text);
  std::cerr << fmt::format(
      "slope({}) = {}\n", rep.algo,
      rep.slope ? fmt::format("{}", *rep.slope) : std::string("undefined"));
  int failed = 0;
  for (const auto& p : rep.points) failed += p.failed;
  if (failed > 0) std::cerr << failed << " run(s) failed\n";
  return failed > 0 ? 1 : 0;
}

struct TableArgs {
  std::string input;
  std::string out;
  std::string format = "md";
};

int cmd_table(const TableArgs& a) {
  std::ifstream in(a.input);
  if (!in.good()) throw CLI::ValidationError("cannot open results file " + a.input);
  const auto table = aggregate_table(in);
  std::string text;
  if (a.format == "md") text = table_to_markdown(table);
  else if (a.format == "csv") text = table_to_csv(table);
  else if (a.format == "json") text = table_to_json(table);
  else throw CLI::ValidationError("--format must be csv, md, or json");
  write_output(a.out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Layered first-order solvers for constrained minimax problems"};
  app.require_subcommand(1);
  const int jobs0 = default_jobs();

  GenArgs g;
  auto* gen = app.add_subcommand("gen", "Generate seeded instances as JSON files");
  gen->add_option("--kind", g.kind, "unconstrained | constrained")->required();
  gen->add_option("--n", g.n, "x dimension")->required()->check(CLI::PositiveNumber);
  gen->add_option("--m", g.m, "y dimension")->required()->check(CLI::PositiveNumber);
  gen->add_option("--nt", g.nt, "number of x constraints (constrained only)");
  gen->add_option("--mt", g.mt, "number of y constraints (constrained only)");
  gen->add_option("--seeds", g.seeds, "how many seeds")->check(CLI::PositiveNumber);
  gen->add_option("--seed-base", g.seed_base, "first seed (default 1)");
  gen->add_option("--out", g.out, "output directory (default .)");

  SolveArgs s;
  auto* solve = app.add_subcommand("solve", "Run one algorithm over a suite");
  solve->add_option("--algo", s.algo, "foam | ppa | alm")->required();
  solve->add_option("--suite", s.suite, "instance file or directory")->required();
  solve->add_option("--eps", s.eps, "target accuracy (default 1e-2)")
      ->check(CLI::PositiveNumber);
  solve->add_option("--eps-hat0", s.eps_hat0, "initial subproblem accuracy (default eps/2)");
  solve->add_option("--tau", s.tau, "accuracy decay factor (alm, default 0.5)");
  solve->add_option("--lambda-cap", s.lambda_cap, "multiplier safeguard radius (alm)");
  solve->add_option("--monitors", s.monitors, "on | off (alm invariant checks)")
      ->check(CLI::IsMember({"on", "off"}));
  solve->add_option("--jobs", s.jobs, "worker threads (default $MINIMAX_AL_JOBS or 1)")
      ->default_val(jobs0)
      ->check(CLI::PositiveNumber);
  solve->add_option("--out", s.out, "output file (default stdout)");
  solve->add_option("--format", s.format, "csv | md | json (default csv)");

  ScalingArgs c;
  auto* scaling = app.add_subcommand("scaling", "Accuracy sweep with slope fit");
  scaling->add_option("--algo", c.algo, "foam | ppa | alm")->required();
  scaling->add_option("--kind", c.kind, "instance kind (default matches algo)");
  scaling->add_option("--n", c.n, "x dimension (default 20)")->check(CLI::PositiveNumber);
  scaling->add_option("--m", c.m, "y dimension (default 20)")->check(CLI::PositiveNumber);
  scaling->add_option("--nt", c.nt, "x constraints (default 2)");
  scaling->add_option("--mt", c.mt, "y constraints (default 4)");
  scaling->add_option("--eps", c.eps_grid, "accuracy grid, at least 3 values")
      ->required()
      ->delimiter(',');
  scaling->add_option("--seeds", c.seeds, "seeds per eps, at least 5");
  scaling->add_option("--seed-base", c.seed_base, "first seed (default 1)");
  scaling->add_option("--tau", c.tau, "accuracy decay factor (alm)");
  scaling->add_option("--lambda-cap", c.lambda_cap, "multiplier safeguard radius (alm)");
  scaling->add_option("--jobs", c.jobs, "worker threads")
      ->default_val(jobs0)
      ->check(CLI::PositiveNumber);
  scaling->add_option("--out", c.out, "output file (default stdout)");
  scaling->add_option("--format", c.format, "csv | md | json (default csv)");

  TableArgs t;
  auto* table = app.add_subcommand("table", "Aggregate a results CSV into group means");
  table->add_option("input", t.input, "results CSV from solve")->required();
  table->add_option("--out", t.out, "output file (default stdout)");
  table->add_option("--format", t.format, "md | csv | json (default md)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(g);
    if (solve->parsed()) return cmd_solve(s);
    if (scaling->parsed()) return cmd_scaling(c);
    if (table->parsed()) return cmd_table(t);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
