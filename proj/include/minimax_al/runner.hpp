#pragma once

/// Experiment runner: executes one algorithm layer on one instance and
/// collects a flat record (config echo, counters, wall time, hyper-objective
/// endpoints, KKT residuals, budget condition); runs suites on a worker pool
/// with canonical output order; serializes records to CSV/markdown/JSON; fits
/// scaling slopes; aggregates result tables.
///
/// Record conventions.  The CSV column order is a stable external interface:
///   instance_id, algo, eps, tau, lambda_cap, outer_iters, grad_f, grad_c,
///   grad_d, prox_p, prox_q, wall_ms, phi_init, phi_final, stat_x, stat_y,
///   feas_c, comp_c, feas_d, comp_d, cond_ok, status
/// Cells that do not apply (NaN doubles, negative iteration counts, missing
/// reports) are empty.  Numbers print via fmt "{}" (shortest round-trip), so
/// two runs of the same suite differ at most in wall_ms.  Wall time is
/// measured around the solve call only and is never used in gates.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "minimax_al/alm.hpp"
#include "minimax_al/budget.hpp"
#include "minimax_al/core.hpp"
#include "minimax_al/foam.hpp"
#include "minimax_al/instances.hpp"
#include "minimax_al/kkt.hpp"
#include "minimax_al/ppa.hpp"

namespace minimax_al {

enum class Algo { foam, ppa, alm };

inline std::string algo_name(Algo a) {
  switch (a) {
    case Algo::foam: return "foam";
    case Algo::ppa: return "ppa";
    case Algo::alm: return "alm";
  }
  return "?";
}

inline std::optional<Algo> algo_from_name(const std::string& s) {
  if (s == "foam") return Algo::foam;
  if (s == "ppa") return Algo::ppa;
  if (s == "alm") return Algo::alm;
  return std::nullopt;
}

struct RunConfig {
  Algo algo = Algo::ppa;
  double eps = 1e-2;
  double eps_hat0 = std::numeric_limits<double>::quiet_NaN();  ///< NaN → eps/2
  double tau = 0.5;
  double Lambda = 10.0;
  bool monitors = false;
};

struct RunRecord {
  std::string instance_id;
  std::string algo;
  double eps = std::numeric_limits<double>::quiet_NaN();
  double tau = std::numeric_limits<double>::quiet_NaN();         ///< alm only
  double lambda_cap = std::numeric_limits<double>::quiet_NaN();  ///< alm only
  long long outer_iters = -1;  ///< negative → not available
  EvalCounters counters;
  double wall_ms = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> phi_init, phi_final;  ///< set only when the oracle converged
  std::optional<KKTReport> kkt;
  int cond_ok = -2;  ///< 1/0/−1 for alm (as in AlmBudget), −2 → not applicable
  std::string status = "ok";
  // Rich fields, serialized in the JSON format only.
  std::map<std::string, double> budget;
  MonitorReport monitors;
  std::vector<std::string> warnings;

  bool ok() const { return status == "ok"; }
};

namespace detail {

/// Unconstrained minimax view of an instance for the independent certifier.
inline MinimaxProblem to_minimax(const QuadraticInstance& q) {
  MinimaxProblem prob;
  prob.f.value = [q](const Vec& x, const Vec& y) { return q.f_value(x, y); };
  prob.f.grad_x = [q](const Vec& x, const Vec& y) { return q.f_grad_x(x, y); };
  prob.f.grad_y = [q](const Vec& x, const Vec& y) { return q.f_grad_y(x, y); };
  prob.f.L_grad = q.consts.L_grad_f;
  prob.f.sigma_y = q.consts.sigma;
  prob.p.domain = q.x_box();
  prob.q.domain = q.y_box();
  return prob;
}

inline void attach_phi(RunRecord& rec, const QuadraticInstance& q, const Vec& x_init,
                       const Vec& x_final) {
  const double tol = q.constrained ? 1e-7 : 1e-8;
  const auto pi = hyper_objective(q, x_init, tol);
  if (pi.converged) rec.phi_init = pi.value;
  const auto pf = hyper_objective(q, x_final, tol);
  if (pf.converged) rec.phi_final = pf.value;
}

inline std::string failure_status(const std::exception& e) {
  if (dynamic_cast<const SolveFailure*>(&e)) return "failed:cap";
  if (dynamic_cast<const std::invalid_argument*>(&e)) return "failed:invalid";
  return "failed:error";
}

}  // namespace detail

/// Run one algorithm on one instance.  Never throws for solver-side failures:
/// the record carries a "failed:…" status instead.  `id_override` replaces the
/// canonical instance id (used for file-based runs, where the id is the stem).
inline RunRecord run_one(const QuadraticInstance& q, const RunConfig& cfg,
                         const std::string& id_override = {}) {
  RunRecord rec;
  rec.instance_id = id_override.empty() ? q.id() : id_override;
  rec.algo = algo_name(cfg.algo);
  rec.eps = cfg.eps;
  if (cfg.algo == Algo::alm) {
    rec.tau = cfg.tau;
    rec.lambda_cap = cfg.Lambda;
  }
  const double eps_hat0 = std::isnan(cfg.eps_hat0) ? cfg.eps / 2.0 : cfg.eps_hat0;

  using clock = std::chrono::steady_clock;
  try {
    switch (cfg.algo) {
      case Algo::foam: {
        if (q.constrained) {
          rec.status = "failed:kind_mismatch";
          return rec;
        }
        if (x_curvature(q) <= 0) {
          rec.status = "failed:not_sccsc";
          return rec;
        }
        const auto sub = make_saddle(q, &rec.counters);
        const Vec x0 = Vec::Ones(q.n), y0 = Vec::Ones(q.m);
        FoamCaps caps;
        caps.value_gap_bound = q.consts.Delta;
        const auto t0 = clock::now();
        const auto cert =
            solve_sccsc(sub, cfg.eps, Vec(-sub.sigma_x * x0), y0, caps, rec.counters);
        rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        rec.outer_iters = cert.outer_iters;
        rec.kkt = kkt_report(detail::to_minimax(q), cert.x, cert.y, Vec(), Vec());
        detail::attach_phi(rec, q, x0, cert.x);
        break;
      }
      case Algo::ppa: {
        if (q.constrained) {
          rec.status = "failed:kind_mismatch";
          return rec;
        }
        const auto prob = make_ncsc(q, &rec.counters);
        PpaCaps caps;
        caps.H0_max = q.consts.F_hi;
        caps.H_star_low = q.consts.F_low;
        caps.H_low = q.consts.H_low;
        const Vec x0 = Vec::Ones(q.n), y0 = Vec::Ones(q.m);
        const auto t0 = clock::now();
        const auto res = solve_ncsc(prob, cfg.eps, eps_hat0, x0, y0, caps, rec.counters);
        rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        rec.outer_iters = res.outer_iters;
        rec.kkt = kkt_report(detail::to_minimax(q), res.x, res.y, Vec(), Vec());
        detail::attach_phi(rec, q, x0, res.x);
        const auto bud = ppa_budget({.L_grad = q.consts.L_grad_f,
                                     .sigma_y = q.consts.sigma,
                                     .D_x = box_diameter(q.x_box()),
                                     .D_y = box_diameter(q.y_box()),
                                     .eps = cfg.eps,
                                     .eps_hat0 = eps_hat0,
                                     .H0_max = q.consts.F_hi,
                                     .H_star_low = q.consts.F_low,
                                     .H_low = q.consts.H_low});
        rec.budget["outer_bound"] = static_cast<double>(bud.outer);
        rec.budget["oracle_bound"] = bud.total_oracle;
        rec.budget["value_growth"] = bud.value_growth;
        break;
      }
      case Algo::alm: {
        if (!q.constrained) {
          rec.status = "failed:kind_mismatch";
          return rec;
        }
        const auto P = make_constrained(q);
        AlmOptions opt;
        opt.eps = cfg.eps;
        opt.tau = cfg.tau;
        opt.Lambda = cfg.Lambda;
        opt.monitors = cfg.monitors;
        const Vec x0 = Vec::Zero(q.n), y0 = Vec::Zero(q.m);
        Vec x_nf = q.x_nf;
        const auto t0 = clock::now();
        if (q.c_value(x_nf).cwiseMax(0.0).norm() > std::sqrt(cfg.eps))
          x_nf = find_nearly_feasible(*P.base.c, P.base.p.domain, x_nf,
                                      0.5 * std::sqrt(cfg.eps), 100000, &rec.counters);
        const auto res = solve_constrained(P, opt, x0, y0, x_nf, rec.counters);
        rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        rec.outer_iters = res.outer_iters;
        rec.monitors = res.monitors;
        rec.kkt = kkt_report(P.base, res.x, res.y, res.lambda_x_tilde, res.lambda_y);
        detail::attach_phi(rec, q, x0, res.x);
        AlmBudgetInputs bi;
        bi.L_grad_f = q.consts.L_grad_f;
        bi.L_c = q.consts.L_c;
        bi.L_grad_c = q.consts.L_grad_c;
        bi.c_hi = q.consts.c_hi;
        bi.L_d = q.consts.L_d;
        bi.L_grad_d = q.consts.L_grad_d;
        bi.d_hi = q.consts.d_hi;
        bi.sigma = q.consts.sigma;
        bi.Delta = q.consts.Delta;
        bi.D_x = box_diameter(q.x_box());
        bi.D_y = box_diameter(q.y_box());
        bi.Lambda = cfg.Lambda;
        bi.norm_ly0 = 0.0;
        bi.eps = cfg.eps;
        bi.tau = cfg.tau;
        bi.delta_c = q.consts.delta_c;
        bi.delta_d = q.consts.delta_d;
        bi.theta = q.consts.theta;
        bi.L_F = q.consts.L_F;
        const auto bud = alm_budget(bi);
        rec.cond_ok = bud.cond_ok;
        rec.budget["K"] = static_cast<double>(bud.K);
        rec.budget["T"] = static_cast<double>(bud.T);
        rec.budget["N"] = bud.N;
        rec.budget["L"] = bud.L;
        rec.budget["cond_required"] = bud.cond_required;
        rec.budget["feas_c_factor"] = bud.feas_c_factor;
        rec.budget["comp_c_factor"] = bud.comp_c_factor;
        rec.budget["feas_d_factor"] = bud.feas_d_factor;
        rec.budget["comp_d_factor"] = bud.comp_d_factor;
        break;
      }
    }
  } catch (const std::exception& e) {
    rec.status = detail::failure_status(e);
    rec.warnings.push_back(e.what());
  }
  return rec;
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

/// Expand a suite argument: a directory (all *.json inside, sorted) or a
/// single file.  Throws when nothing is found.
inline std::vector<std::filesystem::path> suite_paths(const std::string& suite) {
  namespace fs = std::filesystem;
  std::vector<fs::path> out;
  const fs::path p(suite);
  if (fs::is_directory(p)) {
    for (const auto& e : fs::directory_iterator(p))
      if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
    std::sort(out.begin(), out.end());
  } else if (fs::is_regular_file(p)) {
    out.push_back(p);
  }
  detail::require(!out.empty(), "suite: no instance files found at " + suite);
  return out;
}

/// Run a suite on a worker pool.  Records come back sorted by instance id; a
/// failed load or solve contributes a failed record instead of aborting.
inline std::vector<RunRecord> run_suite(const std::vector<std::filesystem::path>& paths,
                                        const RunConfig& cfg, int jobs) {
  detail::require(jobs >= 1, "run_suite: jobs must be ≥ 1");
  std::vector<RunRecord> records(paths.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= paths.size()) return;
      const std::string id = paths[i].stem().string();
      try {
        std::vector<std::string> warnings;
        const auto q = load_instance(paths[i].string(), &warnings);
        records[i] = run_one(q, cfg, id);
        records[i].warnings.insert(records[i].warnings.begin(), warnings.begin(),
                                   warnings.end());
      } catch (const std::exception& e) {
        RunRecord rec;
        rec.instance_id = id;
        rec.algo = algo_name(cfg.algo);
        rec.eps = cfg.eps;
        if (cfg.algo == Algo::alm) {
          rec.tau = cfg.tau;
          rec.lambda_cap = cfg.Lambda;
        }
        rec.status = "failed:load";
        rec.warnings.push_back(e.what());
        records[i] = std::move(rec);
      }
    }
  };
  if (jobs == 1 || paths.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int nw = std::min<int>(jobs, static_cast<int>(paths.size()));
    pool.reserve(nw);
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::sort(records.begin(), records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              return a.instance_id < b.instance_id;
            });
  return records;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline std::string cell(double v) { return std::isnan(v) ? "" : fmt::format("{}", v); }
inline std::string cell(long long v) { return v < 0 ? "" : fmt::format("{}", v); }
inline std::string cell(const std::optional<double>& v) {
  return v ? fmt::format("{}", *v) : "";
}

inline std::vector<std::string> record_cells(const RunRecord& r) {
  std::vector<std::string> c;
  c.push_back(r.instance_id);
  c.push_back(r.algo);
  c.push_back(cell(r.eps));
  c.push_back(cell(r.tau));
  c.push_back(cell(r.lambda_cap));
  c.push_back(cell(r.outer_iters));
  c.push_back(fmt::format("{}", r.counters.grad_f));
  c.push_back(fmt::format("{}", r.counters.grad_c));
  c.push_back(fmt::format("{}", r.counters.grad_d));
  c.push_back(fmt::format("{}", r.counters.prox_p));
  c.push_back(fmt::format("{}", r.counters.prox_q));
  c.push_back(cell(r.wall_ms));
  c.push_back(cell(r.phi_init));
  c.push_back(cell(r.phi_final));
  c.push_back(r.kkt ? fmt::format("{}", r.kkt->stat_x) : "");
  c.push_back(r.kkt ? fmt::format("{}", r.kkt->stat_y) : "");
  c.push_back(r.kkt ? fmt::format("{}", r.kkt->feas_c) : "");
  c.push_back(r.kkt ? fmt::format("{}", r.kkt->comp_c) : "");
  c.push_back(r.kkt ? fmt::format("{}", r.kkt->feas_d) : "");
  c.push_back(r.kkt ? fmt::format("{}", r.kkt->comp_d) : "");
  c.push_back(r.cond_ok == -2 ? "" : fmt::format("{}", r.cond_ok));
  c.push_back(r.status);
  return c;
}

inline std::string join(const std::vector<std::string>& cells, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += sep;
    out += cells[i];
  }
  return out;
}

}  // namespace detail

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols = {
      "instance_id", "algo",   "eps",     "tau",      "lambda_cap", "outer_iters",
      "grad_f",      "grad_c", "grad_d",  "prox_p",   "prox_q",     "wall_ms",
      "phi_init",    "phi_final", "stat_x", "stat_y", "feas_c",     "comp_c",
      "feas_d",      "comp_d", "cond_ok", "status"};
  return cols;
}

inline std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::string out = detail::join(record_columns(), ",") + "\n";
  for (const auto& r : records) out += detail::join(detail::record_cells(r), ",") + "\n";
  return out;
}

inline std::string records_to_markdown(const std::vector<RunRecord>& records) {
  std::string out = "| " + detail::join(record_columns(), " | ") + " |\n";
  out += "|";
  for (std::size_t i = 0; i < record_columns().size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& r : records)
    out += "| " + detail::join(detail::record_cells(r), " | ") + " |\n";
  return out;
}

inline std::string records_to_json(const std::vector<RunRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j;
    j["instance_id"] = r.instance_id;
    j["algo"] = r.algo;
    j["eps"] = detail::num_or_null(r.eps);
    j["tau"] = detail::num_or_null(r.tau);
    j["lambda_cap"] = detail::num_or_null(r.lambda_cap);
    j["outer_iters"] = r.outer_iters;
    j["grad_f"] = r.counters.grad_f;
    j["grad_c"] = r.counters.grad_c;
    j["grad_d"] = r.counters.grad_d;
    j["prox_p"] = r.counters.prox_p;
    j["prox_q"] = r.counters.prox_q;
    j["wall_ms"] = detail::num_or_null(r.wall_ms);
    j["phi_init"] = r.phi_init ? nlohmann::json(*r.phi_init) : nlohmann::json(nullptr);
    j["phi_final"] = r.phi_final ? nlohmann::json(*r.phi_final) : nlohmann::json(nullptr);
    if (r.kkt) {
      j["kkt"] = {{"stat_x", r.kkt->stat_x},   {"stat_y", r.kkt->stat_y},
                  {"feas_c", r.kkt->feas_c},   {"comp_c", r.kkt->comp_c},
                  {"feas_d", r.kkt->feas_d},   {"comp_d", r.kkt->comp_d},
                  {"surrogate", r.kkt->surrogate}};
    } else {
      j["kkt"] = nullptr;
    }
    j["cond_ok"] = r.cond_ok == -2 ? nlohmann::json(nullptr) : nlohmann::json(r.cond_ok);
    j["status"] = r.status;
    if (!r.budget.empty()) {
      nlohmann::json b;
      for (const auto& [k, v] : r.budget) b[k] = detail::num_or_null(v);
      j["budget"] = std::move(b);
    }
    if (r.monitors.enabled) {
      j["monitors"] = {
          {"multiplier_drift_checks", r.monitors.multiplier_drift_checks},
          {"multiplier_drift_violations", r.monitors.multiplier_drift_violations},
          {"y_feasibility_checks", r.monitors.y_feasibility_checks},
          {"y_feasibility_violations", r.monitors.y_feasibility_violations},
          {"start_value_checks", r.monitors.start_value_checks},
          {"start_value_violations", r.monitors.start_value_violations},
          {"subproblem_value_checks", r.monitors.subproblem_value_checks},
          {"subproblem_value_violations", r.monitors.subproblem_value_violations}};
    }
    if (!r.warnings.empty()) j["warnings"] = r.warnings;
    arr.push_back(std::move(j));
  }
  return arr.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Scaling study
// ---------------------------------------------------------------------------

/// Least-squares slope of log(count) against log(eps).  Undefined (nullopt)
/// when fewer than two distinct eps values carry a positive mean count.
inline std::optional<double> fit_loglog_slope(const std::vector<double>& eps,
                                              const std::vector<double>& counts) {
  detail::require(eps.size() == counts.size(), "fit_loglog_slope: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i] > 0 && counts[i] > 0) {
      lx.push_back(std::log(eps[i]));
      ly.push_back(std::log(counts[i]));
    }
  }
  if (lx.size() < 2) return std::nullopt;
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12 * (1.0 + sxx)) return std::nullopt;
  return (n * sxy - sx * sy) / denom;
}

struct ScalingPoint {
  double eps = 0;
  int runs = 0;     ///< successful runs aggregated
  int failed = 0;
  double mean_grad_f = 0, mean_grad_c = 0, mean_grad_d = 0;
  double mean_total_gradients = 0;
  double mean_outer = 0;
};

struct ScalingReport {
  std::string algo;
  std::vector<ScalingPoint> points;          ///< one per eps, input order
  std::optional<double> slope;               ///< log(total gradients) vs log(eps)
  std::string slope_note;                    ///< "ok" or why it is undefined
  std::vector<RunRecord> records;            ///< all underlying records
};

struct ScalingSpec {
  bool constrained = false;
  int n = 20, m = 20, nt = 2, mt = 4;
  std::vector<double> eps_grid;
  int seeds = 5;
  std::uint64_t seed_base = 1;
  RunConfig base;  ///< algo/tau/Lambda/monitors; eps comes from the grid
  int jobs = 1;
};

inline ScalingReport run_scaling(const ScalingSpec& spec) {
  detail::require(spec.eps_grid.size() >= 3, "scaling: need at least 3 eps values");
  detail::require(spec.seeds >= 5, "scaling: need at least 5 seeds");
  ScalingReport rep;
  rep.algo = algo_name(spec.base.algo);

  struct Task {
    double eps;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const double e : spec.eps_grid)
    for (int s = 0; s < spec.seeds; ++s)
      tasks.push_back({e, spec.seed_base + static_cast<std::uint64_t>(s)});

  std::vector<RunRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const auto q = spec.constrained
                         ? gen_constrained(spec.n, spec.m, spec.nt, spec.mt, tasks[i].seed)
                         : gen_unconstrained(spec.n, spec.m, tasks[i].seed);
      RunConfig cfg = spec.base;
      cfg.eps = tasks[i].eps;
      cfg.eps_hat0 = std::isnan(spec.base.eps_hat0) ? tasks[i].eps / 2.0
                                                    : spec.base.eps_hat0;
      records[i] = run_one(q, cfg);
    }
  };
  if (spec.jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int nw = std::min<int>(spec.jobs, static_cast<int>(tasks.size()));
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> eps_list, mean_list;
  for (std::size_t e = 0; e < spec.eps_grid.size(); ++e) {
    ScalingPoint pt;
    pt.eps = spec.eps_grid[e];
    for (int s = 0; s < spec.seeds; ++s) {
      const auto& r = records[e * spec.seeds + s];
      if (!r.ok()) {
        ++pt.failed;
        continue;
      }
      ++pt.runs;
      pt.mean_grad_f += static_cast<double>(r.counters.grad_f);
      pt.mean_grad_c += static_cast<double>(r.counters.grad_c);
      pt.mean_grad_d += static_cast<double>(r.counters.grad_d);
      pt.mean_outer += static_cast<double>(std::max<long long>(r.outer_iters, 0));
    }
    if (pt.runs > 0) {
      pt.mean_grad_f /= pt.runs;
      pt.mean_grad_c /= pt.runs;
      pt.mean_grad_d /= pt.runs;
      pt.mean_outer /= pt.runs;
      pt.mean_total_gradients = pt.mean_grad_f + pt.mean_grad_c + pt.mean_grad_d;
    }
    rep.points.push_back(pt);
    eps_list.push_back(pt.eps);
    mean_list.push_back(pt.mean_total_gradients);
  }
  rep.slope = fit_loglog_slope(eps_list, mean_list);
  rep.slope_note = rep.slope ? "ok" : "undefined";
  rep.records = std::move(records);
  std::sort(rep.records.begin(), rep.records.end(),
            [](const RunRecord& a, const RunRecord& b) {
              return a.eps != b.eps ? a.eps > b.eps : a.instance_id < b.instance_id;
            });
  return rep;
}

inline std::string scaling_to_csv(const ScalingReport& rep) {
  std::string out =
      "eps,runs,failed,mean_grad_f,mean_grad_c,mean_grad_d,mean_total_gradients,"
      "mean_outer_iters\n";
  for (const auto& p : rep.points)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", p.eps, p.runs, p.failed,
                       p.mean_grad_f, p.mean_grad_c, p.mean_grad_d,
                       p.mean_total_gradients, p.mean_outer);
  out += fmt::format("# slope={}\n",
                     rep.slope ? fmt::format("{}", *rep.slope) : "undefined");
  return out;
}

inline std::string scaling_to_markdown(const ScalingReport& rep) {
  std::string out =
      "| eps | runs | failed | mean grad_f | mean grad_c | mean grad_d | mean total "
      "gradients | mean outer iters |\n| --- | --- | --- | --- | --- | --- | --- | --- "
      "|\n";
  for (const auto& p : rep.points)
    out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} |\n", p.eps, p.runs,
                       p.failed, p.mean_grad_f, p.mean_grad_c, p.mean_grad_d,
                       p.mean_total_gradients, p.mean_outer);
  out += fmt::format("\nFitted log-log slope ({}): {}\n", rep.algo,
                     rep.slope ? fmt::format("{}", *rep.slope) : "undefined");
  return out;
}

inline std::string scaling_to_json(const ScalingReport& rep) {
  nlohmann::json j;
  j["algo"] = rep.algo;
  j["slope"] = rep.slope ? nlohmann::json(*rep.slope) : nlohmann::json(nullptr);
  j["slope_note"] = rep.slope_note;
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : rep.points)
    pts.push_back({{"eps", p.eps},
                   {"runs", p.runs},
                   {"failed", p.failed},
                   {"mean_grad_f", p.mean_grad_f},
                   {"mean_grad_c", p.mean_grad_c},
                   {"mean_grad_d", p.mean_grad_d},
                   {"mean_total_gradients", p.mean_total_gradients},
                   {"mean_outer_iters", p.mean_outer}});
  j["points"] = std::move(pts);
  return j.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Result-table aggregation
// ---------------------------------------------------------------------------

struct TableGroup {
  std::string group;  ///< e.g. "constrained n=20 m=40 nt=2 mt=4"
  int runs = 0;
  int phi_runs = 0;  ///< rows contributing to the Φ means
  double mean_phi_init = std::numeric_limits<double>::quiet_NaN();
  double mean_phi_final = std::numeric_limits<double>::quiet_NaN();
  double mean_wall_ms = std::numeric_limits<double>::quiet_NaN();
};

struct ResultTable {
  std::vector<TableGroup> groups;
  int excluded_failed = 0;
};

namespace detail {

/// Splits one CSV line; our writer never quotes or embeds separators.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

/// "constrained_n20_m40_nt2_mt4_s11" → "constrained n=20 m=40 nt=2 mt=4";
/// ids that do not follow the generator pattern group under their full name.
inline std::string table_group_key(const std::string& id) {
  const auto cut = id.rfind("_s");
  if (cut == std::string::npos || cut == 0) return id;
  std::string head = id.substr(0, cut);
  for (auto& ch : head)
    if (ch == '_') ch = ' ';
  // insert '=' between dimension letters and digits: "n20" → "n=20"
  std::string out;
  for (std::size_t i = 0; i < head.size(); ++i) {
    out += head[i];
    if (i + 1 < head.size() && std::isalpha(static_cast<unsigned char>(head[i])) &&
        std::isdigit(static_cast<unsigned char>(head[i + 1])))
      out += '=';
  }
  return out;
}

}  // namespace detail

/// Aggregate a results CSV (as written by records_to_csv) into per-dimension
/// groups.  Failed rows are excluded and counted; Φ means use only rows where
/// both endpoints are present.
inline ResultTable aggregate_table(std::istream& in) {
  std::string header;
  detail::require(static_cast<bool>(std::getline(in, header)),
                  "table: empty results input");
  detail::require(detail::split_csv_line(header) == record_columns(),
                  "table: unrecognized results header");
  struct Acc {
    int runs = 0, phi_runs = 0, wall_runs = 0;
    double phi_i = 0, phi_f = 0, wall = 0;
  };
  std::map<std::string, Acc> acc;
  int excluded = 0, rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    detail::require(cells.size() == record_columns().size(), "table: malformed row");
    ++rows;
    if (cells[21] != "ok") {
      ++excluded;
      continue;
    }
    auto& a = acc[detail::table_group_key(cells[0])];
    ++a.runs;
    if (!cells[11].empty()) {
      a.wall += std::stod(cells[11]);
      ++a.wall_runs;
    }
    if (!cells[12].empty() && !cells[13].empty()) {
      a.phi_i += std::stod(cells[12]);
      a.phi_f += std::stod(cells[13]);
      ++a.phi_runs;
    }
  }
  detail::require(rows > 0, "table: no data rows");
  ResultTable t;
  t.excluded_failed = excluded;
  for (const auto& [key, a] : acc) {
    TableGroup g;
    g.group = key;
    g.runs = a.runs;
    g.phi_runs = a.phi_runs;
    if (a.phi_runs > 0) {
      g.mean_phi_init = a.phi_i / a.phi_runs;
      g.mean_phi_final = a.phi_f / a.phi_runs;
    }
    if (a.wall_runs > 0) g.mean_wall_ms = a.wall / a.wall_runs;
    t.groups.push_back(std::move(g));
  }
  return t;
}

inline std::string table_to_markdown(const ResultTable& t) {
  std::string out =
      "| group | runs | mean phi_init | mean phi_final | mean wall_ms |\n"
      "| --- | --- | --- | --- | --- |\n";
  for (const auto& g : t.groups)
    out += fmt::format("| {} | {} | {} | {} | {} |\n", g.group, g.runs,
                       detail::cell(g.mean_phi_init), detail::cell(g.mean_phi_final),
                       detail::cell(g.mean_wall_ms));
  if (t.excluded_failed > 0)
    out += fmt::format("\n{} failed run(s) excluded.\n", t.excluded_failed);
  return out;
}

inline std::string table_to_csv(const ResultTable& t) {
  std::string out = "group,runs,mean_phi_init,mean_phi_final,mean_wall_ms\n";
  for (const auto& g : t.groups)
    out += fmt::format("{},{},{},{},{}\n", g.group, g.runs, detail::cell(g.mean_phi_init),
                       detail::cell(g.mean_phi_final), detail::cell(g.mean_wall_ms));
  if (t.excluded_failed > 0) out += fmt::format("# excluded_failed={}\n", t.excluded_failed);
  return out;
}

inline std::string table_to_json(const ResultTable& t) {
  nlohmann::json j;
  j["excluded_failed"] = t.excluded_failed;
  nlohmann::json gs = nlohmann::json::array();
  for (const auto& g : t.groups)
    gs.push_back({{"group", g.group},
                  {"runs", g.runs},
                  {"phi_runs", g.phi_runs},
                  {"mean_phi_init", detail::num_or_null(g.mean_phi_init)},
                  {"mean_phi_final", detail::num_or_null(g.mean_phi_final)},
                  {"mean_wall_ms", detail::num_or_null(g.mean_wall_ms)}});
  j["groups"] = std::move(gs);
  return j.dump(1) + "\n";
}

}  // namespace minimax_al
