#ifndef PFKM_PIPELINE_HPP
#define PFKM_PIPELINE_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pfkm/core.hpp"
#include "pfkm/dataset.hpp"
#include "pfkm/kmedian.hpp"
#include "pfkm/lp_relaxation.hpp"
#include "pfkm/repair.hpp"
#include "pfkm/transport.hpp"

namespace pfkm {

enum class DMode { ExactPairwise, Geometric };

struct RunConfig {
  DMode d_mode = DMode::Geometric;
  double geometric_base = 1.1;
  std::uint64_t seed = 1;
  bool post_process = true;
  bool emit_lp_dumps = false;
  bool emit_repair_traces = false;
  long long max_local_search_iters = -1;
  int threads = 0;  // 0 = hardware concurrency
};

struct ComponentReport {
  std::vector<CenterId> centers;
  int num_points = 0;
  double hop_bound = 0.0;
  double max_pair_distance = 0.0;
  double lp_objective = 0.0;
  double sigma_int_cost = 0.0;
  double repaired_cost = 0.0;
  int s_initial = 0;
  int gamma = 0;
  int moved_second_case = 0;
  int moved_total = 0;
  int iterations = 0;
  bool lprime_init_divergent = false;
  std::vector<std::string> trace;  // JSON lines when enabled
};

struct CandidateReport {
  double d = 0.0;
  std::string status;  // feasible | infeasible | structurally_infeasible
  double lp_objective = 0.0;
  double solution_cost = 0.0;
  double post_cost = 0.0;
  std::vector<ComponentReport> components;
  std::string lp_dump;  // MPS text when enabled
};

struct RunReport {
  int n = 0, k = 0, t = 0, ell = 0;
  std::uint64_t seed = 0;
  double vanilla_cost = 0.0;
  std::vector<CenterId> centers;
  double fair_cost_pre_post = 0.0;
  double fair_cost = 0.0;
  double chosen_d = -1.0;
  bool post_processed = false;
  std::vector<CandidateReport> candidates;
  double time_vanilla_s = 0.0;
  double time_sweep_s = 0.0;
  double time_total_s = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : candidates) {
      nlohmann::json comps = nlohmann::json::array();
      for (const auto& comp : c.components) {
        nlohmann::json jc = {{"centers", comp.centers},
                             {"num_points", comp.num_points},
                             {"hop_bound", comp.hop_bound},
                             {"max_pair_distance", comp.max_pair_distance},
                             {"lp_objective", comp.lp_objective},
                             {"sigma_int_cost", comp.sigma_int_cost},
                             {"repaired_cost", comp.repaired_cost},
                             {"s_initial", comp.s_initial},
                             {"gamma", comp.gamma},
                             {"moved_second_case", comp.moved_second_case},
                             {"moved_total", comp.moved_total},
                             {"iterations", comp.iterations},
                             {"lprime_init_divergent", comp.lprime_init_divergent}};
        if (!comp.trace.empty()) jc["trace"] = comp.trace;
        comps.push_back(std::move(jc));
      }
      nlohmann::json jc = {{"d", c.d},
                           {"status", c.status},
                           {"lp_objective", c.lp_objective},
                           {"solution_cost", c.solution_cost},
                           {"post_cost", c.post_cost},
                           {"components", std::move(comps)}};
      if (!c.lp_dump.empty()) jc["lp_mps"] = c.lp_dump;
      cands.push_back(std::move(jc));
    }
    return {{"n", n},
            {"k", k},
            {"t", t},
            {"ell", ell},
            {"seed", seed},
            {"vanilla_cost", vanilla_cost},
            {"centers", centers},
            {"fair_cost_pre_post", fair_cost_pre_post},
            {"fair_cost", fair_cost},
            {"chosen_d", chosen_d},
            {"post_processed", post_processed},
            {"candidates", std::move(cands)},
            {"timings",
             {{"vanilla_s", time_vanilla_s}, {"sweep_s", time_sweep_s}, {"total_s", time_total_s}}}};
  }
};

struct PipelineResult {
  Solution solution;
  RunReport report;
};

/// Radius grid for the sweep: every distinct point-center distance, or the
/// geometric grid delta * base^j topped off with the maximum distance.
inline std::vector<double> d_candidates(const Instance& inst, const std::vector<CenterId>& centers,
                                        DMode mode, double base = 1.1) {
  if (centers.empty()) throw std::invalid_argument("d_candidates: no centers");
  double max_d = 0.0;
  for (PointId p = 0; p < inst.n(); ++p)
    for (CenterId c : centers) max_d = std::max(max_d, inst.distance(p, c));

  std::vector<double> out;
  if (mode == DMode::ExactPairwise) {
    std::set<double> values;
    for (PointId p = 0; p < inst.n(); ++p)
      for (CenterId c : centers) values.insert(inst.distance(p, c));
    out.assign(values.begin(), values.end());
    return out;
  }

  if (base <= 1.0) throw std::invalid_argument("d_candidates: geometric base must exceed 1");
  double delta = inst.min_positive_distance();
  if (delta <= 0.0) return {max_d};  // all points co-located
  for (double v = delta; v <= max_d; v *= base) out.push_back(v);
  if (out.empty() || out.back() < max_d) out.push_back(max_d);
  return out;
}

namespace detail {

inline void run_indexed(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::string trace_event_json(const RepairTraceEvent& ev) {
  nlohmann::json moves = nlohmann::json::array();
  for (const auto& m : ev.moves) moves.push_back({{"client", m.client}, {"from", m.from}, {"to", m.to}});
  nlohmann::json j = {{"iteration", ev.iteration},
                      {"case", ev.case_taken},
                      {"client", ev.client},
                      {"target", ev.target},
                      {"moves", std::move(moves)},
                      {"lprime", ev.lprime_after}};
  return j.dump();
}

struct CandidateSolution {
  bool feasible = false;
  std::vector<CenterId> assignment;       // repaired
  std::vector<CenterId> post_assignment;  // after fixed-count reassignment
  CandidateReport report;
};

inline CandidateSolution process_candidate(const Instance& inst,
                                           const std::vector<CenterId>& centers, double radius,
                                           const RunConfig& cfg) {
  CandidateSolution out;
  out.report.d = radius;

  LPModel model = build_lp(inst, centers, radius);
  if (cfg.emit_lp_dumps) out.report.lp_dump = lp_to_mps(model);
  if (model.structurally_infeasible) {
    out.report.status = "structurally_infeasible";
    return out;
  }
  FractionalSolution sol = solve_lp(model);
  if (!sol.feasible) {
    out.report.status = "infeasible";
    return out;
  }
  out.report.status = "feasible";
  out.report.lp_objective = sol.objective;

  std::vector<CenterId> assignment(inst.n(), -1);
  const long long t = inst.t();
  for (const auto& comp : support_components(model, sol)) {
    if (comp.points.empty()) continue;
    if (comp.centers.empty())
      throw std::logic_error("pipeline: support component holds points but no center");

    // balance of the component point set (restriction property)
    std::vector<long long> sizes(inst.num_groups(), 0);
    for (PointId p : comp.points) ++sizes[inst.group_of(p)];
    long long mx = *std::max_element(sizes.begin(), sizes.end());
    long long mn = *std::min_element(sizes.begin(), sizes.end());
    if (mx > t * mn) throw std::logic_error("pipeline: support component is not balanced");

    ComponentReport cr;
    cr.centers = comp.centers;
    cr.num_points = static_cast<int>(comp.points.size());
    cr.hop_bound = comp.hop_diameter_bound;
    for (CenterId c : comp.centers)
      for (PointId p : comp.points)
        cr.max_pair_distance = std::max(cr.max_pair_distance, inst.distance(c, p));
    // A minimum-hop path through b distinct centers has 2b-1 edges of
    // length <= D, so this is the provable diameter cap for the component.
    double path_bound = (2.0 * static_cast<double>(comp.centers.size()) - 1.0) * model.radius;
    if (cr.max_pair_distance > path_bound + 1e-9)
      throw std::logic_error("pipeline: component diameter exceeds the path bound");
    cr.lp_objective = component_lp_objective(model, sol, comp);

    auto bounds = group_lower_bounds(inst, model, sol, comp);
    IntegralAssignment sigma = round_component(inst, model, comp, bounds);
    cr.sigma_int_cost = sigma.cost(inst);
    // 1e-7 plus the integer-scaling noise, which grows with the point count
    if (cr.sigma_int_cost > cr.lp_objective + 1e-7 + 1e-9 * comp.points.size())
      throw std::logic_error("pipeline: rounding exceeded the component LP objective");

    RepairState state = build_unassigned(inst, sigma, comp.points, bounds);
    RepairStats stats;
    std::vector<RepairTraceEvent> trace;
    auto repaired = repair(inst, state, stats, sigma, cfg.emit_repair_traces ? &trace : nullptr);
    cr.s_initial = stats.s_initial;
    cr.gamma = stats.gamma;
    cr.moved_second_case = stats.moved_second_case;
    cr.moved_total = stats.moved_total;
    cr.iterations = stats.iterations;
    cr.lprime_init_divergent = stats.lprime_init_divergent;
    for (const auto& ev : trace) cr.trace.push_back(trace_event_json(ev));

    cr.repaired_cost = 0.0;
    for (PointId p : comp.points) {
      assignment[p] = repaired[p];
      cr.repaired_cost += inst.distance(p, repaired[p]);
    }
    // every moved client lands on a center of its own component
    if (cr.repaired_cost >
        cr.sigma_int_cost + static_cast<double>(cr.moved_total) * cr.max_pair_distance + 1e-6)
      throw std::logic_error("pipeline: repair cost exceeds the movement ledger");
    out.report.components.push_back(std::move(cr));
  }

  for (PointId p = 0; p < inst.n(); ++p)
    if (assignment[p] < 0) throw std::logic_error("pipeline: point missed by every component");

  auto counts = AssignmentCounts::from_assignment(inst, assignment, centers);
  if (!is_fair(counts, t)) throw std::logic_error("pipeline: candidate assignment is unfair");
  out.report.solution_cost = solution_cost(inst, assignment);
  out.feasible = true;
  out.assignment = std::move(assignment);

  if (cfg.post_process) {
    out.post_assignment = reassign_fixed_counts(inst, centers, counts.counts);
    out.report.post_cost = solution_cost(inst, out.post_assignment);
    if (out.report.post_cost > out.report.solution_cost + 1e-9)
      throw std::logic_error("pipeline: post-processing increased the cost");
  } else {
    out.report.post_cost = out.report.solution_cost;
  }
  return out;
}

}  // namespace detail

/// Full run: baseline centers, the radius sweep with per-component rounding
/// and repair, cheapest feasible candidate, optional fixed-count polish.
inline PipelineResult solve(const Instance& inst, const RunConfig& cfg) {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();

  if (!inst.disjoint()) throw std::invalid_argument("solve: disjoint groups required");
  if (inst.t() == 1)
    throw std::invalid_argument(
        "solve: t = 1 (fully balanced) is not supported by this algorithm; use a dedicated "
        "balanced-clustering method");
  if (inst.t() < 1) throw std::invalid_argument("solve: invalid t");
  auto pre = feasibility_precheck(inst);
  if (!pre.ok)
    throw std::invalid_argument("solve: infeasible instance, group " +
                                std::to_string(pre.max_group) + " outnumbers group " +
                                std::to_string(pre.min_group) + " beyond factor t");

  RunReport report;
  report.n = inst.n();
  report.k = inst.k();
  report.t = inst.t();
  report.ell = inst.num_groups();
  report.seed = cfg.seed;

  Rng master(cfg.seed);
  auto baseline =
      local_search_kmedian(inst, inst.k(), master.fork(0).next_u64(), cfg.max_local_search_iters);
  report.vanilla_cost = baseline.cost;
  report.centers = baseline.centers;
  auto t1 = clock::now();
  report.time_vanilla_s = std::chrono::duration<double>(t1 - t0).count();

  auto radii = d_candidates(inst, baseline.centers, cfg.d_mode, cfg.geometric_base);
  std::vector<detail::CandidateSolution> results(radii.size());
  detail::run_indexed(radii.size(), cfg.threads, [&](std::size_t i) {
    results[i] = detail::process_candidate(inst, baseline.centers, radii[i], cfg);
  });
  auto t2 = clock::now();
  report.time_sweep_s = std::chrono::duration<double>(t2 - t1).count();

  int best = -1;
  for (std::size_t i = 0; i < results.size(); ++i) {
    report.candidates.push_back(results[i].report);
    if (!results[i].feasible) continue;
    double key = cfg.post_process ? results[i].report.post_cost : results[i].report.solution_cost;
    double best_key = best < 0 ? 0.0
                               : (cfg.post_process ? results[best].report.post_cost
                                                   : results[best].report.solution_cost);
    if (best < 0 || key < best_key) best = static_cast<int>(i);
  }
  if (best < 0) throw std::logic_error("solve: no feasible radius (precheck should prevent this)");

  report.fair_cost_pre_post = results[best].report.solution_cost;
  report.fair_cost = cfg.post_process ? results[best].report.post_cost
                                      : results[best].report.solution_cost;
  report.chosen_d = results[best].report.d;
  report.post_processed = cfg.post_process;

  PipelineResult out;
  out.solution.centers = baseline.centers;
  out.solution.assignment =
      cfg.post_process ? std::move(results[best].post_assignment) : std::move(results[best].assignment);
  out.solution.cost = report.fair_cost;

  auto final_counts =
      AssignmentCounts::from_assignment(inst, out.solution.assignment, baseline.centers);
  if (!is_fair(final_counts, inst.t())) throw std::logic_error("solve: final assignment is unfair");

  report.time_total_s = std::chrono::duration<double>(clock::now() - t0).count();
  out.report = std::move(report);
  return out;
}

// ---------------------------------------------------------------------------
// Output writers and the experiment harness.

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace detail

inline std::string assignment_csv(const Instance& inst, const Solution& sol) {
  std::string out = "point_id,group,center_id\n";
  for (PointId p = 0; p < inst.n(); ++p) {
    std::string group;
    for (GroupId g : inst.groups_of(p)) {
      if (!group.empty()) group += ';';  // overlapping memberships
      group += std::to_string(g);
    }
    out += std::to_string(p) + "," + group + "," + std::to_string(sol.assignment[p]) + "\n";
  }
  return out;
}

struct ExperimentDataset {
  std::string name;
  std::string csv_path;
  DatasetSchema schema;
};

struct ExperimentConfig {
  std::vector<ExperimentDataset> datasets;
  std::vector<int> k_values;
  TMode t_mode = TMode::min_feasible();
  RunConfig run;
  std::string out_dir = ".";
};

struct ExperimentRow {
  std::string dataset;
  int k = 0;
  int t = 0;
  int n = 0;
  int ell = 0;
  double vanilla_cost = 0.0;
  double fair_cost = 0.0;
  double post_cost = 0.0;
};

struct ExperimentOutcome {
  std::vector<ExperimentRow> rows;
  std::vector<std::string> failures;  // "<dataset> k=<k>: <error>"
  std::string csv_text;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

/// Runs every (dataset, k) pair, emits one experiment CSV plus a report JSON
/// and an assignment CSV per run. Failures are recorded and the remaining
/// runs continue. Timing lives in the JSON reports; the CSV stays
/// byte-reproducible under a fixed seed.
inline ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  ExperimentOutcome outcome;
  std::filesystem::create_directories(cfg.out_dir);
  std::string csv = "dataset,k,t,n,ell,vanilla_cost,fair_cost,post_cost,ratio_fair_vanilla\n";
  for (const auto& ds : cfg.datasets) {
    std::string text;
    try {
      text = read_file(ds.csv_path);
    } catch (const std::exception& e) {
      outcome.failures.push_back(ds.name + ": " + e.what());
      continue;
    }
    for (int k : cfg.k_values) {
      try {
        auto loaded = load_instance(text, ds.schema, k, cfg.t_mode);
        auto result = solve(loaded.instance, cfg.run);

        ExperimentRow row;
        row.dataset = ds.name;
        row.k = k;
        row.t = loaded.instance.t();
        row.n = loaded.instance.n();
        row.ell = loaded.instance.num_groups();
        row.vanilla_cost = result.report.vanilla_cost;
        row.fair_cost = result.report.fair_cost;
        row.post_cost = result.report.post_processed ? result.report.fair_cost
                                                     : result.report.fair_cost_pre_post;
        outcome.rows.push_back(row);

        csv += row.dataset + "," + std::to_string(row.k) + "," + std::to_string(row.t) + "," +
               std::to_string(row.n) + "," + std::to_string(row.ell) + "," +
               detail::format_double(row.vanilla_cost) + "," +
               detail::format_double(row.fair_cost) + "," + detail::format_double(row.post_cost) +
               "," + detail::format_double(row.fair_cost / row.vanilla_cost) + "\n";

        std::string stem = cfg.out_dir + "/" + ds.name + "_k" + std::to_string(k);
        nlohmann::json j = result.report.to_json();
        j["load_report"] = loaded.report.to_json();
        write_file(stem + ".report.json", j.dump(2) + "\n");
        write_file(stem + ".assignment.csv", assignment_csv(loaded.instance, result.solution));
      } catch (const std::exception& e) {
        outcome.failures.push_back(ds.name + " k=" + std::to_string(k) + ": " + e.what());
      }
    }
  }
  outcome.csv_text = csv;
  write_file(cfg.out_dir + "/experiment.csv", csv);
  if (!outcome.failures.empty()) {
    nlohmann::json j = {{"failures", outcome.failures}};
    write_file(cfg.out_dir + "/experiment_failures.json", j.dump(2) + "\n");
  }
  return outcome;
}

}  // namespace pfkm

#endif  // PFKM_PIPELINE_HPP
