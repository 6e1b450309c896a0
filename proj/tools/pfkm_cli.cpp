// Command-line front end: solve one dataset, reproduce experiments, run the
// exact oracle on tiny inputs, or materialize the reduction instances.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "pfkm/dataset.hpp"
#include "pfkm/oracle.hpp"
#include "pfkm/pipeline.hpp"
#include "pfkm/reductions.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonSolveArgs {
  std::string input;
  std::string schema_path;
  std::string instance_path;
  int k = 0;
  int t = 0;
  bool t_min = false;
  std::string d_mode = "geom";
  std::uint64_t seed = 1;
  bool post = false;
  std::string out_dir = ".";
};

pfkm::TMode t_mode_of(const CommonSolveArgs& args) {
  if (args.t_min) return pfkm::TMode::min_feasible();
  if (args.t > 0) return pfkm::TMode::explicit_t(args.t);
  throw CLI::ValidationError("--t or --t-min is required");
}

pfkm::Instance load_from_args(const CommonSolveArgs& args, pfkm::LoadReport* report) {
  if (!args.instance_path.empty()) {
    auto j = json::parse(pfkm::read_file(args.instance_path));
    return pfkm::instance_from_json(j);
  }
  auto schema = pfkm::schema_from_json(json::parse(pfkm::read_file(args.schema_path)));
  auto loaded = pfkm::load_instance(pfkm::read_file(args.input), schema, args.k, t_mode_of(args));
  if (report) *report = loaded.report;
  return std::move(loaded.instance);
}

pfkm::RunConfig run_config_of(const CommonSolveArgs& args) {
  pfkm::RunConfig cfg;
  cfg.seed = args.seed;
  cfg.post_process = args.post;
  cfg.d_mode = args.d_mode == "exact" ? pfkm::DMode::ExactPairwise : pfkm::DMode::Geometric;
  return cfg;
}

void add_solve_options(CLI::App* cmd, CommonSolveArgs& args, bool oracle) {
  cmd->add_option("--input", args.input, "dataset CSV path");
  cmd->add_option("--schema", args.schema_path, "dataset schema JSON path");
  if (oracle)
    cmd->add_option("--instance", args.instance_path,
                    "instance JSON (alternative to --input/--schema)");
  cmd->add_option("--k", args.k, "number of clusters");
  cmd->add_option("--t", args.t, "balance parameter");
  cmd->add_flag("--t-min", args.t_min, "use the smallest feasible t");
  if (!oracle)
    cmd->add_option("--d-mode", args.d_mode, "radius grid: exact | geom")
        ->check(CLI::IsMember({"exact", "geom"}));
  cmd->add_option("--seed", args.seed, "master seed");
  if (!oracle) cmd->add_flag("--post", args.post, "fixed-count post-processing");
  cmd->add_option("--out", args.out_dir, "output directory");
}

int cmd_solve(const CommonSolveArgs& args, bool emit_lp, bool emit_traces) {
  pfkm::LoadReport load_report;
  pfkm::Instance inst = load_from_args(args, &load_report);
  pfkm::RunConfig cfg = run_config_of(args);
  cfg.emit_lp_dumps = emit_lp;
  cfg.emit_repair_traces = emit_traces;

  auto result = pfkm::solve(inst, cfg);
  fs::create_directories(args.out_dir);
  pfkm::write_file(args.out_dir + "/assignment.csv", pfkm::assignment_csv(inst, result.solution));
  if (emit_lp) {
    for (std::size_t i = 0; i < result.report.candidates.size(); ++i) {
      auto& cand = result.report.candidates[i];
      if (cand.lp_dump.empty()) continue;
      char name[64];
      std::snprintf(name, sizeof(name), "/lp_%03zu.mps", i);
      pfkm::write_file(args.out_dir + name, cand.lp_dump);
      cand.lp_dump.clear();  // files instead of report bloat
    }
  }
  json j = result.report.to_json();
  if (!args.instance_path.empty()) j["instance"] = args.instance_path;
  else j["load_report"] = load_report.to_json();
  pfkm::write_file(args.out_dir + "/report.json", j.dump(2) + "\n");

  std::printf("n=%d k=%d t=%d ell=%d\n", result.report.n, result.report.k, result.report.t,
              result.report.ell);
  std::printf("vanilla_cost=%.9g\n", result.report.vanilla_cost);
  std::printf("fair_cost=%.9g (chosen D=%.9g%s)\n", result.report.fair_cost,
              result.report.chosen_d, result.report.post_processed ? ", post-processed" : "");
  std::printf("outputs: %s/assignment.csv %s/report.json\n", args.out_dir.c_str(),
              args.out_dir.c_str());
  return 0;
}

int cmd_oracle(const CommonSolveArgs& args) {
  pfkm::Instance inst = load_from_args(args, nullptr);
  auto res = pfkm::exact_pfkm(inst);
  if (!res.feasible) {
    std::printf("infeasible: no fair assignment exists\n");
    return 1;
  }
  fs::create_directories(args.out_dir);
  pfkm::write_file(args.out_dir + "/oracle_assignment.csv",
                   pfkm::assignment_csv(inst, res.solution));
  json j = {{"cost", res.solution.cost}, {"centers", res.solution.centers}};
  pfkm::write_file(args.out_dir + "/oracle.json", j.dump(2) + "\n");
  std::printf("optimal_cost=%.9g\n", res.solution.cost);
  return 0;
}

int cmd_experiment(const std::string& config_path) {
  auto j = json::parse(pfkm::read_file(config_path));
  pfkm::ExperimentConfig cfg;
  for (const auto& d : j.at("datasets")) {
    pfkm::ExperimentDataset ds;
    ds.name = d.at("name").get<std::string>();
    ds.csv_path = d.at("csv").get<std::string>();
    if (d.contains("schema_file"))
      ds.schema = pfkm::schema_from_json(json::parse(pfkm::read_file(d["schema_file"])));
    else
      ds.schema = pfkm::schema_from_json(d.at("schema"));
    cfg.datasets.push_back(std::move(ds));
  }
  cfg.k_values = j.at("k_values").get<std::vector<int>>();
  if (j.contains("t_mode") && j["t_mode"].is_number_integer())
    cfg.t_mode = pfkm::TMode::explicit_t(j["t_mode"].get<int>());
  cfg.run.seed = j.value("seed", std::uint64_t{1});
  cfg.run.post_process = j.value("post", true);
  cfg.run.d_mode =
      j.value("d_mode", std::string("geom")) == "exact" ? pfkm::DMode::ExactPairwise
                                                        : pfkm::DMode::Geometric;
  cfg.out_dir = j.value("out_dir", std::string("."));
  fs::create_directories(cfg.out_dir);

  auto outcome = pfkm::run_experiment(cfg);
  for (const auto& row : outcome.rows)
    std::printf("%s k=%d t=%d n=%d vanilla=%.9g fair=%.9g\n", row.dataset.c_str(), row.k, row.t,
                row.n, row.vanilla_cost, row.fair_cost);
  for (const auto& f : outcome.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
  std::printf("outputs in %s (experiment.csv, per-run report.json/assignment.csv)\n",
              cfg.out_dir.c_str());
  return outcome.failures.empty() ? 0 : 1;
}

int cmd_reduce_ckm(const std::string& input, double eps, const std::string& out_dir) {
  auto ckm = pfkm::rescaled(pfkm::ckm_from_json(json::parse(pfkm::read_file(input))));
  auto [inst, map] = pfkm::reduce_ckm_to_pfkm(ckm, eps);
  fs::create_directories(out_dir);
  pfkm::write_file(out_dir + "/instance.json", pfkm::instance_to_json(inst).dump() + "\n");
  json meta = {{"w", map.w},
               {"num_locations", map.num_locations},
               {"diameter", map.diameter},
               {"k", map.k},
               {"u", map.u},
               {"point_location", map.point_location},
               {"red_points", map.red_points}};
  pfkm::write_file(out_dir + "/mapping.json", meta.dump(2) + "\n");
  std::printf("n=%d t=%d W=%d -> %s/instance.json\n", inst.n(), inst.t(), map.w, out_dir.c_str());
  return 0;
}

int cmd_reduce_hypergraph(const std::string& input, int rho, const std::string& out_dir) {
  auto h = pfkm::hypergraph_from_json(json::parse(pfkm::read_file(input)));
  auto [inst, map] = pfkm::reduce_hypergraph_to_pfkm(h, rho);
  fs::create_directories(out_dir);
  pfkm::write_file(out_dir + "/instance.json", pfkm::instance_to_json(inst).dump() + "\n");
  json meta = {{"side_points", map.side_points},
               {"n_vertices", map.n_vertices},
               {"two_colorable", pfkm::two_colorable(h)}};
  pfkm::write_file(out_dir + "/mapping.json", meta.dump(2) + "\n");
  std::printf("n=%d t=%d -> %s/instance.json\n", inst.n(), inst.t(), out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pairwise-fair k-median solver and benchmark harness"};
  app.require_subcommand(1);

  CommonSolveArgs solve_args;
  bool emit_lp = false, emit_traces = false;
  auto* solve_cmd = app.add_subcommand("solve", "run the fair clustering pipeline on a CSV");
  add_solve_options(solve_cmd, solve_args, /*oracle=*/false);
  solve_cmd->add_flag("--emit-lp-dumps", emit_lp, "embed MPS dumps in the report");
  solve_cmd->add_flag("--emit-repair-traces", emit_traces, "embed repair traces in the report");

  CommonSolveArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact optimum for tiny instances");
  add_solve_options(oracle_cmd, oracle_args, /*oracle=*/true);

  std::string experiment_config;
  auto* exp_cmd = app.add_subcommand("experiment", "run a batch of datasets and k values");
  exp_cmd->add_option("--config", experiment_config, "experiment config JSON")->required();

  auto* reduce_cmd = app.add_subcommand("reduce", "build hardness-reduction instances");
  reduce_cmd->require_subcommand(1);
  std::string ckm_input, ckm_out = ".";
  double eps = 1.0;
  auto* ckm_cmd = reduce_cmd->add_subcommand("ckm", "capacitated k-median input");
  ckm_cmd->add_option("--input", ckm_input, "CkM JSON {dist, k, u}")->required();
  ckm_cmd->add_option("--eps", eps, "reduction accuracy parameter");
  ckm_cmd->add_option("--out", ckm_out, "output directory");
  std::string hg_input, hg_out = ".";
  int rho = 2;
  auto* hg_cmd = reduce_cmd->add_subcommand("hypergraph", "3-uniform hypergraph input");
  hg_cmd->add_option("--input", hg_input, "hypergraph JSON {n_vertices, edges}")->required();
  hg_cmd->add_option("--rho", rho, "side-point exponent");
  hg_cmd->add_option("--out", hg_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return cmd_solve(solve_args, emit_lp, emit_traces);
    if (oracle_cmd->parsed()) return cmd_oracle(oracle_args);
    if (exp_cmd->parsed()) return cmd_experiment(experiment_config);
    if (ckm_cmd->parsed()) return cmd_reduce_ckm(ckm_input, eps, ckm_out);
    if (hg_cmd->parsed()) return cmd_reduce_hypergraph(hg_input, rho, hg_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
