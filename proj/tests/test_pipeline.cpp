#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "pfkm/oracle.hpp"
#include "pfkm/pipeline.hpp"
#include "pfkm/reductions.hpp"

#include "support/test_util.hpp"

using namespace pfkm;

TEST_CASE("radius candidates") {
  SUBCASE("co-located points give the single zero radius") {
    std::vector<std::vector<double>> coords = {{1.0}, {1.0}, {1.0}};
    Instance inst = Instance::from_points_disjoint(coords, {0, 1, 0}, 1, 2);
    auto exact = d_candidates(inst, {0}, DMode::ExactPairwise);
    CHECK(exact == std::vector<double>{0.0});
    auto geom = d_candidates(inst, {0}, DMode::Geometric);
    CHECK(geom == std::vector<double>{0.0});
  }

  SUBCASE("geometric grid starts at the minimum nonzero distance") {
    std::vector<std::vector<double>> coords = {{0.0}, {1.0}, {2.0}, {5.0}};
    Instance inst = Instance::from_points_disjoint(coords, {0, 1, 0, 1}, 2, 2);
    auto geom = d_candidates(inst, {0, 3}, DMode::Geometric);
    REQUIRE_FALSE(geom.empty());
    CHECK(geom.front() == doctest::Approx(1.0));
    CHECK(geom.back() == doctest::Approx(5.0));
    for (std::size_t i = 0; i + 2 < geom.size(); ++i)
      CHECK(geom[i + 1] == doctest::Approx(geom[i] * 1.1));
  }

  SUBCASE("exact mode is sorted, distinct, and bounded by n*k") {
    Rng rng(91);
    Instance inst = testutil::random_instance(rng, 12, 3, 2, 2);
    std::vector<CenterId> centers = {0, 1, 2};
    auto exact = d_candidates(inst, centers, DMode::ExactPairwise);
    CHECK(exact.size() <= 12u * 3u);
    for (std::size_t i = 1; i < exact.size(); ++i) CHECK(exact[i] > exact[i - 1]);
  }
}

TEST_CASE("solve validations") {
  Rng rng(92);
  SUBCASE("t = 1 is rejected") {
    Instance inst = testutil::random_instance(rng, 8, 2, 2, 1);
    RunConfig cfg;
    CHECK_THROWS_WITH_AS(solve(inst, cfg), doctest::Contains("t = 1"), std::invalid_argument);
  }
  SUBCASE("precheck failures are rejected with the witness") {
    std::vector<std::vector<double>> coords;
    for (int i = 0; i < 8; ++i) coords.push_back({static_cast<double>(i)});
    Instance inst = Instance::from_points_disjoint(coords, {0, 0, 0, 0, 0, 0, 0, 1}, 2, 2);
    RunConfig cfg;
    CHECK_THROWS_AS(solve(inst, cfg), std::invalid_argument);
  }
}

TEST_CASE("pipeline output is fair and at least the oracle optimum") {
  Rng rng(93);
  int solved = 0;
  for (int it = 0; it < 14 && solved < 10; ++it) {
    int n = rng.next_int(7, 10);
    int k = rng.next_int(2, 3);
    int ell = rng.next_int(2, 3);
    int t = rng.next_int(2, 3);
    Instance inst = testutil::random_instance(rng, n, k, ell, t);
    if (!feasibility_precheck(inst).ok) continue;

    RunConfig cfg;
    cfg.seed = rng.next_u64();
    cfg.d_mode = DMode::ExactPairwise;
    auto result = solve(inst, cfg);
    ++solved;

    auto counts =
        AssignmentCounts::from_assignment(inst, result.solution.assignment, result.solution.centers);
    CHECK(is_fair(counts, inst.t()));

    auto oracle = exact_pfkm(inst);
    REQUIRE(oracle.feasible);
    CHECK(result.solution.cost >= oracle.solution.cost - 1e-9);

    // certified ledger: every feasible candidate respects its own movement
    // bound, and the returned cost beats the best of those bounds
    double best_bound = 1e18;
    for (const auto& cand : result.report.candidates) {
      if (cand.status != "feasible") continue;
      double moved_hops = 0.0;
      for (const auto& comp : cand.components)
        moved_hops += static_cast<double>(comp.moved_total) * comp.max_pair_distance;
      CHECK(cand.solution_cost <= cand.lp_objective + moved_hops + 1e-6);
      best_bound = std::min(best_bound, cand.lp_objective + moved_hops);
    }
    CHECK(result.report.fair_cost <= best_bound + 1e-6);

    // reported cost is recomputable from the assignment
    CHECK(result.solution.cost ==
          doctest::Approx(solution_cost(inst, result.solution.assignment)).epsilon(1e-9));
  }
  CHECK(solved >= 5);
}

TEST_CASE("fair vanilla assignments bound the pipeline through the ledger") {
  // clusters so well separated that the nearest assignment is already fair
  std::vector<std::vector<double>> coords;
  std::vector<GroupId> labels;
  for (int block = 0; block < 2; ++block)
    for (int i = 0; i < 4; ++i) {
      coords.push_back({block * 100.0 + i * 0.25});
      labels.push_back(i % 2);
    }
  Instance inst = Instance::from_points_disjoint(coords, labels, 2, 2);
  RunConfig cfg;
  cfg.seed = 5;
  auto result = solve(inst, cfg);

  auto vanilla_counts = AssignmentCounts::from_assignment(
      inst, nearest_assignment(inst, result.report.centers), result.report.centers);
  REQUIRE(is_fair(vanilla_counts, inst.t()));

  const auto& top = result.report.candidates.back();
  REQUIRE(top.status == "feasible");
  double moved_hops = 0.0;
  for (const auto& comp : top.components)
    moved_hops += static_cast<double>(comp.moved_total) * comp.max_pair_distance;
  CHECK(result.report.fair_cost <= result.report.vanilla_cost + moved_hops + 1e-6);
}

TEST_CASE("cheapest candidate wins") {
  Rng rng(94);
  Instance inst = testutil::random_instance(rng, 12, 2, 2, 2);
  RunConfig cfg;
  cfg.seed = 3;
  cfg.d_mode = DMode::ExactPairwise;
  auto result = solve(inst, cfg);
  double best = 1e18;
  for (const auto& cand : result.report.candidates)
    if (cand.status == "feasible") best = std::min(best, cand.post_cost);
  CHECK(result.report.fair_cost == doctest::Approx(best));
}

TEST_CASE("post-processing never increases the cost") {
  Rng rng(95);
  for (int it = 0; it < 6; ++it) {
    Instance inst = testutil::random_instance(rng, rng.next_int(10, 16), 3, 2, 2);
    RunConfig with_post;
    with_post.seed = 11;
    RunConfig without_post;
    without_post.seed = 11;
    without_post.post_process = false;
    auto a = solve(inst, with_post);
    auto b = solve(inst, without_post);
    CHECK(a.report.fair_cost <= b.report.fair_cost + 1e-9);
    for (const auto& cand : a.report.candidates)
      if (cand.status == "feasible") CHECK(cand.post_cost <= cand.solution_cost + 1e-9);
  }
}

TEST_CASE("largest radius is always feasible after the precheck") {
  Rng rng(96);
  for (int it = 0; it < 8; ++it) {
    Instance inst = testutil::random_instance(rng, rng.next_int(8, 14), 2, 2, 2);
    RunConfig cfg;
    cfg.seed = rng.next_u64();
    auto result = solve(inst, cfg);
    REQUIRE_FALSE(result.report.candidates.empty());
    CHECK(result.report.candidates.back().status == "feasible");
  }
}

TEST_CASE("reduced capacitated instances round-trip through the pipeline") {
  Rng rng(97);
  for (int it = 0; it < 4; ++it) {
    int m = rng.next_int(2, 3);
    int u = rng.next_int(2, 3);
    std::vector<double> xs;
    for (int i = 0; i < m; ++i) xs.push_back(rng.next_int(0, 3));
    CkmInstance ckm;
    ckm.dist.assign(m, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) ckm.dist[i][j] = std::abs(xs[i] - xs[j]);
    ckm.k = 2;
    ckm.u = u;
    if (ckm.k * ckm.u < m) continue;
    ckm = rescaled(ckm);

    auto [inst, map] = reduce_ckm_to_pfkm(ckm, static_cast<double>(ckm.k) * std::max(1.0, ckm.diameter()));
    if (inst.t() < 2) continue;
    RunConfig cfg;
    cfg.seed = 17;
    cfg.d_mode = DMode::ExactPairwise;
    auto result = solve(inst, cfg);

    CkmSolution extracted = extract_ckm_solution(inst, map, result.solution);
    CHECK(extracted.cost <= result.solution.cost / map.w + 1e-9);
    std::vector<int> load(extracted.facilities.size(), 0);
    for (int x = 0; x < m; ++x) CHECK(++load[extracted.assignment[x]] <= ckm.u);
  }
}

TEST_CASE("thread count does not change the result") {
  Rng rng(90);
  Instance inst = testutil::random_instance(rng, 20, 3, 2, 2);
  RunConfig one;
  one.seed = 6;
  one.threads = 1;
  RunConfig two;
  two.seed = 6;
  two.threads = 2;
  auto a = solve(inst, one);
  auto b = solve(inst, two);
  CHECK(a.solution.assignment == b.solution.assignment);
  CHECK(a.report.fair_cost == b.report.fair_cost);
  CHECK(a.report.chosen_d == b.report.chosen_d);
  REQUIRE(a.report.candidates.size() == b.report.candidates.size());
  for (std::size_t i = 0; i < a.report.candidates.size(); ++i)
    CHECK(a.report.candidates[i].status == b.report.candidates[i].status);
}

TEST_CASE("emit flags populate dumps and traces") {
  Rng rng(99);
  bool saw_dump = false, saw_trace = false;
  for (int attempt = 0; attempt < 20 && !(saw_dump && saw_trace); ++attempt) {
    Instance inst = testutil::random_instance(rng, rng.next_int(10, 16), 3, 2, 2);
    RunConfig cfg;
    cfg.seed = attempt;
    cfg.emit_lp_dumps = true;
    cfg.emit_repair_traces = true;
    auto result = solve(inst, cfg);
    for (const auto& cand : result.report.candidates) {
      if (!cand.lp_dump.empty()) {
        saw_dump = true;
        CHECK(cand.lp_dump.find("ENDATA") != std::string::npos);
      }
      for (const auto& comp : cand.components)
        for (const auto& line : comp.trace) {
          saw_trace = true;
          auto j = nlohmann::json::parse(line);  // one JSON object per iteration
          CHECK(j.contains("case"));
          CHECK(j.contains("lprime"));
        }
    }
    // without the flags the report stays lean
    RunConfig lean;
    lean.seed = attempt;
    auto result2 = solve(inst, lean);
    for (const auto& cand : result2.report.candidates) {
      CHECK(cand.lp_dump.empty());
      for (const auto& comp : cand.components) CHECK(comp.trace.empty());
    }
  }
  CHECK(saw_dump);
  CHECK(saw_trace);
}

TEST_CASE("experiment harness writes deterministic outputs") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "pfkm_experiment_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // small bank-style file
  std::string csv = "age,balance,marital,duration\n";
  Rng rng(98);
  auto add_rows = [&](const std::string& m, int count) {
    for (int i = 0; i < count; ++i)
      csv += std::to_string(rng.next_int(20, 70)) + "," + std::to_string(rng.next_int(0, 4000)) +
             "," + m + "," + std::to_string(rng.next_int(30, 400)) + "\n";
  };
  add_rows("married", 24);
  add_rows("single", 14);
  add_rows("divorced", 10);
  write_file((dir / "mini.csv").string(), csv);

  ExperimentConfig cfg;
  ExperimentDataset ds;
  ds.name = "mini";
  ds.csv_path = (dir / "mini.csv").string();
  ds.schema.group_column = "marital";
  ds.schema.numeric_columns = {"age", "balance", "duration"};
  cfg.datasets = {ds};
  cfg.k_values = {2, 3};
  cfg.run.seed = 21;
  cfg.out_dir = dir.string();

  auto first = run_experiment(cfg);
  REQUIRE(first.failures.empty());
  REQUIRE(first.rows.size() == 2);
  CHECK(first.rows[0].t == 3);  // ceil(24/10) after load
  std::string csv_one = read_file((dir / "experiment.csv").string());
  std::string assign_one = read_file((dir / "mini_k2.assignment.csv").string());

  auto second = run_experiment(cfg);
  CHECK(read_file((dir / "experiment.csv").string()) == csv_one);
  CHECK(read_file((dir / "mini_k2.assignment.csv").string()) == assign_one);

  // report json exists and carries recomputable costs
  auto j = nlohmann::json::parse(read_file((dir / "mini_k2.report.json").string()));
  CHECK(j["fair_cost"].get<double>() > 0.0);
  CHECK(j.contains("timings"));
  fs::remove_all(dir);
}

TEST_CASE("failures are reported while other runs continue") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "pfkm_experiment_fail";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file((dir / "ok.csv").string(),
             "g,v\na,0\na,1\na,2\nb,3\nb,4\nc,5\nc,6\n");

  ExperimentConfig cfg;
  ExperimentDataset good;
  good.name = "good";
  good.csv_path = (dir / "ok.csv").string();
  good.schema.group_column = "g";
  good.schema.numeric_columns = {"v"};
  ExperimentDataset missing;
  missing.name = "missing";
  missing.csv_path = (dir / "nope.csv").string();
  missing.schema = good.schema;
  cfg.datasets = {missing, good};
  cfg.k_values = {2};
  cfg.run.seed = 1;
  cfg.out_dir = dir.string();

  auto outcome = run_experiment(cfg);
  CHECK(outcome.rows.size() == 1);
  REQUIRE(outcome.failures.size() == 1);
  CHECK(outcome.failures[0].find("missing") != std::string::npos);
  CHECK(fs::exists(dir / "experiment_failures.json"));
  fs::remove_all(dir);
}
