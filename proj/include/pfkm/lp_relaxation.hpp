#ifndef PFKM_LP_RELAXATION_HPP
#define PFKM_LP_RELAXATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfkm/core.hpp"
#include "pfkm/simplex.hpp"

namespace pfkm {

constexpr double kSupportEdgeTol = 1e-7;
constexpr double kIntegerSnapTol = 1e-6;

/// Assignment relaxation restricted to radius D: one variable per (point,
/// center) pair with d <= D, assignment equalities, and one fairness row per
/// center per ordered group pair. Pairs beyond D are simply absent.
struct LPModel {
  std::vector<CenterId> centers;
  double radius = 0.0;  // D
  struct Var {
    PointId point;
    int center_index;  // into centers
    double cost;
  };
  std::vector<Var> vars;
  std::vector<std::vector<int>> vars_of_point;   // var indexes per point
  std::vector<std::vector<int>> vars_of_center;  // var indexes per center index
  bool structurally_infeasible = false;          // some point has no variable
  int num_fairness_rows = 0;                     // k * ell * (ell-1)
  LinearProgram lp;
};

struct FractionalSolution {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;  // aligned with LPModel::vars
};

struct SupportComponent {
  std::vector<CenterId> centers;
  std::vector<PointId> points;
  double hop_diameter_bound = 0.0;  // |F ∩ C| * D
};

inline LPModel build_lp(const Instance& inst, const std::vector<CenterId>& centers, double radius) {
  if (centers.empty()) throw std::invalid_argument("build_lp: no centers");
  if (radius < 0.0) throw std::invalid_argument("build_lp: negative radius");
  LPModel model;
  model.centers = centers;
  model.radius = radius;
  model.vars_of_point.assign(inst.n(), {});
  model.vars_of_center.assign(centers.size(), {});

  for (PointId j = 0; j < inst.n(); ++j) {
    for (std::size_t ci = 0; ci < centers.size(); ++ci) {
      double d = inst.distance(j, centers[ci]);
      if (d > radius) continue;
      int idx = static_cast<int>(model.vars.size());
      model.vars.push_back({j, static_cast<int>(ci), d});
      model.vars_of_point[j].push_back(idx);
      model.vars_of_center[ci].push_back(idx);
    }
    if (model.vars_of_point[j].empty()) model.structurally_infeasible = true;
  }

  LinearProgram& lp = model.lp;
  lp.num_vars = static_cast<int>(model.vars.size());
  lp.objective.resize(lp.num_vars);
  for (int v = 0; v < lp.num_vars; ++v) lp.objective[v] = model.vars[v].cost;

  for (PointId j = 0; j < inst.n(); ++j) {
    LinearProgram::Row row;
    row.type = RowType::Eq;
    row.rhs = 1.0;
    for (int v : model.vars_of_point[j]) row.coeffs.emplace_back(v, 1.0);
    lp.rows.push_back(std::move(row));
  }

  // sum_{j in P_a} x_{j,i} - t * sum_{j in P_b} x_{j,i} <= 0, all ordered
  // pairs a != b, per center. Rows with no variables stay as empty 0 <= 0.
  const double t = inst.t();
  const int ell = inst.num_groups();
  for (std::size_t ci = 0; ci < centers.size(); ++ci) {
    for (GroupId a = 0; a < ell; ++a) {
      for (GroupId b = 0; b < ell; ++b) {
        if (a == b) continue;
        LinearProgram::Row row;
        row.type = RowType::LessEq;
        row.rhs = 0.0;
        for (int v : model.vars_of_center[ci]) {
          GroupId g = inst.group_of(model.vars[v].point);
          if (g == a) row.coeffs.emplace_back(v, 1.0);
          else if (g == b) row.coeffs.emplace_back(v, -t);
        }
        lp.rows.push_back(std::move(row));
        ++model.num_fairness_rows;
      }
    }
  }
  return model;
}

/// Optimal basic solution of LP(D), or infeasible. A hit of the solver's
/// pivot cap surfaces as SolverLimitError, not as infeasibility.
inline FractionalSolution solve_lp(const LPModel& model) {
  FractionalSolution sol;
  if (model.structurally_infeasible) return sol;
  SimplexResult res = solve_simplex(model.lp);
  if (res.status == LpStatus::Infeasible) return sol;
  if (res.status == LpStatus::Unbounded)
    throw std::logic_error("LP(D) cannot be unbounded");  // costs are nonnegative
  sol.feasible = true;
  sol.objective = res.objective;
  sol.x = std::move(res.x);

  for (PointId j = 0; j < static_cast<int>(model.vars_of_point.size()); ++j) {
    double s = 0.0;
    for (int v : model.vars_of_point[j]) s += sol.x[v];
    if (model.vars_of_point[j].empty()) continue;
    if (std::abs(s - 1.0) > 1e-7) throw std::runtime_error("LP solution violates an assignment row");
  }
  return sol;
}

/// Connected components of the bipartite support graph (edges with
/// x >= edge_tolerance). Every point and every center lands in exactly one
/// component; centers carrying no support edge become singletons.
inline std::vector<SupportComponent> support_components(const LPModel& model,
                                                        const FractionalSolution& x_star,
                                                        double edge_tolerance = kSupportEdgeTol) {
  const int n = static_cast<int>(model.vars_of_point.size());
  const int k = static_cast<int>(model.centers.size());
  // vertex ids: 0..k-1 centers, k..k+n-1 points
  std::vector<std::vector<int>> adj(k + n);
  for (std::size_t v = 0; v < model.vars.size(); ++v) {
    if (x_star.x[v] < edge_tolerance) continue;
    int cv = model.vars[v].center_index;
    int pv = k + model.vars[v].point;
    adj[cv].push_back(pv);
    adj[pv].push_back(cv);
  }
  std::vector<SupportComponent> out;
  std::vector<char> seen(k + n, 0);
  for (int start = 0; start < k + n; ++start) {
    if (seen[start]) continue;
    seen[start] = 1;
    SupportComponent comp;
    std::deque<int> queue{start};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      if (v < k) comp.centers.push_back(model.centers[v]);
      else comp.points.push_back(v - k);
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
    }
    std::sort(comp.centers.begin(), comp.centers.end());
    std::sort(comp.points.begin(), comp.points.end());
    comp.hop_diameter_bound = static_cast<double>(comp.centers.size()) * model.radius;
    out.push_back(std::move(comp));
  }
  return out;
}

/// l_i = min over groups of the fractional mass of that group at center i,
/// snapped to the nearest integer when within 1e-6.
inline std::vector<double> group_lower_bounds(const Instance& inst, const LPModel& model,
                                              const FractionalSolution& x_star,
                                              const SupportComponent& component) {
  std::vector<int> center_index(inst.n(), -1);
  for (std::size_t ci = 0; ci < model.centers.size(); ++ci) center_index[model.centers[ci]] = static_cast<int>(ci);
  std::vector<double> bounds;
  bounds.reserve(component.centers.size());
  for (CenterId c : component.centers) {
    int ci = center_index[c];
    std::vector<double> mass(inst.num_groups(), 0.0);
    for (int v : model.vars_of_center[ci]) mass[inst.group_of(model.vars[v].point)] += x_star.x[v];
    double li = *std::min_element(mass.begin(), mass.end());
    double snapped = std::round(li);
    if (std::abs(li - snapped) <= kIntegerSnapTol) li = snapped;
    bounds.push_back(li);
  }
  return bounds;
}

/// LP objective restricted to one component's points.
inline double component_lp_objective(const LPModel& model, const FractionalSolution& x_star,
                                     const SupportComponent& component) {
  std::vector<char> in_comp(model.vars_of_point.size(), 0);
  for (PointId p : component.points) in_comp[p] = 1;
  double obj = 0.0;
  for (std::size_t v = 0; v < model.vars.size(); ++v)
    if (in_comp[model.vars[v].point]) obj += model.vars[v].cost * x_star.x[v];
  return obj;
}

/// Fixed-column MPS rendering of the model, for cross-checks with external
/// solvers.
inline std::string lp_to_mps(const LPModel& model, const std::string& name = "PFKMLP") {
  std::string out;
  char buf[128];
  auto row_name = [&](std::size_t r) {
    std::snprintf(buf, sizeof(buf), r < model.vars_of_point.size() ? "P%06zu" : "F%06zu",
                  r < model.vars_of_point.size() ? r : r - model.vars_of_point.size());
    return std::string(buf);
  };
  out += "NAME          " + name + "\n";
  out += "ROWS\n N  COST\n";
  for (std::size_t r = 0; r < model.lp.rows.size(); ++r) {
    out += model.lp.rows[r].type == RowType::Eq ? " E  " : " L  ";
    out += row_name(r) + "\n";
  }
  out += "COLUMNS\n";
  // column-major entries: objective first, then each row coefficient
  std::vector<std::vector<std::pair<std::size_t, double>>> by_var(model.vars.size());
  for (std::size_t r = 0; r < model.lp.rows.size(); ++r)
    for (auto [v, coef] : model.lp.rows[r].coeffs) by_var[v].emplace_back(r, coef);
  for (std::size_t v = 0; v < model.vars.size(); ++v) {
    std::snprintf(buf, sizeof(buf), "    X%-7zu  %-8s  %-12.6g\n", v, "COST", model.vars[v].cost);
    out += buf;
    for (auto [r, coef] : by_var[v]) {
      std::snprintf(buf, sizeof(buf), "    X%-7zu  %-8s  %-12.6g\n", v, row_name(r).c_str(), coef);
      out += buf;
    }
  }
  out += "RHS\n";
  for (std::size_t r = 0; r < model.lp.rows.size(); ++r) {
    if (model.lp.rows[r].rhs == 0.0) continue;
    std::snprintf(buf, sizeof(buf), "    RHS       %-8s  %-12.6g\n", row_name(r).c_str(),
                  model.lp.rows[r].rhs);
    out += buf;
  }
  out += "BOUNDS\nENDATA\n";
  return out;
}

}  // namespace pfkm

#endif  // PFKM_LP_RELAXATION_HPP
