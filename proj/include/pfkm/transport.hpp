#ifndef PFKM_TRANSPORT_HPP
#define PFKM_TRANSPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfkm/core.hpp"
#include "pfkm/lp_relaxation.hpp"

namespace pfkm {

// Edge costs are scaled to integers so shortest-path comparisons stay exact.
constexpr double kFlowCostScale = 1e9;

inline long long scaled_flow_cost(double c) { return std::llround(c * kFlowCostScale); }

/// Min-cost max-flow via successive shortest augmenting paths with node
/// potentials (Dijkstra). Costs must be nonnegative.
class MinCostFlow {
 public:
  explicit MinCostFlow(int num_nodes) : head_(num_nodes) {}

  int add_arc(int from, int to, long long cap, long long cost) {
    int id = static_cast<int>(arcs_.size());
    arcs_.push_back({to, cap, cost});
    arcs_.push_back({from, 0, -cost});
    head_[from].push_back(id);
    head_[to].push_back(id + 1);
    return id;
  }

  struct Result {
    long long flow = 0;
    long long cost = 0;
  };

  Result solve(int source, int sink) {
    const long long inf = std::numeric_limits<long long>::max() / 4;
    potential_.assign(head_.size(), 0);
    Result res;
    std::vector<long long> dist;
    std::vector<int> parent_arc;
    for (;;) {
      dist.assign(head_.size(), inf);
      parent_arc.assign(head_.size(), -1);
      dist[source] = 0;
      using Item = std::pair<long long, int>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
      pq.push({0, source});
      while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (int a : head_[u]) {
          const Arc& arc = arcs_[a];
          if (arc.cap <= 0) continue;
          long long nd = d + arc.cost + potential_[u] - potential_[arc.to];
          if (nd < dist[arc.to]) {
            dist[arc.to] = nd;
            parent_arc[arc.to] = a;
            pq.push({nd, arc.to});
          }
        }
      }
      if (dist[sink] >= inf) break;
      // Capping the update at dist[sink] keeps reduced costs nonnegative on
      // the whole residual graph, including nodes this search never reached.
      for (std::size_t v = 0; v < head_.size(); ++v)
        potential_[v] += std::min(dist[v], dist[sink]);
      long long push = inf;
      for (int v = sink; v != source;) {
        const Arc& arc = arcs_[parent_arc[v]];
        push = std::min(push, arc.cap);
        v = arcs_[parent_arc[v] ^ 1].to;
      }
      for (int v = sink; v != source;) {
        arcs_[parent_arc[v]].cap -= push;
        arcs_[parent_arc[v] ^ 1].cap += push;
        res.cost += push * arcs_[parent_arc[v]].cost;
        v = arcs_[parent_arc[v] ^ 1].to;
      }
      res.flow += push;
    }
    check_optimality();
    return res;
  }

  long long flow_on(int arc_id) const { return arcs_[arc_id ^ 1].cap; }

  /// Nodes reachable from `source` in the residual graph; a Hall-style
  /// witness when the required flow cannot be met.
  std::vector<int> residual_cut(int source) const {
    std::vector<char> seen(head_.size(), 0);
    std::vector<int> stack{source}, out;
    seen[source] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      out.push_back(u);
      for (int a : head_[u])
        if (arcs_[a].cap > 0 && !seen[arcs_[a].to]) {
          seen[arcs_[a].to] = 1;
          stack.push_back(arcs_[a].to);
        }
    }
    return out;
  }

 private:
  struct Arc {
    int to;
    long long cap;
    long long cost;
  };
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> head_;
  std::vector<long long> potential_;

  void check_optimality() const {
    for (std::size_t u = 0; u < head_.size(); ++u)
      for (int a : head_[u]) {
        if (arcs_[a].cap <= 0) continue;
        if (arcs_[a].cost + potential_[u] - potential_[arcs_[a].to] < 0)
          throw std::logic_error("min-cost flow: negative reduced cost at optimum");
      }
  }
};

/// Bipartite transportation: every left point ships exactly one unit to a
/// (center, group) node of its own group; right nodes carry integer bounds.
struct TransportProblem {
  struct RightNode {
    CenterId center;
    GroupId group;
    long long lb = 0;
    long long ub = 0;
  };
  struct Edge {
    int left_index;
    int right_index;
    double cost;
  };
  std::vector<PointId> left;  // point ids
  std::vector<RightNode> right;
  std::vector<Edge> edges;
};

struct TransportResult {
  std::vector<int> right_of_left;  // per left index
  double cost = 0.0;
  long long scaled_cost = 0;
};

inline TransportResult solve_transport(const TransportProblem& prob) {
  const int L = static_cast<int>(prob.left.size());
  const int R = static_cast<int>(prob.right.size());
  long long sum_lb = 0;
  for (const auto& rn : prob.right) {
    if (rn.lb < 0 || rn.ub < rn.lb) throw std::invalid_argument("transport: bad bounds");
    sum_lb += rn.lb;
  }

  // Node layout: [0,L) points, [L,L+R) right nodes, then T, SS, TT. Lower
  // bounds are shifted out by the usual excess transformation.
  const int t_node = L + R, ss = t_node + 1, tt = t_node + 2;
  MinCostFlow flow(tt + 1);
  std::vector<int> edge_arcs(prob.edges.size());
  for (std::size_t e = 0; e < prob.edges.size(); ++e) {
    const auto& ed = prob.edges[e];
    edge_arcs[e] = flow.add_arc(ed.left_index, L + ed.right_index, 1, scaled_flow_cost(ed.cost));
  }
  for (int r = 0; r < R; ++r) {
    flow.add_arc(L + r, t_node, prob.right[r].ub - prob.right[r].lb, 0);
    if (prob.right[r].lb > 0) flow.add_arc(L + r, tt, prob.right[r].lb, 0);
  }
  for (int j = 0; j < L; ++j) flow.add_arc(ss, j, 1, 0);
  if (L - sum_lb > 0) flow.add_arc(t_node, tt, L - sum_lb, 0);
  if (L - sum_lb < 0)
    throw std::invalid_argument("transport infeasible: lower bounds exceed point count");

  MinCostFlow::Result res = flow.solve(ss, tt);
  if (res.flow != L) {
    auto cut = flow.residual_cut(ss);
    int cut_points = 0, cut_right = 0;
    for (int v : cut) {
      if (v < L) ++cut_points;
      else if (v < L + R) ++cut_right;
    }
    throw std::runtime_error("transport infeasible: violated cut with " +
                             std::to_string(cut_points) + " points reaching only " +
                             std::to_string(cut_right) + " of " + std::to_string(R) +
                             " (center,group) nodes");
  }

  TransportResult out;
  out.right_of_left.assign(L, -1);
  for (std::size_t e = 0; e < prob.edges.size(); ++e) {
    if (flow.flow_on(edge_arcs[e]) <= 0) continue;
    const auto& ed = prob.edges[e];
    if (out.right_of_left[ed.left_index] != -1)
      throw std::logic_error("transport: point shipped twice");
    out.right_of_left[ed.left_index] = ed.right_index;
    out.cost += ed.cost;
    out.scaled_cost += scaled_flow_cost(ed.cost);
  }
  std::vector<long long> intake(R, 0);
  for (int j = 0; j < L; ++j) {
    if (out.right_of_left[j] < 0) throw std::logic_error("transport: point left unshipped");
    ++intake[out.right_of_left[j]];
  }
  for (int r = 0; r < R; ++r)
    if (intake[r] < prob.right[r].lb || intake[r] > prob.right[r].ub)
      throw std::logic_error("transport: a right node violates its bounds");
  return out;
}

/// Rounds x* on one support component to an integral assignment with
/// per-(center,group) counts in [floor(l_i), ceil(t*l_i)]. The fractional
/// solution itself enters only through the component and its lower bounds;
/// the allowed edges are the model's radius-D variable support.
inline IntegralAssignment round_component(const Instance& inst, const LPModel& model,
                                          const SupportComponent& component,
                                          const std::vector<double>& lower_bounds) {
  TransportProblem prob;
  prob.left = component.points;
  std::vector<int> left_index(inst.n(), -1);
  for (std::size_t i = 0; i < prob.left.size(); ++i) left_index[prob.left[i]] = static_cast<int>(i);

  const int ell = inst.num_groups();
  const long long t = inst.t();
  std::vector<int> right_base(component.centers.size());
  for (std::size_t ci = 0; ci < component.centers.size(); ++ci) {
    right_base[ci] = static_cast<int>(prob.right.size());
    double li = lower_bounds[ci];
    long long lb = static_cast<long long>(std::floor(li + 1e-9));
    long long ub = static_cast<long long>(std::ceil(static_cast<double>(t) * li - 1e-9));
    for (GroupId a = 0; a < ell; ++a) prob.right.push_back({component.centers[ci], a, lb, ub});
  }

  std::vector<int> center_pos(inst.n(), -1);
  for (std::size_t ci = 0; ci < component.centers.size(); ++ci)
    center_pos[component.centers[ci]] = static_cast<int>(ci);
  for (const auto& var : model.vars) {
    int li = left_index[var.point];
    if (li < 0) continue;
    int ci = center_pos[model.centers[var.center_index]];
    if (ci < 0) continue;  // variable reaches outside the component
    GroupId g = inst.group_of(var.point);
    prob.edges.push_back({li, right_base[ci] + g, var.cost});
  }

  TransportResult res = solve_transport(prob);
  IntegralAssignment out;
  out.assignment.assign(inst.n(), -1);
  for (std::size_t i = 0; i < prob.left.size(); ++i)
    out.assignment[prob.left[i]] = prob.right[res.right_of_left[i]].center;
  out.counts = AssignmentCounts::from_assignment(inst, out.assignment, component.centers);
  return out;
}

/// Minimum-cost total assignment hitting the given per-(center,group) counts
/// exactly. Every (point, center) edge is allowed.
inline std::vector<CenterId> reassign_fixed_counts(
    const Instance& inst, const std::vector<CenterId>& centers,
    const std::vector<std::vector<long long>>& target_counts) {
  const int ell = inst.num_groups();
  if (!inst.disjoint()) throw std::invalid_argument("reassign_fixed_counts requires disjoint groups");
  for (GroupId a = 0; a < ell; ++a) {
    long long total = 0;
    for (std::size_t ci = 0; ci < centers.size(); ++ci) total += target_counts[ci][a];
    if (total != inst.group_size(a))
      throw std::invalid_argument("reassign_fixed_counts: counts do not cover group " +
                                  std::to_string(a));
  }

  TransportProblem prob;
  prob.left.resize(inst.n());
  for (PointId p = 0; p < inst.n(); ++p) prob.left[p] = p;
  for (std::size_t ci = 0; ci < centers.size(); ++ci)
    for (GroupId a = 0; a < ell; ++a)
      prob.right.push_back({centers[ci], a, target_counts[ci][a], target_counts[ci][a]});
  for (PointId p = 0; p < inst.n(); ++p) {
    GroupId g = inst.group_of(p);
    for (std::size_t ci = 0; ci < centers.size(); ++ci)
      prob.edges.push_back({p, static_cast<int>(ci) * ell + g, inst.distance(p, centers[ci])});
  }

  TransportResult res = solve_transport(prob);
  std::vector<CenterId> assignment(inst.n());
  for (PointId p = 0; p < inst.n(); ++p) assignment[p] = prob.right[res.right_of_left[p]].center;
  return assignment;
}

}  // namespace pfkm

#endif  // PFKM_TRANSPORT_HPP
