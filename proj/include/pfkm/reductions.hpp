#ifndef PFKM_REDUCTIONS_HPP
#define PFKM_REDUCTIONS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pfkm/core.hpp"
#include "pfkm/transport.hpp"

namespace pfkm {

/// Soft uniform capacitated k-median: open k facilities (locations may
/// repeat), every client served, at most u clients per facility.
struct CkmInstance {
  std::vector<std::vector<double>> dist;
  int k = 0;
  int u = 0;

  int num_locations() const { return static_cast<int>(dist.size()); }

  double diameter() const {
    double d = 0.0;
    for (const auto& row : dist)
      for (double v : row) d = std::max(d, v);
    return d;
  }

  double min_positive() const {
    double m = -1.0;
    for (const auto& row : dist)
      for (double v : row)
        if (v > 0.0 && (m < 0.0 || v < m)) m = v;
    return m;
  }
};

struct CkmSolution {
  std::vector<int> facilities;  // k location indices (repeats allowed)
  std::vector<int> assignment;  // per location, index into facilities
  double cost = 0.0;
};

/// Scale so the smallest positive distance becomes 1.
inline CkmInstance rescaled(CkmInstance ckm) {
  double m = ckm.min_positive();
  if (m <= 0.0) return ckm;  // all points co-located, nothing to scale
  for (auto& row : ckm.dist)
    for (double& v : row) v /= m;
  return ckm;
}

inline void validate_ckm(const CkmInstance& ckm) {
  const int m = ckm.num_locations();
  if (m == 0) throw std::invalid_argument("ckm: no locations");
  if (ckm.k < 1 || ckm.u < 1) throw std::invalid_argument("ckm: k and u must be positive");
  if (static_cast<long long>(ckm.k) * ckm.u < m)
    throw std::invalid_argument("ckm: capacity k*u below the number of clients");
  double mp = ckm.min_positive();
  if (mp > 0.0 && mp < 1.0 - 1e-9)
    throw std::invalid_argument("ckm: instance must be rescaled (min positive distance >= 1)");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (std::abs(ckm.dist[i][j] - ckm.dist[j][i]) > 1e-12)
        throw std::invalid_argument("ckm: asymmetric distances");
}

struct CkmReductionMap {
  int w = 0;               // points per location
  int num_locations = 0;   // |X|
  double diameter = 0.0;
  int k = 0;
  int u = 0;
  std::vector<int> point_location;  // location of every reduced point
  std::vector<PointId> red_points;  // the k points at R
  PointId black_representative(int location) const { return location * w; }
};

/// Black group 0: W points per location of X. Red group 1: k points at an
/// extra location R at distance diam(X) from everything. t = u*W. Candidate
/// centers are one representative point per location.
inline std::pair<Instance, CkmReductionMap> reduce_ckm_to_pfkm(const CkmInstance& ckm,
                                                               double eps) {
  validate_ckm(ckm);
  if (eps <= 0.0) throw std::invalid_argument("reduce_ckm_to_pfkm: eps must be positive");
  const int m = ckm.num_locations();
  const double diam = ckm.diameter();
  CkmReductionMap map;
  map.w = static_cast<int>(std::ceil(ckm.k * diam / eps));
  map.w = std::max(map.w, 1);
  map.num_locations = m;
  map.diameter = diam;
  map.k = ckm.k;
  map.u = ckm.u;

  const int n = m * map.w + ckm.k;
  std::vector<std::vector<GroupId>> memberships(n);
  map.point_location.assign(n, m);  // default R
  for (int x = 0; x < m; ++x)
    for (int i = 0; i < map.w; ++i) {
      int p = x * map.w + i;
      map.point_location[p] = x;
      memberships[p] = {0};
    }
  for (int r = 0; r < ckm.k; ++r) {
    int p = m * map.w + r;
    memberships[p] = {1};
    map.red_points.push_back(p);
  }

  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  auto loc_dist = [&](int a, int b) {
    if (a == b) return 0.0;
    if (a == m || b == m) return diam;
    return ckm.dist[a][b];
  };
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) dist[p][q] = loc_dist(map.point_location[p], map.point_location[q]);

  std::vector<PointId> candidates;
  for (int x = 0; x < m; ++x) candidates.push_back(map.black_representative(x));
  candidates.push_back(map.red_points[0]);

  Instance inst = Instance::from_matrix(std::move(dist), std::move(memberships), ckm.k,
                                        map.w * ckm.u, std::move(candidates));
  return {std::move(inst), std::move(map)};
}

/// Reads a capacitated solution back out of a fair solution of the reduced
/// instance. Facilities sit where the red points' centers sit (relocated off
/// R onto a served location when needed); the integral client flow comes
/// from a four-layer min-cost max-flow.
inline CkmSolution extract_ckm_solution(const Instance& inst, const CkmReductionMap& map,
                                        const Solution& pfkm_sol) {
  const int m = map.num_locations;
  // facility location per red point
  std::vector<int> facility_loc;
  for (PointId red : map.red_points) {
    CenterId c = pfkm_sol.assignment[red];
    int loc = map.point_location[c];
    if (loc == m) {
      // center lives at R; park the facility at the first black client it
      // serves (fairness guarantees one exists)
      PointId black = -1;
      for (PointId p = 0; p < inst.n(); ++p)
        if (pfkm_sol.assignment[p] == c && map.point_location[p] != m) {
          black = p;
          break;
        }
      if (black < 0)
        throw std::runtime_error("extract_ckm_solution: center at R serves no clients in X");
      loc = map.point_location[black];
    }
    facility_loc.push_back(loc);
  }

  // layered network: source -> location (cap 1) -> facility (cap 1, cost d)
  // -> sink (cap u)
  const int kf = static_cast<int>(facility_loc.size());
  const int source = m + kf, sink = source + 1;
  MinCostFlow flow(sink + 1);
  std::vector<std::vector<int>> arcs(m, std::vector<int>(kf));
  auto loc_dist = [&](int a, int b) { return inst.distance(map.black_representative(a), map.black_representative(b)); };
  for (int x = 0; x < m; ++x) flow.add_arc(source, x, 1, 0);
  for (int x = 0; x < m; ++x)
    for (int f = 0; f < kf; ++f)
      arcs[x][f] = flow.add_arc(x, m + f, 1, scaled_flow_cost(loc_dist(x, facility_loc[f])));
  for (int f = 0; f < kf; ++f) flow.add_arc(m + f, sink, map.u, 0);

  auto res = flow.solve(source, sink);
  if (res.flow != m)
    throw std::runtime_error("extract_ckm_solution: client flow saturates only " +
                             std::to_string(res.flow) + " of " + std::to_string(m));

  CkmSolution out;
  out.facilities = facility_loc;
  out.assignment.assign(m, -1);
  for (int x = 0; x < m; ++x)
    for (int f = 0; f < kf; ++f)
      if (flow.flow_on(arcs[x][f]) > 0) out.assignment[x] = f;
  for (int x = 0; x < m; ++x) {
    if (out.assignment[x] < 0) throw std::logic_error("extract_ckm_solution: unassigned client");
    out.cost += loc_dist(x, facility_loc[out.assignment[x]]);
  }
  return out;
}

/// The forward construction: a capacitated solution of cost z becomes a fair
/// solution of cost exactly W*z + k*diam. Facilities with no clients are
/// dropped; their red points ride along to the first open center.
inline Solution pfkm_solution_from_ckm(const Instance& inst, const CkmReductionMap& map,
                                       const CkmSolution& ckm_sol) {
  const int m = map.num_locations;
  std::vector<char> used(ckm_sol.facilities.size(), 0);
  for (int x = 0; x < m; ++x) used[ckm_sol.assignment[x]] = 1;

  std::vector<int> center_of_location(m, -1);
  Solution sol;
  for (std::size_t f = 0; f < ckm_sol.facilities.size(); ++f) {
    if (!used[f]) continue;
    int v = ckm_sol.facilities[f];
    if (center_of_location[v] < 0) {
      center_of_location[v] = map.black_representative(v);
      sol.centers.push_back(center_of_location[v]);
    }
  }
  if (sol.centers.empty()) throw std::invalid_argument("pfkm_solution_from_ckm: empty solution");

  sol.assignment.assign(inst.n(), -1);
  for (int x = 0; x < m; ++x) {
    CenterId c = center_of_location[ckm_sol.facilities[ckm_sol.assignment[x]]];
    for (int i = 0; i < map.w; ++i) sol.assignment[x * map.w + i] = c;
  }
  for (std::size_t f = 0; f < ckm_sol.facilities.size(); ++f) {
    CenterId c = used[f] ? center_of_location[ckm_sol.facilities[f]] : sol.centers.front();
    sol.assignment[map.red_points[f]] = c;
  }
  sol.cost = solution_cost(inst, sol.assignment);
  return sol;
}

// ---------------------------------------------------------------------------
// 3-uniform hypergraph 2-coloring -> overlapping-groups instance with k=2.

struct Hypergraph3 {
  int n_vertices = 0;
  std::vector<std::array<int, 3>> edges;
};

inline void validate_hypergraph(const Hypergraph3& h) {
  if (h.n_vertices < 1) throw std::invalid_argument("hypergraph: no vertices");
  for (const auto& e : h.edges) {
    for (int v : e)
      if (v < 0 || v >= h.n_vertices) throw std::invalid_argument("hypergraph: vertex out of range");
    if (e[0] == e[1] || e[0] == e[2] || e[1] == e[2])
      throw std::invalid_argument("hypergraph: edge vertices must be distinct");
  }
}

/// Exhaustive 2-colorability: no edge monochromatic.
inline bool two_colorable(const Hypergraph3& h) {
  if (h.edges.empty()) return true;
  for (std::uint64_t mask = 0; mask < (1ULL << h.n_vertices); ++mask) {
    bool ok = true;
    for (const auto& e : h.edges) {
      int c0 = (mask >> e[0]) & 1, c1 = (mask >> e[1]) & 1, c2 = (mask >> e[2]) & 1;
      if (c0 == c1 && c1 == c2) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

struct HypergraphReductionMap {
  long long side_points = 0;  // N^rho per side
  int n_vertices = 0;
  PointId vertex_point(int v) const { return static_cast<PointId>(side_points) + v; }
};

/// Line metric p1 - q - p2; vertex points at q, N^rho side points at p1 and
/// p2. Group 0 holds the side points, one group per hyperedge holds its
/// vertices, t = n. Candidate centers are one point per location.
inline std::pair<Instance, HypergraphReductionMap> reduce_hypergraph_to_pfkm(const Hypergraph3& h,
                                                                             int rho) {
  validate_hypergraph(h);
  if (rho < 1) throw std::invalid_argument("reduce_hypergraph_to_pfkm: rho must be >= 1");
  long long side = 1;
  for (int i = 0; i < rho; ++i) {
    side *= h.n_vertices;
    if (side > 2'000'000) throw std::invalid_argument("reduce_hypergraph_to_pfkm: N^rho too large");
  }
  const long long n = 2 * side + h.n_vertices;

  HypergraphReductionMap map;
  map.side_points = side;
  map.n_vertices = h.n_vertices;

  // locations: 0 = p1, 1 = q, 2 = p2
  auto location_of = [&](long long p) {
    if (p < side) return 0;
    if (p < side + h.n_vertices) return 1;
    return 2;
  };
  std::vector<std::vector<GroupId>> memberships(n);
  for (long long p = 0; p < n; ++p)
    if (location_of(p) != 1) memberships[p] = {0};
  for (std::size_t e = 0; e < h.edges.size(); ++e)
    for (int v : h.edges[e]) memberships[map.vertex_point(v)].push_back(static_cast<GroupId>(e + 1));

  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
  for (long long p = 0; p < n; ++p)
    for (long long q = 0; q < n; ++q)
      dist[p][q] = std::abs(location_of(p) - location_of(q));

  std::vector<PointId> candidates = {0, static_cast<PointId>(side),
                                     static_cast<PointId>(side + h.n_vertices)};
  Instance inst = Instance::from_matrix(std::move(dist), std::move(memberships), 2,
                                        static_cast<int>(n), std::move(candidates));
  return {std::move(inst), std::move(map)};
}

// ---------------------------------------------------------------------------
// JSON input formats

inline CkmInstance ckm_from_json(const nlohmann::json& j) {
  CkmInstance ckm;
  ckm.k = j.at("k").get<int>();
  ckm.u = j.at("u").get<int>();
  for (const auto& row : j.at("dist")) ckm.dist.push_back(row.get<std::vector<double>>());
  return ckm;
}

inline Hypergraph3 hypergraph_from_json(const nlohmann::json& j) {
  Hypergraph3 h;
  h.n_vertices = j.at("n_vertices").get<int>();
  for (const auto& e : j.at("edges")) {
    auto v = e.get<std::vector<int>>();
    if (v.size() != 3) throw std::invalid_argument("hypergraph: edges must have three vertices");
    h.edges.push_back({v[0], v[1], v[2]});
  }
  return h;
}

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json dist = nlohmann::json::array();
  for (PointId p = 0; p < inst.n(); ++p) {
    nlohmann::json row = nlohmann::json::array();
    for (PointId q = 0; q < inst.n(); ++q) row.push_back(inst.distance(p, q));
    dist.push_back(std::move(row));
  }
  nlohmann::json groups = nlohmann::json::array();
  for (PointId p = 0; p < inst.n(); ++p) groups.push_back(inst.groups_of(p));
  return {{"dist", std::move(dist)},
          {"groups", std::move(groups)},
          {"k", inst.k()},
          {"t", inst.t()},
          {"candidate_centers", inst.candidate_centers()}};
}

inline Instance instance_from_json(const nlohmann::json& j) {
  std::vector<std::vector<double>> dist;
  for (const auto& row : j.at("dist")) dist.push_back(row.get<std::vector<double>>());
  std::vector<std::vector<GroupId>> groups;
  for (const auto& g : j.at("groups")) groups.push_back(g.get<std::vector<GroupId>>());
  std::vector<PointId> cands;
  if (j.contains("candidate_centers")) cands = j["candidate_centers"].get<std::vector<PointId>>();
  return Instance::from_matrix(std::move(dist), std::move(groups), j.at("k").get<int>(),
                               j.at("t").get<int>(), std::move(cands));
}

}  // namespace pfkm

#endif  // PFKM_REDUCTIONS_HPP
