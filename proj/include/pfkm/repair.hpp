#ifndef PFKM_REPAIR_HPP
#define PFKM_REPAIR_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfkm/core.hpp"

namespace pfkm {

struct RepairStats {
  int s_initial = 0;
  int gamma = 0;             // times l'_{i*} was raised
  int moved_second_case = 0;
  int iterations = 0;
  int moved_total = 0;  // points whose final center differs from sigma_int
  bool lprime_init_divergent = false;  // initial l'_{i*} != floor(l_{i*})
};

struct RepairTraceEvent {
  int iteration = 0;
  int case_taken = 0;  // 1 or 2
  PointId client = -1;
  CenterId target = -1;
  struct Move {
    PointId client;
    CenterId from;
    CenterId to;
  };
  std::vector<Move> moves;  // second-case j_b relocations
  std::vector<long long> lprime_after;
};

/// Partial assignment mid-repair. The invariant counts[i,a] in
/// [l'_i, t*l'_i] is checked after initialization and every loop iteration.
struct RepairState {
  std::vector<CenterId> centers;  // component centers
  std::vector<PointId> points;    // component points
  std::vector<CenterId> assignment;  // instance-sized, -1 = unassigned
  std::vector<PointId> unassigned;   // S, insertion order
  std::vector<std::vector<long long>> counts;  // [center idx][group]
  std::vector<long long> lprime;
  std::vector<long long> floor_bounds;  // floor(l_i) from the rounding stage
  int designated = -1;                  // index of i* in centers
};

namespace detail {

inline void check_repair_invariant(const RepairState& st, long long t, const char* where) {
  for (std::size_t ci = 0; ci < st.centers.size(); ++ci)
    for (long long v : st.counts[ci])
      if (v < st.lprime[ci] || v > t * st.lprime[ci])
        throw std::logic_error(std::string("repair invariant violated ") + where);
}

}  // namespace detail

/// Unassigns, per (center, group), the Delta = counts - t*floor(l_i) excess
/// clients (those farthest from their center) and initializes the bounds
/// l'_i. |S| can never exceed k_C * ell * t; that is checked.
inline RepairState build_unassigned(const Instance& inst, const IntegralAssignment& sigma_int,
                                    const std::vector<PointId>& component_points,
                                    const std::vector<double>& lower_bounds) {
  RepairState st;
  st.centers = sigma_int.counts.centers;
  st.points = component_points;
  st.assignment = sigma_int.assignment;
  st.counts = sigma_int.counts.counts;
  const long long t = inst.t();
  const int ell = inst.num_groups();

  st.floor_bounds.resize(st.centers.size());
  for (std::size_t ci = 0; ci < st.centers.size(); ++ci)
    st.floor_bounds[ci] = static_cast<long long>(std::floor(lower_bounds[ci] + 1e-9));

  for (std::size_t ci = 0; ci < st.centers.size(); ++ci) {
    CenterId c = st.centers[ci];
    for (GroupId a = 0; a < ell; ++a) {
      long long excess = st.counts[ci][a] - t * st.floor_bounds[ci];
      if (excess <= 0) continue;
      std::vector<PointId> members;
      for (PointId p : component_points)
        if (st.assignment[p] == c && inst.group_of(p) == a) members.push_back(p);
      std::sort(members.begin(), members.end(), [&](PointId x, PointId y) {
        double dx = inst.distance(x, c), dy = inst.distance(y, c);
        if (dx != dy) return dx > dy;
        return x < y;
      });
      for (long long m = 0; m < excess; ++m) {
        PointId p = members[m];
        st.assignment[p] = -1;
        --st.counts[ci][a];
        st.unassigned.push_back(p);
      }
    }
  }

  st.lprime.resize(st.centers.size());
  for (std::size_t ci = 0; ci < st.centers.size(); ++ci)
    st.lprime[ci] = *std::min_element(st.counts[ci].begin(), st.counts[ci].end());

  // i*: the center with the largest floor(l_i) headroom, fixed from here on.
  st.designated = 0;
  for (std::size_t ci = 1; ci < st.centers.size(); ++ci)
    if (st.floor_bounds[ci] > st.floor_bounds[st.designated]) st.designated = static_cast<int>(ci);

  if (st.unassigned.size() >
      st.centers.size() * static_cast<std::size_t>(ell) * static_cast<std::size_t>(t))
    throw std::logic_error("repair: |S| exceeds k*ell*t");
  detail::check_repair_invariant(st, t, "after initialization");
  return st;
}

/// The two-case loop: place an unassigned client wherever fairness has slack,
/// otherwise shuttle one client per scarce group onto i* and raise l'_{i*}.
/// Returns the exactly fair total assignment for the component.
inline std::vector<CenterId> repair(const Instance& inst, RepairState& st, RepairStats& stats,
                                    const IntegralAssignment& sigma_int,
                                    std::vector<RepairTraceEvent>* trace = nullptr) {
  const long long t = inst.t();
  const int ell = inst.num_groups();
  if (t < 2) throw std::invalid_argument("repair requires t >= 2");

  stats.s_initial = static_cast<int>(st.unassigned.size());
  stats.lprime_init_divergent =
      st.lprime[st.designated] != st.floor_bounds[st.designated];
  std::vector<char> second_case_mark(inst.n(), 0);
  const CenterId star = st.centers[st.designated];

  while (!st.unassigned.empty()) {
    ++stats.iterations;
    RepairTraceEvent ev;
    ev.iteration = stats.iterations;

    // First case: some j in S fits under a center whose group-a count has
    // slack below t*l'_i. Take the first such j, the nearest such center.
    bool placed = false;
    for (std::size_t si = 0; si < st.unassigned.size() && !placed; ++si) {
      PointId j = st.unassigned[si];
      GroupId a = inst.group_of(j);
      int best_ci = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t ci = 0; ci < st.centers.size(); ++ci) {
        if (st.counts[ci][a] >= t * st.lprime[ci]) continue;
        double d = inst.distance(j, st.centers[ci]);
        if (d < best_d || (d == best_d && st.centers[ci] < st.centers[best_ci])) {
          best_ci = static_cast<int>(ci);
          best_d = d;
        }
      }
      if (best_ci < 0) continue;
      st.assignment[j] = st.centers[best_ci];
      ++st.counts[best_ci][a];
      st.unassigned.erase(st.unassigned.begin() + si);
      placed = true;
      ev.case_taken = 1;
      ev.client = j;
      ev.target = st.centers[best_ci];
    }

    if (!placed) {
      // Second case around the designated center i*.
      PointId j = st.unassigned.front();
      GroupId a = inst.group_of(j);
      int ds = st.designated;
      if (st.counts[ds][a] != t * st.lprime[ds])
        throw std::logic_error("repair: second case entered without a tight i*");
      for (PointId p : st.points)
        if (st.assignment[p] == star && inst.group_of(p) == a && second_case_mark[p])
          throw std::logic_error("repair: marked client of the active group already at i*");

      ev.case_taken = 2;
      ev.client = j;
      ev.target = star;
      for (GroupId b = 0; b < ell; ++b) {
        if (b == a) continue;  // j itself restores group a at i*
        if (st.counts[ds][b] != st.lprime[ds]) continue;  // b in A
        // Donor center: counts[i_b, b] > l'_{i_b}; its farthest group-b
        // client is the one offered, and we take the offer nearest to i*.
        int best_ci = -1;
        PointId best_client = -1;
        double best_to_star = std::numeric_limits<double>::infinity();
        for (std::size_t ci = 0; ci < st.centers.size(); ++ci) {
          if (st.counts[ci][b] <= st.lprime[ci]) continue;
          PointId offer = -1;
          double offer_d = -1.0;
          for (PointId p : st.points) {
            if (st.assignment[p] != st.centers[ci] || inst.group_of(p) != b) continue;
            double d = inst.distance(p, st.centers[ci]);
            if (d > offer_d || (d == offer_d && p < offer)) {
              offer = p;
              offer_d = d;
            }
          }
          if (offer < 0) throw std::logic_error("repair: positive count without members");
          double to_star = inst.distance(offer, star);
          if (to_star < best_to_star ||
              (to_star == best_to_star && st.centers[ci] < st.centers[best_ci])) {
            best_ci = static_cast<int>(ci);
            best_client = offer;
            best_to_star = to_star;
          }
        }
        if (best_ci >= 0) {
          --st.counts[best_ci][b];
          ++st.counts[ds][b];
          st.assignment[best_client] = star;
          second_case_mark[best_client] = 1;
          ++stats.moved_second_case;
          ev.moves.push_back({best_client, st.centers[best_ci], star});
          continue;
        }
        // No donor exists only in the l' = 0 corner, where the rounding
        // unassigned group b completely; balance guarantees group-b clients
        // are still waiting in S, so place one directly instead of moving an
        // assigned client.
        if (st.lprime[ds] != 0)
          throw std::logic_error("repair: no donor center for a scarce group");
        std::size_t pull = st.unassigned.size();
        for (std::size_t si = 0; si < st.unassigned.size(); ++si) {
          PointId p = st.unassigned[si];
          if (inst.group_of(p) != b) continue;
          if (pull == st.unassigned.size() ||
              inst.distance(p, star) < inst.distance(st.unassigned[pull], star) ||
              (inst.distance(p, star) == inst.distance(st.unassigned[pull], star) &&
               p < st.unassigned[pull]))
            pull = si;
        }
        if (pull == st.unassigned.size())
          throw std::logic_error("repair: scarce group has no donor and no unassigned client");
        PointId pulled = st.unassigned[pull];
        st.assignment[pulled] = star;
        ++st.counts[ds][b];
        st.unassigned.erase(st.unassigned.begin() + pull);
        ev.moves.push_back({pulled, -1, star});
      }
      st.assignment[j] = star;
      ++st.counts[ds][a];
      st.unassigned.erase(st.unassigned.begin());
      ++st.lprime[ds];
      ++stats.gamma;
    }

    detail::check_repair_invariant(st, t, "after an iteration");
    if (trace) {
      ev.lprime_after = st.lprime;
      trace->push_back(ev);
    }
  }

  for (PointId p : st.points)
    if (st.assignment[p] < 0) throw std::logic_error("repair: point left unassigned");

  stats.moved_total = 0;
  for (PointId p : st.points)
    if (st.assignment[p] != sigma_int.assignment[p]) ++stats.moved_total;

  const int k_c = static_cast<int>(st.centers.size());
  if (stats.gamma > k_c) throw std::logic_error("repair: gamma exceeds k");
  if (stats.moved_second_case > k_c * ell)
    throw std::logic_error("repair: second-case moves exceed k*ell");
  if (stats.moved_total > stats.s_initial + k_c * ell)
    throw std::logic_error("repair: moved clients exceed |S| + k*ell");

  AssignmentCounts final_counts =
      AssignmentCounts::from_assignment(inst, st.assignment, st.centers);
  if (!is_fair(final_counts, t)) throw std::logic_error("repair: output is not fair");
  return st.assignment;
}

}  // namespace pfkm

#endif  // PFKM_REPAIR_HPP
