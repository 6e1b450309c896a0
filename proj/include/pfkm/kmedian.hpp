#ifndef PFKM_KMEDIAN_HPP
#define PFKM_KMEDIAN_HPP

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pfkm/core.hpp"
#include "pfkm/rng.hpp"

namespace pfkm {

/// Each point to its nearest center; ties go to the smallest center id.
inline std::vector<CenterId> nearest_assignment(const Instance& inst,
                                                const std::vector<CenterId>& centers) {
  if (centers.empty()) throw std::invalid_argument("nearest_assignment: no centers");
  std::vector<CenterId> assignment(inst.n());
  for (PointId p = 0; p < inst.n(); ++p) {
    CenterId best = centers[0];
    double best_d = inst.distance(p, best);
    for (CenterId c : centers) {
      double d = inst.distance(p, c);
      if (d < best_d || (d == best_d && c < best)) {
        best = c;
        best_d = d;
      }
    }
    assignment[p] = best;
  }
  return assignment;
}

struct BaselineSolution {
  std::vector<CenterId> centers;
  std::vector<CenterId> assignment;
  double cost = 0.0;
  int accepted_swaps = 0;
  bool hit_iteration_cap = false;
  std::vector<double> cost_history;  // cost after seeding and each swap
};

// Single-swap local search. Seeding is greedy farthest-point from a
// seed-chosen start; each round evaluates every (open, closed-candidate)
// exchange against the nearest/second-nearest distances and applies the best
// one while it still improves the cost by more than 1e-9.
inline BaselineSolution local_search_kmedian(const Instance& inst, int k, std::uint64_t seed,
                                             long long max_iters = -1) {
  const auto& candidates = inst.candidate_centers();
  if (k > static_cast<int>(candidates.size()))
    throw std::invalid_argument("local_search_kmedian: k exceeds candidate centers");
  if (max_iters < 0) max_iters = 10LL * k * inst.n();

  Rng rng(seed);
  std::vector<CenterId> centers;
  centers.reserve(k);
  centers.push_back(candidates[rng.next_below(candidates.size())]);
  std::vector<double> min_dist(inst.n());
  for (PointId p = 0; p < inst.n(); ++p) min_dist[p] = inst.distance(p, centers[0]);
  while (static_cast<int>(centers.size()) < k) {
    CenterId far = -1;
    double far_d = -1.0;
    for (CenterId c : candidates) {
      if (std::find(centers.begin(), centers.end(), c) != centers.end()) continue;
      if (min_dist[c] > far_d) {
        far_d = min_dist[c];
        far = c;
      }
    }
    centers.push_back(far);
    for (PointId p = 0; p < inst.n(); ++p) min_dist[p] = std::min(min_dist[p], inst.distance(p, far));
  }
  std::sort(centers.begin(), centers.end());

  // nearest and second-nearest open center per point
  std::vector<int> near1(inst.n());
  std::vector<double> d1(inst.n()), d2(inst.n());
  auto rebuild = [&]() {
    double cost = 0.0;
    for (PointId p = 0; p < inst.n(); ++p) {
      int b1 = -1;
      double b1d = std::numeric_limits<double>::infinity();
      double b2d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < centers.size(); ++i) {
        double d = inst.distance(p, centers[i]);
        if (d < b1d || (d == b1d && b1 >= 0 && centers[i] < centers[b1])) {
          b2d = b1d;
          b1d = d;
          b1 = static_cast<int>(i);
        } else if (d < b2d) {
          b2d = d;
        }
      }
      near1[p] = b1;
      d1[p] = b1d;
      d2[p] = b2d;
      cost += b1d;
    }
    return cost;
  };

  BaselineSolution out;
  double cost = rebuild();
  out.cost_history.push_back(cost);
  std::vector<char> open(inst.n(), 0);
  for (CenterId c : centers) open[c] = 1;

  for (;;) {
    if (out.accepted_swaps >= max_iters) {
      out.hit_iteration_cap = true;
      break;
    }
    double best_cost = cost;
    int best_out = -1;
    CenterId best_in = -1;
    for (std::size_t fi = 0; fi < centers.size(); ++fi) {
      for (CenterId c : candidates) {
        if (open[c]) continue;
        double swapped = 0.0;
        for (PointId p = 0; p < inst.n(); ++p) {
          double alt = (near1[p] == static_cast<int>(fi)) ? d2[p] : d1[p];
          swapped += std::min(alt, inst.distance(p, c));
        }
        if (swapped < best_cost - 1e-9) {
          best_cost = swapped;
          best_out = static_cast<int>(fi);
          best_in = c;
        }
      }
    }
    if (best_out < 0) break;
    open[centers[best_out]] = 0;
    open[best_in] = 1;
    centers[best_out] = best_in;
    std::sort(centers.begin(), centers.end());
    cost = rebuild();
    ++out.accepted_swaps;
    out.cost_history.push_back(cost);
  }

  out.centers = centers;
  out.assignment = nearest_assignment(inst, centers);
  out.cost = solution_cost(inst, out.assignment);
  return out;
}

}  // namespace pfkm

#endif  // PFKM_KMEDIAN_HPP
