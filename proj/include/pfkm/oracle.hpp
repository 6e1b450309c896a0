#ifndef PFKM_ORACLE_HPP
#define PFKM_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "pfkm/core.hpp"
#include "pfkm/transport.hpp"

namespace pfkm {

struct OracleResult {
  bool feasible = false;
  Solution solution;
};

namespace detail {

inline bool counts_fair(const std::vector<std::vector<long long>>& counts, long long t) {
  for (const auto& row : counts) {
    long long mn = row[0], mx = row[0];
    for (long long v : row) {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (mx > t * mn) return false;
  }
  return true;
}

// first-found minimum under lexicographic enumeration is the lex-smallest
// optimum; strictly-better only.
struct BestTracker {
  bool has = false;
  double cost = 0.0;
  std::vector<CenterId> assignment;

  void offer(double c, const std::vector<CenterId>& a) {
    if (!has || c < cost - 1e-12 ||
        (std::abs(c - cost) <= 1e-12 && a < assignment)) {
      has = true;
      cost = c;
      assignment = a;
    }
  }
};

}  // namespace detail

/// Mode A: full |centers|^n enumeration, fairness checked on membership
/// counts (works for overlapping groups). Ties break to the lexicographically
/// smallest assignment vector.
inline OracleResult exact_fair_assignment_enum(const Instance& inst,
                                               const std::vector<CenterId>& centers) {
  const int n = inst.n();
  const int kc = static_cast<int>(centers.size());
  double space = std::pow(static_cast<double>(kc), n);
  if (space > 3e7)
    throw std::invalid_argument("exact_fair_assignment_enum: enumeration space too large");

  std::vector<std::vector<long long>> counts(kc, std::vector<long long>(inst.num_groups(), 0));
  std::vector<CenterId> assignment(n, -1);
  detail::BestTracker best;
  const long long t = inst.t();

  auto rec = [&](auto&& self, int p, double cost) -> void {
    if (best.has && cost > best.cost + 1e-12) return;
    if (p == n) {
      if (detail::counts_fair(counts, t)) best.offer(cost, assignment);
      return;
    }
    for (int ci = 0; ci < kc; ++ci) {
      assignment[p] = centers[ci];
      for (GroupId g : inst.groups_of(p)) ++counts[ci][g];
      self(self, p + 1, cost + inst.distance(p, centers[ci]));
      for (GroupId g : inst.groups_of(p)) --counts[ci][g];
    }
    assignment[p] = -1;
  };
  rec(rec, 0, 0.0);

  OracleResult out;
  if (!best.has) return out;
  out.feasible = true;
  out.solution = {centers, best.assignment, best.cost};
  return out;
}

/// Mode B for disjoint groups: enumerate per-center fair count vectors whose
/// totals hit the group sizes, then price each complete matrix with a
/// min-cost transport. Must agree with Mode A wherever both run.
inline OracleResult exact_fair_assignment_counts(const Instance& inst,
                                                 const std::vector<CenterId>& centers) {
  if (!inst.disjoint())
    throw std::invalid_argument("count-mode oracle requires disjoint groups");
  const int kc = static_cast<int>(centers.size());
  const int ell = inst.num_groups();
  const long long t = inst.t();

  // All fair vectors bounded by the group sizes, shared across centers.
  std::vector<std::vector<long long>> fair_vectors;
  std::vector<long long> cur(ell, 0);
  auto gen = [&](auto&& self, int g) -> void {
    if (g == ell) {
      long long mn = *std::min_element(cur.begin(), cur.end());
      long long mx = *std::max_element(cur.begin(), cur.end());
      if (mx <= t * mn) fair_vectors.push_back(cur);
      return;
    }
    for (long long v = 0; v <= inst.group_size(g); ++v) {
      cur[g] = v;
      self(self, g + 1);
    }
    cur[g] = 0;
  };
  gen(gen, 0);

  double space = std::pow(static_cast<double>(fair_vectors.size()), std::max(0, kc - 1));
  if (space > 2e6)
    throw std::invalid_argument("exact_fair_assignment_counts: count-matrix space too large");

  detail::BestTracker best;
  std::vector<std::vector<long long>> matrix(kc, std::vector<long long>(ell, 0));
  std::vector<long long> remaining(inst.group_sizes().begin(), inst.group_sizes().end());

  auto rec = [&](auto&& self, int ci) -> void {
    if (ci == kc - 1) {
      long long mn = remaining[0], mx = remaining[0];
      for (long long v : remaining) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      if (mn < 0 || mx > t * std::max(mn, 0LL)) return;
      matrix[ci] = remaining;
      auto assignment = reassign_fixed_counts(inst, centers, matrix);
      best.offer(solution_cost(inst, assignment), assignment);
      return;
    }
    for (const auto& v : fair_vectors) {
      bool ok = true;
      for (int g = 0; g < ell; ++g)
        if (v[g] > remaining[g]) {
          ok = false;
          break;
        }
      if (!ok) continue;
      matrix[ci] = v;
      for (int g = 0; g < ell; ++g) remaining[g] -= v[g];
      self(self, ci + 1);
      for (int g = 0; g < ell; ++g) remaining[g] += v[g];
    }
  };
  rec(rec, 0);

  OracleResult out;
  if (!best.has) return out;
  out.feasible = true;
  out.solution = {centers, best.assignment, best.cost};
  return out;
}

namespace detail {

/// Size of the class-split search space (product over interchangeability
/// classes of compositions into |centers| parts); used to pick a mode.
inline double class_split_space(const Instance& inst, const std::vector<CenterId>& centers) {
  std::map<std::pair<std::vector<double>, std::vector<GroupId>>, long long> classes;
  for (PointId p = 0; p < inst.n(); ++p) {
    std::vector<double> dists;
    for (CenterId c : centers) dists.push_back(inst.distance(p, c));
    std::vector<GroupId> sig = inst.groups_of(p);
    std::sort(sig.begin(), sig.end());
    ++classes[{std::move(dists), std::move(sig)}];
  }
  double space = 1.0;
  for (const auto& [key, size] : classes) {
    double comb = 1.0;
    for (std::size_t i = 1; i < centers.size(); ++i)
      comb *= static_cast<double>(size + static_cast<long long>(i)) / static_cast<double>(i);
    space *= comb;
    if (space > 1e18) return space;
  }
  return space;
}

}  // namespace detail

/// Count-mode oracle for overlapping groups. Points with identical distance
/// rows and identical memberships are interchangeable, so only per-class
/// counts need enumerating; the hardness constructions collapse from
/// thousands of raw assignments to a few classes.
inline OracleResult exact_fair_assignment_classes(const Instance& inst,
                                                  const std::vector<CenterId>& centers) {
  const int n = inst.n();
  const int kc = static_cast<int>(centers.size());
  const long long t = inst.t();

  struct Key {
    std::vector<double> dists;
    std::vector<GroupId> sig;
    bool operator<(const Key& o) const { return std::tie(dists, sig) < std::tie(o.dists, o.sig); }
  };
  std::map<Key, std::vector<PointId>> classes_map;
  for (PointId p = 0; p < n; ++p) {
    Key key;
    key.dists.reserve(kc);
    for (CenterId c : centers) key.dists.push_back(inst.distance(p, c));
    key.sig = inst.groups_of(p);
    std::sort(key.sig.begin(), key.sig.end());
    classes_map[key].push_back(p);
  }
  struct Class {
    std::vector<PointId> members;  // ascending
    std::vector<double> dists;
    std::vector<GroupId> sig;
  };
  std::vector<Class> classes;
  for (auto& [key, members] : classes_map) {
    std::sort(members.begin(), members.end());
    classes.push_back({members, key.dists, key.sig});
  }
  // deterministic order: by smallest member id
  std::sort(classes.begin(), classes.end(),
            [](const Class& a, const Class& b) { return a.members[0] < b.members[0]; });

  double space = 1.0;
  for (const auto& cl : classes) {
    double comb = 1.0;
    for (int i = 1; i < kc; ++i)
      comb *= static_cast<double>(cl.members.size() + i) / i;
    space *= comb;
    if (space > 2e6)
      throw std::invalid_argument("exact_fair_assignment_classes: class space too large");
  }

  std::vector<std::vector<long long>> counts(kc, std::vector<long long>(inst.num_groups(), 0));
  std::vector<std::vector<long long>> split(classes.size(), std::vector<long long>(kc, 0));
  detail::BestTracker best;

  auto materialize = [&]() {
    std::vector<CenterId> assignment(n, -1);
    for (std::size_t cl = 0; cl < classes.size(); ++cl) {
      std::size_t cursor = 0;
      for (int ci = 0; ci < kc; ++ci)
        for (long long m = 0; m < split[cl][ci]; ++m)
          assignment[classes[cl].members[cursor++]] = centers[ci];
    }
    return assignment;
  };

  auto rec = [&](auto&& self, std::size_t cl, double cost) -> void {
    if (best.has && cost > best.cost + 1e-12) return;
    if (cl == classes.size()) {
      if (detail::counts_fair(counts, t)) best.offer(cost, materialize());
      return;
    }
    const Class& c = classes[cl];
    const long long size = static_cast<long long>(c.members.size());
    // distribute `size` members over centers
    std::vector<long long>& s = split[cl];
    auto dist_rec = [&](auto&& inner, int ci, long long left, double add) -> void {
      if (ci == kc - 1) {
        s[ci] = left;
        for (GroupId g : c.sig) counts[ci][g] += left;
        double leaf_add = add + static_cast<double>(left) * c.dists[ci];
        self(self, cl + 1, cost + leaf_add);
        for (GroupId g : c.sig) counts[ci][g] -= left;
        s[ci] = 0;
        return;
      }
      for (long long v = 0; v <= left; ++v) {
        s[ci] = v;
        for (GroupId g : c.sig) counts[ci][g] += v;
        inner(inner, ci + 1, left - v, add + static_cast<double>(v) * c.dists[ci]);
        for (GroupId g : c.sig) counts[ci][g] -= v;
        s[ci] = 0;
      }
    };
    dist_rec(dist_rec, 0, size, 0.0);
  };
  rec(rec, 0, 0.0);

  OracleResult out;
  if (!best.has) return out;
  out.feasible = true;
  out.solution = {centers, best.assignment, best.cost};
  return out;
}

/// Minimum-cost fair assignment to fixed centers; picks the cheapest mode
/// whose size guard admits the instance.
inline OracleResult exact_fair_assignment(const Instance& inst,
                                          const std::vector<CenterId>& centers) {
  double enum_space = std::pow(static_cast<double>(centers.size()), inst.n());
  if (inst.n() <= 12 && enum_space <= 3e7) return exact_fair_assignment_enum(inst, centers);
  if (detail::class_split_space(inst, centers) <= 2e6)
    return exact_fair_assignment_classes(inst, centers);
  if (inst.disjoint()) return exact_fair_assignment_counts(inst, centers);
  return exact_fair_assignment_classes(inst, centers);
}

/// Global optimum over all k-subsets of the candidate centers. Ties break by
/// cost, then lexicographic center set, then lexicographic assignment.
inline OracleResult exact_pfkm(const Instance& inst) {
  const auto& cands = inst.candidate_centers();
  if (cands.size() > 16) throw std::invalid_argument("exact_pfkm: too many candidate centers");
  if (inst.k() > static_cast<int>(cands.size()))
    throw std::invalid_argument("exact_pfkm: k exceeds candidate centers");

  OracleResult best;
  std::vector<CenterId> subset(inst.k());
  std::vector<CenterId> sorted_cands = cands;
  std::sort(sorted_cands.begin(), sorted_cands.end());
  // subsets in lexicographic order, so the first optimum found wins ties
  auto rec = [&](auto&& self, std::size_t start, int depth) -> void {
    if (depth == inst.k()) {
      OracleResult r = exact_fair_assignment(inst, subset);
      if (!r.feasible) return;
      if (!best.feasible || r.solution.cost < best.solution.cost - 1e-12)
        best = r;
      return;
    }
    for (std::size_t i = start; i < sorted_cands.size(); ++i) {
      subset[depth] = sorted_cands[i];
      self(self, i + 1, depth + 1);
    }
  };
  rec(rec, 0, 0);
  return best;
}

}  // namespace pfkm

#endif  // PFKM_ORACLE_HPP
