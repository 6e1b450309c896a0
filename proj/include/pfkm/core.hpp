#ifndef PFKM_CORE_HPP
#define PFKM_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pfkm/rng.hpp"

namespace pfkm {

using PointId = int;
using CenterId = int;  // centers are points, so a center id is a point id
using GroupId = int;

constexpr double kCostRelTol = 1e-9;

/// Clustering instance: points with group labels, a metric, k and the
/// balance parameter t. Groups are dense ids 0..ell-1. In the disjoint
/// variant every point carries exactly one group; the overlapping variant
/// (used by the hardness constructions and the exact oracle) allows any
/// number, including zero for points no constraint mentions.
class Instance {
 public:
  static Instance from_matrix(std::vector<std::vector<double>> dist,
                              std::vector<std::vector<GroupId>> memberships, int k, int t,
                              std::vector<PointId> candidate_centers = {}) {
    Instance inst;
    inst.n_ = static_cast<int>(dist.size());
    inst.memberships_ = std::move(memberships);
    inst.k_ = k;
    inst.t_ = t;
    inst.dist_.assign(static_cast<std::size_t>(inst.n_) * inst.n_, 0.0);
    for (int i = 0; i < inst.n_; ++i) {
      if (static_cast<int>(dist[i].size()) != inst.n_)
        throw std::invalid_argument("distance matrix is not square");
      for (int j = 0; j < inst.n_; ++j) inst.dist_[static_cast<std::size_t>(i) * inst.n_ + j] = dist[i][j];
    }
    inst.finish_init(std::move(candidate_centers));
    return inst;
  }

  static Instance from_points(std::vector<std::vector<double>> coords,
                              std::vector<std::vector<GroupId>> memberships, int k, int t,
                              std::vector<PointId> candidate_centers = {}) {
    Instance inst;
    inst.n_ = static_cast<int>(coords.size());
    inst.coords_ = std::move(coords);
    inst.memberships_ = std::move(memberships);
    inst.k_ = k;
    inst.t_ = t;
    if (inst.n_ <= kDenseMatrixLimit) {
      inst.dist_.assign(static_cast<std::size_t>(inst.n_) * inst.n_, 0.0);
      for (int i = 0; i < inst.n_; ++i)
        for (int j = i + 1; j < inst.n_; ++j) {
          double d = inst.euclidean(i, j);
          inst.dist_[static_cast<std::size_t>(i) * inst.n_ + j] = d;
          inst.dist_[static_cast<std::size_t>(j) * inst.n_ + i] = d;
        }
    }
    inst.finish_init(std::move(candidate_centers));
    return inst;
  }

  /// Disjoint-variant convenience: one group id per point.
  static Instance from_points_disjoint(std::vector<std::vector<double>> coords,
                                       const std::vector<GroupId>& groups, int k, int t,
                                       std::vector<PointId> candidate_centers = {}) {
    std::vector<std::vector<GroupId>> memberships(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) memberships[i] = {groups[i]};
    return from_points(std::move(coords), std::move(memberships), k, t, std::move(candidate_centers));
  }

  static Instance from_matrix_disjoint(std::vector<std::vector<double>> dist,
                                       const std::vector<GroupId>& groups, int k, int t,
                                       std::vector<PointId> candidate_centers = {}) {
    std::vector<std::vector<GroupId>> memberships(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i) memberships[i] = {groups[i]};
    return from_matrix(std::move(dist), std::move(memberships), k, t, std::move(candidate_centers));
  }

  int n() const { return n_; }
  int k() const { return k_; }
  int t() const { return t_; }
  int num_groups() const { return ell_; }
  bool disjoint() const { return disjoint_; }

  double distance(PointId a, PointId b) const {
    if (!dist_.empty()) return dist_[static_cast<std::size_t>(a) * n_ + b];
    return euclidean(a, b);
  }

  GroupId group_of(PointId p) const {
    if (!disjoint_) throw std::logic_error("group_of requires disjoint groups");
    return memberships_[p][0];
  }

  const std::vector<GroupId>& groups_of(PointId p) const { return memberships_[p]; }

  const std::vector<PointId>& candidate_centers() const { return candidate_centers_; }

  long long group_size(GroupId g) const { return group_sizes_[g]; }
  const std::vector<long long>& group_sizes() const { return group_sizes_; }

  const std::vector<PointId>& group_members(GroupId g) const { return group_members_[g]; }

  const std::vector<std::vector<double>>& coords() const { return coords_; }

  double max_distance() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) m = std::max(m, distance(i, j));
    return m;
  }

  double min_positive_distance() const {
    double m = -1.0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) {
        double d = distance(i, j);
        if (d > 0.0 && (m < 0.0 || d < m)) m = d;
      }
    return m;  // -1 when all points are co-located
  }

  /// Metric sanity: d(p,p)=0, symmetry, and the triangle inequality on all
  /// triples up to n<=30, sampled triples above. Relative tolerance 1e-9.
  void check_metric(Rng* rng = nullptr) const {
    for (int i = 0; i < n_; ++i)
      if (distance(i, i) != 0.0) throw std::invalid_argument("distance(p,p) != 0");
    auto check_triple = [&](int a, int b, int c) {
      double ab = distance(a, b), bc = distance(b, c), ac = distance(a, c);
      if (std::abs(ab - distance(b, a)) > 1e-12)
        throw std::invalid_argument("distance matrix is not symmetric");
      double slack = 1e-9 * std::max(1.0, ac);
      if (ac > ab + bc + slack) throw std::invalid_argument("triangle inequality violated");
    };
    if (n_ <= 30) {
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
          for (int c = 0; c < n_; ++c) check_triple(a, b, c);
    } else {
      Rng local(0x7261 + static_cast<std::uint64_t>(n_));
      Rng& r = rng ? *rng : local;
      for (int s = 0; s < 30 * n_; ++s)
        check_triple(r.next_int(0, n_ - 1), r.next_int(0, n_ - 1), r.next_int(0, n_ - 1));
    }
  }

 private:
  static constexpr int kDenseMatrixLimit = 4096;

  double euclidean(PointId a, PointId b) const {
    double s = 0.0;
    const auto& ca = coords_[a];
    const auto& cb = coords_[b];
    for (std::size_t d = 0; d < ca.size(); ++d) {
      double diff = ca[d] - cb[d];
      s += diff * diff;
    }
    return std::sqrt(s);
  }

  void finish_init(std::vector<PointId> candidate_centers) {
    if (n_ <= 0) throw std::invalid_argument("instance has no points");
    if (static_cast<int>(memberships_.size()) != n_)
      throw std::invalid_argument("group labels do not match point count");
    if (k_ < 1) throw std::invalid_argument("k must be >= 1");
    if (t_ < 1) throw std::invalid_argument("t must be >= 1");
    ell_ = 0;
    disjoint_ = true;
    for (const auto& m : memberships_) {
      if (m.size() != 1) disjoint_ = false;
      for (GroupId g : m) {
        if (g < 0) throw std::invalid_argument("negative group id");
        ell_ = std::max(ell_, g + 1);
      }
    }
    if (disjoint_) {
      if (ell_ < 2) throw std::invalid_argument("disjoint instances need at least two groups");
    } else if (ell_ < 1) {
      throw std::invalid_argument("instance has no groups");
    }
    group_sizes_.assign(ell_, 0);
    group_members_.assign(ell_, {});
    for (PointId p = 0; p < n_; ++p)
      for (GroupId g : memberships_[p]) {
        ++group_sizes_[g];
        group_members_[g].push_back(p);
      }
    if (disjoint_)
      for (GroupId g = 0; g < ell_; ++g)
        if (group_sizes_[g] == 0) throw std::invalid_argument("empty group id in disjoint instance");
    if (candidate_centers.empty()) {
      candidate_centers_.resize(n_);
      for (int i = 0; i < n_; ++i) candidate_centers_[i] = i;
    } else {
      candidate_centers_ = std::move(candidate_centers);
      for (PointId c : candidate_centers_)
        if (c < 0 || c >= n_) throw std::invalid_argument("candidate center out of range");
    }
    check_metric();
  }

  int n_ = 0;
  int k_ = 0;
  int t_ = 0;
  int ell_ = 0;
  bool disjoint_ = true;
  std::vector<std::vector<GroupId>> memberships_;
  std::vector<double> dist_;  // dense n*n, empty above kDenseMatrixLimit
  std::vector<std::vector<double>> coords_;
  std::vector<PointId> candidate_centers_;
  std::vector<long long> group_sizes_;
  std::vector<std::vector<PointId>> group_members_;
};

/// Per-(center, group) composition of an assignment. Row order follows the
/// `centers` list; the center ids themselves are kept for reporting.
struct AssignmentCounts {
  std::vector<CenterId> centers;
  std::vector<std::vector<long long>> counts;  // [center index][group]

  static AssignmentCounts from_assignment(const Instance& inst,
                                          const std::vector<CenterId>& assignment,
                                          std::vector<CenterId> center_list) {
    AssignmentCounts out;
    out.centers = std::move(center_list);
    out.counts.assign(out.centers.size(), std::vector<long long>(inst.num_groups(), 0));
    std::vector<int> index(static_cast<std::size_t>(inst.n()), -1);
    for (std::size_t i = 0; i < out.centers.size(); ++i) index[out.centers[i]] = static_cast<int>(i);
    for (PointId p = 0; p < inst.n(); ++p) {
      CenterId c = assignment[p];
      if (c < 0) continue;  // partial assignments leave points at -1
      int row = index[c];
      if (row < 0) throw std::invalid_argument("assignment uses a center outside the center list");
      for (GroupId g : inst.groups_of(p)) ++out.counts[row][g];
    }
    return out;
  }
};

/// counts[c,a] <= t * counts[c,b] for every center c and ordered pair (a,b).
/// All-zero rows (empty clusters) pass.
inline bool is_fair(const AssignmentCounts& counts, long long t) {
  for (const auto& row : counts.counts) {
    long long mn = row.empty() ? 0 : row[0];
    long long mx = mn;
    for (long long v : row) {
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    if (mx > t * mn) return false;
  }
  return true;
}

struct PrecheckResult {
  bool ok = true;
  GroupId max_group = -1;  // witness pair when infeasible
  GroupId min_group = -1;
};

/// A t-balanced point set admits the single-cluster fair solution, so the
/// instance is feasible iff max_a |P_a| <= t * min_b |P_b|.
inline PrecheckResult feasibility_precheck(const Instance& inst) {
  if (!inst.disjoint()) throw std::invalid_argument("feasibility precheck requires disjoint groups");
  GroupId amax = 0, amin = 0;
  for (GroupId g = 1; g < inst.num_groups(); ++g) {
    if (inst.group_size(g) > inst.group_size(amax)) amax = g;
    if (inst.group_size(g) < inst.group_size(amin)) amin = g;
  }
  if (inst.group_size(amax) > static_cast<long long>(inst.t()) * inst.group_size(amin))
    return {false, amax, amin};
  return {};
}

/// Smallest integer t >= 1 making the whole point set t-balanced.
inline int min_feasible_t(const Instance& inst) {
  if (!inst.disjoint()) throw std::invalid_argument("min_feasible_t requires disjoint groups");
  long long mx = 0, mn = -1;
  for (GroupId g = 0; g < inst.num_groups(); ++g) {
    long long s = inst.group_size(g);
    if (s == 0) throw std::invalid_argument("min_feasible_t: empty group");
    mx = std::max(mx, s);
    mn = (mn < 0) ? s : std::min(mn, s);
  }
  long long t = (mx + mn - 1) / mn;
  return static_cast<int>(std::max<long long>(1, t));
}

inline double solution_cost(const Instance& inst, const std::vector<CenterId>& assignment) {
  if (static_cast<int>(assignment.size()) != inst.n())
    throw std::invalid_argument("assignment size does not match instance");
  double cost = 0.0;
  for (PointId p = 0; p < inst.n(); ++p) {
    if (assignment[p] < 0) throw std::invalid_argument("solution_cost: unassigned point");
    cost += inst.distance(p, assignment[p]);
  }
  return cost;
}

struct Solution {
  std::vector<CenterId> centers;
  std::vector<CenterId> assignment;  // total map point -> center
  double cost = 0.0;
};

/// Total or partial assignment together with its per-(center,group) ledger.
struct IntegralAssignment {
  std::vector<CenterId> assignment;  // -1 = unassigned
  AssignmentCounts counts;

  double cost(const Instance& inst) const {
    double c = 0.0;
    for (PointId p = 0; p < inst.n(); ++p)
      if (assignment[p] >= 0) c += inst.distance(p, assignment[p]);
    return c;
  }
};

}  // namespace pfkm

#endif  // PFKM_CORE_HPP
