#pragma once

#include "vdpc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vdpc {

/// How a neighbor count or sim-vector rank is derived from a population size.
enum class SizeRule { Sqrt, Ln };

/// Clustering algorithm applied inside a density level.
enum class LevelAlgorithm { Snnc, Dbscan };

/// How non-representative points are mapped onto density levels.
enum class LevelAssignment { Midpoint, Inherit };

/// Variant switches. The defaults are the standard pipeline.
struct VdpcOptions {
  SizeRule k_rule = SizeRule::Sqrt;
  SizeRule eps_rule = SizeRule::Sqrt;
  LevelAlgorithm low_algorithm = LevelAlgorithm::Snnc;
  LevelAlgorithm high_algorithm = LevelAlgorithm::Dbscan;
  LevelAssignment level_assignment = LevelAssignment::Midpoint;
};

template <typename Scalar>
struct VdpcParams {
  double pct = 2;
  Scalar delta_t = 1;
  int num = 10;

  void validate() const {
    if (!(pct > 0)) throw ParameterError("pct must be > 0");
    if (!(delta_t > Scalar(0))) throw ParameterError("delta_t must be > 0");
    if (num < 1) throw ParameterError("num must be >= 1");
  }
};

/// ceil(sqrt(n)) or ceil(ln(n)), never below 1.
inline Index size_rule_value(SizeRule rule, Index n) {
  const double x = static_cast<double>(n);
  const double v = rule == SizeRule::Sqrt ? std::ceil(std::sqrt(x)) : std::ceil(std::log(x));
  return std::max<Index>(1, static_cast<Index>(v));
}

template <typename Scalar>
struct DensityInterval {
  Scalar lo;
  Scalar hi;
  bool contains(Scalar x) const { return lo <= x && x <= hi; }
};

template <typename Scalar>
struct DensityLevels {
  Scalar w = 0;
  std::vector<DensityInterval<Scalar>> gaps;
  std::vector<DensityInterval<Scalar>> intervals;  // ascending; intervals[p-1] is level p
  std::vector<int> rep_level;                      // 1-based, parallel to the input densities

  int numl() const { return static_cast<int>(intervals.size()); }
};

/// Splits representative densities into levels: w = (max - min) / num, and a gap sits between
/// sorted neighbors whose difference is at least 2w.
template <typename Scalar>
DensityLevels<Scalar> compute_levels(std::span<const Scalar> rep_rhos, int num) {
  if (rep_rhos.empty()) throw ParameterError("compute_levels needs at least one representative");
  if (num < 1) throw ParameterError("num must be >= 1");
  std::vector<Scalar> sorted(rep_rhos.begin(), rep_rhos.end());
  std::sort(sorted.begin(), sorted.end());

  DensityLevels<Scalar> levels;
  levels.w = (sorted.back() - sorted.front()) / static_cast<Scalar>(num);
  Scalar run_lo = sorted.front();
  if (levels.w > Scalar(0)) {
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const Scalar diff = sorted[i + 1] - sorted[i];
      if (diff > Scalar(0) && diff >= 2 * levels.w) {
        levels.gaps.push_back({sorted[i], sorted[i + 1]});
        levels.intervals.push_back({run_lo, sorted[i]});
        run_lo = sorted[i + 1];
      }
    }
  }
  levels.intervals.push_back({run_lo, sorted.back()});

  levels.rep_level.reserve(rep_rhos.size());
  for (Scalar r : rep_rhos) {
    int p = 1;
    while (p < levels.numl() && r >= levels.intervals[static_cast<std::size_t>(p)].lo) ++p;
    levels.rep_level.push_back(p);
  }
  return levels;
}

/// Level of an arbitrary density under the midpoint rule: inside an interval gives that
/// level, inside a gap gives the side of the gap midpoint, beyond the ends clamps.
template <typename Scalar>
int midpoint_level(const DensityLevels<Scalar>& levels, Scalar rho) {
  int p = 1;
  for (const auto& gap : levels.gaps) {
    if (rho >= gap.hi || (rho > gap.lo && rho >= (gap.lo + gap.hi) / 2)) {
      ++p;
    } else {
      break;
    }
  }
  return p;
}

/// Level membership of every point. levels[p-1] lists the points of level p, ascending.
struct LevelPartition {
  std::vector<int> point_level;
  std::vector<std::vector<Index>> levels;

  const std::vector<Index>& low_points() const { return levels.front(); }
};

inline LevelPartition make_partition(std::vector<int> point_level, int numl) {
  LevelPartition part{std::move(point_level), std::vector<std::vector<Index>>(static_cast<std::size_t>(numl))};
  for (std::size_t i = 0; i < part.point_level.size(); ++i)
    part.levels[static_cast<std::size_t>(part.point_level[i] - 1)].push_back(static_cast<Index>(i));
  return part;
}

template <typename Scalar>
LevelPartition partition_points(const Vector<Scalar>& rho, const DensityLevels<Scalar>& levels) {
  std::vector<int> point_level(static_cast<std::size_t>(rho.size()));
  for (Index i = 0; i < rho.size(); ++i) point_level[static_cast<std::size_t>(i)] = midpoint_level(levels, rho[i]);
  return make_partition(std::move(point_level), levels.numl());
}

/// Alternative mapping: every point takes the level of the representative whose initial
/// cluster it belongs to.
template <typename Scalar>
LevelPartition partition_points_inherit(const ClusterLabels& initial, std::span<const Index> reps,
                                        const DensityLevels<Scalar>& levels) {
  std::vector<int> cluster_level(static_cast<std::size_t>(initial.k), 1);
  for (std::size_t r = 0; r < reps.size(); ++r)
    cluster_level[static_cast<std::size_t>(initial.assign[static_cast<std::size_t>(reps[r])])] = levels.rep_level[r];
  std::vector<int> point_level(initial.assign.size());
  for (std::size_t i = 0; i < point_level.size(); ++i)
    point_level[i] = cluster_level[static_cast<std::size_t>(initial.assign[i])];
  return make_partition(std::move(point_level), levels.numl());
}

template <typename Scalar>
std::vector<Index> select_representatives(const DensityProfile<Scalar>& profile, Scalar delta_t) {
  if (!(delta_t > Scalar(0))) throw ParameterError("delta_t must be > 0");
  std::vector<Index> reps;
  for (Index i = 0; i < profile.size(); ++i)
    if (profile.delta[i] >= delta_t) reps.push_back(i);
  if (reps.empty())
    throw ParameterError("no point has delta >= " + std::to_string(delta_t) + "; use a smaller delta_t");
  return reps;
}

template <typename Scalar>
ClusterLabels initial_clusters(const DensityProfile<Scalar>& profile, std::span<const Index> reps) {
  return dpc_assign(profile, reps);
}

/// Groups the points of `members` into clusters with a clustering run on the subset.
/// Cluster member lists hold global indices.
inline Clusters lift_clusters(const ClusterLabels& local, std::span<const Index> members, Cluster* noise = nullptr) {
  Clusters out(static_cast<std::size_t>(local.k));
  for (std::size_t a = 0; a < local.assign.size(); ++a) {
    const int c = local.assign[a];
    if (c == kNoise) {
      if (noise) noise->push_back(members[a]);
    } else {
      out[static_cast<std::size_t>(c)].push_back(members[a]);
    }
  }
  return out;
}

/// SNNC on a subset with k set from the subset size (clamped to [1, n-1]).
template <DistanceSource D>
Clusters asnnc(std::span<const Index> members, const D& dist, SizeRule rule = SizeRule::Sqrt) {
  const Index nl = static_cast<Index>(members.size());
  if (nl == 0) return {};
  if (nl == 1) return {Cluster{members[0]}};
  const Index k = std::clamp<Index>(size_rule_value(rule, nl), 1, nl - 1);
  const SubsetDistances<D> sub(dist, members);
  return lift_clusters(snnc(sub, k), members);
}

struct BoundarySplit {
  Clusters c_low;
  std::vector<Index> boundary;  // ascending
};

/// Clusters smaller than the mean cluster size are boundary points; the rest are final.
inline BoundarySplit split_boundary(const Clusters& clusters) {
  BoundarySplit out;
  if (clusters.empty()) return out;
  std::size_t total = 0;
  for (const auto& c : clusters) total += c.size();
  const std::size_t n = clusters.size();
  for (const auto& c : clusters) {
    if (c.size() * n < total) {
      out.boundary.insert(out.boundary.end(), c.begin(), c.end());
    } else {
      out.c_low.push_back(c);
    }
  }
  std::sort(out.boundary.begin(), out.boundary.end());
  return out;
}

/// Moves each boundary point into the initial cluster (and level) of its nearest
/// representative above level 1. Returns false, leaving everything untouched, when no
/// such representative exists.
template <DistanceSource D>
bool reassign_boundary(std::span<const Index> boundary, std::span<const Index> reps, std::span<const int> rep_level,
                       const D& dist, ClusterLabels& membership, std::vector<int>& point_level) {
  std::vector<std::size_t> high;
  for (std::size_t r = 0; r < reps.size(); ++r)
    if (rep_level[r] >= 2) high.push_back(r);
  if (high.empty()) return false;
  for (Index b : boundary) {
    std::size_t best = high.front();
    auto best_d = dist(b, reps[best]);
    for (std::size_t t = 1; t < high.size(); ++t) {
      const auto d = dist(b, reps[high[t]]);
      if (d < best_d || (d == best_d && reps[high[t]] < reps[best])) {
        best_d = d;
        best = high[t];
      }
    }
    membership.assign[static_cast<std::size_t>(b)] = membership.assign[static_cast<std::size_t>(reps[best])];
    point_level[static_cast<std::size_t>(b)] = rep_level[best];
  }
  return true;
}

/// Parameters derived for one level's DBSCAN run.
template <typename Scalar>
struct ADbscanDerivation {
  Index x_low = kNoIndex;
  Index x_far = kNoIndex;
  Index x_high = kNoIndex;
  Index c_low_size = 0;
  Index sim_rank = 0;  // 1-based position in the sorted distances from x_far
  Scalar eps = 0;
  Index minpts_low = 0;
  Index minpts_high = 0;
  Index minpts = 0;

  DbscanParams params() const { return {static_cast<double>(eps), minpts}; }
};

/// ceil((a + b) / 2) for non-negative counts.
inline Index balanced_minpts(Index low, Index high) { return (low + high + 1) / 2; }

/// Eps from the rank-ceil(rule(|C_low|)) distance between x_far (farthest member of the
/// lowest-density representative's cluster) and the rest of the level; MinPts as the rounded-up
/// mean of the eps-neighborhood sizes around x_far and around the densest representative.
template <DistanceSource D>
ADbscanDerivation<typename D::Scalar> derive_adbscan_params(std::span<const Index> level_points,
                                                            std::span<const Index> reps_in_level,
                                                            const ClusterLabels& membership,
                                                            const Vector<typename D::Scalar>& rho, const D& dist,
                                                            SizeRule eps_rule = SizeRule::Sqrt) {
  using Scalar = typename D::Scalar;
  if (reps_in_level.empty()) throw ParameterError("level has no representative");
  if (level_points.size() < 2) throw ParameterError("level needs at least 2 points");

  ADbscanDerivation<Scalar> out;
  out.x_low = reps_in_level.front();
  out.x_high = reps_in_level.front();
  for (Index r : reps_in_level) {
    if (rho[r] < rho[out.x_low] || (rho[r] == rho[out.x_low] && r < out.x_low)) out.x_low = r;
    if (rho[r] > rho[out.x_high] || (rho[r] == rho[out.x_high] && r < out.x_high)) out.x_high = r;
  }

  auto members_of = [&](Index rep) {
    const int id = membership.assign[static_cast<std::size_t>(rep)];
    std::vector<Index> m;
    for (Index i : level_points)
      if (membership.assign[static_cast<std::size_t>(i)] == id) m.push_back(i);
    return m;
  };
  const auto c_low = members_of(out.x_low);
  const auto c_high = members_of(out.x_high);
  out.c_low_size = static_cast<Index>(c_low.size());

  out.x_far = out.x_low;
  Scalar far_d = 0;
  for (Index i : c_low) {
    const Scalar d = dist(i, out.x_low);
    if (d > far_d) {
      far_d = d;
      out.x_far = i;
    }
  }

  std::vector<Scalar> sim;
  sim.reserve(level_points.size());
  for (Index i : level_points)
    if (i != out.x_far) sim.push_back(dist(out.x_far, i));
  std::sort(sim.begin(), sim.end());
  out.sim_rank = std::clamp<Index>(size_rule_value(eps_rule, out.c_low_size), 1, static_cast<Index>(sim.size()));
  out.eps = sim[static_cast<std::size_t>(out.sim_rank - 1)];
  if (!(out.eps > Scalar(0))) throw ParameterError("derived eps is 0 (coincident points around x_far)");

  for (Index j : c_high)
    if (dist(out.x_high, j) < out.eps) ++out.minpts_high;
  for (Index j : c_low)
    if (dist(out.x_far, j) < out.eps) ++out.minpts_low;
  out.minpts = std::max<Index>(1, balanced_minpts(out.minpts_low, out.minpts_high));
  return out;
}

struct LevelClustering {
  Clusters clusters;
  Cluster noise;
};

template <DistanceSource D>
LevelClustering adbscan_level(std::span<const Index> level_points, const ADbscanDerivation<typename D::Scalar>& derivation,
                              const D& dist) {
  const SubsetDistances<D> sub(dist, level_points);
  LevelClustering out;
  out.clusters = lift_clusters(dbscan(sub, derivation.params()), level_points, &out.noise);
  return out;
}

struct MicroClusterResult {
  Clusters clusters;
  std::vector<Index> centers;  // per input cluster: its highest-density member
  std::vector<char> micro;     // per input cluster
  bool merged = false;
};

/// A cluster whose center (max-rho member) is below the mean center density is a
/// micro-cluster. When micro-clusters are fewer than half, their points move to the nearest
/// non-micro center and they dissolve; otherwise every cluster stands.
template <DistanceSource D>
MicroClusterResult microcluster_postprocess(const Clusters& ncd, const Vector<typename D::Scalar>& rho, const D& dist) {
  using Scalar = typename D::Scalar;
  MicroClusterResult out;
  out.clusters = ncd;
  if (ncd.empty()) return out;

  Scalar sum = 0;
  for (const auto& c : ncd) {
    Index center = c.front();
    for (Index i : c)
      if (rho[i] > rho[center] || (rho[i] == rho[center] && i < center)) center = i;
    out.centers.push_back(center);
    sum += rho[center];
  }
  const Scalar mean = sum / static_cast<Scalar>(ncd.size());
  std::size_t n_micro = 0;
  for (Index center : out.centers) {
    out.micro.push_back(rho[center] < mean);
    n_micro += out.micro.back();
  }
  if (n_micro == 0 || 2 * n_micro >= ncd.size()) return out;

  out.merged = true;
  Clusters kept;
  std::vector<Index> kept_centers;
  for (std::size_t c = 0; c < ncd.size(); ++c) {
    if (!out.micro[c]) {
      kept.push_back(ncd[c]);
      kept_centers.push_back(out.centers[c]);
    }
  }
  for (std::size_t c = 0; c < ncd.size(); ++c) {
    if (!out.micro[c]) continue;
    for (Index i : ncd[c]) {
      std::size_t best = 0;
      Scalar best_d = dist(i, kept_centers[0]);
      for (std::size_t t = 1; t < kept_centers.size(); ++t) {
        const Scalar d = dist(i, kept_centers[t]);
        if (d < best_d || (d == best_d && kept_centers[t] < kept_centers[best])) {
          best_d = d;
          best = t;
        }
      }
      kept[best].push_back(i);
    }
  }
  for (auto& c : kept) std::sort(c.begin(), c.end());
  out.clusters = std::move(kept);
  return out;
}

/// Labels noise points in descending density. Each takes the label of its nearest labeled
/// point that precedes it in the density order; if none does, of its nearest labeled point.
template <DistanceSource D>
ClusterLabels assign_noise(ClusterLabels labels, const DensityProfile<typename D::Scalar>& profile, const D& dist) {
  using Scalar = typename D::Scalar;
  const auto& order = profile.order;
  bool any_labeled = false;
  for (int c : labels.assign) any_labeled |= c != kNoise;
  if (!any_labeled) throw ParameterError("assign_noise needs at least one labeled point");

  auto label_of = [&](Index i) -> int& { return labels.assign[static_cast<std::size_t>(i)]; };
  for (std::size_t p = 0; p < order.size(); ++p) {
    const Index i = order[p];
    if (label_of(i) != kNoise) continue;
    Index best = kNoIndex;
    Scalar best_d = 0;
    auto consider = [&](Index j) {
      if (j == i || label_of(j) == kNoise) return;
      const Scalar d = dist(i, j);
      if (best == kNoIndex || d < best_d || (d == best_d && j < best)) {
        best = j;
        best_d = d;
      }
    };
    for (std::size_t q = 0; q < p; ++q) consider(order[q]);
    if (best == kNoIndex)
      for (Index j = 0; j < dist.size(); ++j) consider(j);
    label_of(i) = label_of(best);
  }
  return labels;
}

/// Mean density of the representatives in each level, index p-1 for level p.
template <typename Scalar>
std::vector<Scalar> representative_level_means(const DensityProfile<Scalar>& profile, std::span<const Index> reps,
                                               const DensityLevels<Scalar>& levels) {
  std::vector<Scalar> sum(static_cast<std::size_t>(levels.numl()), Scalar(0));
  std::vector<Index> count(sum.size(), 0);
  for (std::size_t r = 0; r < reps.size(); ++r) {
    const auto p = static_cast<std::size_t>(levels.rep_level[r] - 1);
    sum[p] += profile.rho[reps[r]];
    ++count[p];
  }
  for (std::size_t p = 0; p < sum.size(); ++p) sum[p] /= static_cast<Scalar>(std::max<Index>(count[p], 1));
  return sum;
}

/// Everything the pipeline computed along the way, for tracing and tests.
template <typename Scalar>
struct VdpcResult {
  ClusterLabels labels;
  DensityProfile<Scalar> profile;
  std::vector<Index> representatives;
  ClusterLabels initial;
  DensityLevels<Scalar> levels;

  // Filled only when numl >= 2.
  LevelPartition partition;           // before boundary reassignment
  Clusters low_clusters;              // l_1 clustering
  Cluster low_noise;                  // l_1 noise (DBSCAN on l_1 only)
  BoundarySplit split;
  bool boundary_fallback = false;
  ClusterLabels membership;           // initial clusters after boundary reassignment
  std::vector<int> point_level;       // after boundary reassignment
  std::vector<std::optional<ADbscanDerivation<Scalar>>> derivations;  // index p-2 for level p
  std::vector<LevelClustering> level_raw;                             // index p-2 for level p
  std::vector<MicroClusterResult> level_final;                        // index p-2 for level p
  Cluster noise;                      // pooled across levels
};

namespace detail {

template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const PipelineError&) {
    throw;
  } catch (const Error& e) {
    throw PipelineError(stage, e.what());
  }
}

template <typename Scalar>
LevelClustering cluster_level(LevelAlgorithm algorithm, std::span<const Index> points, std::span<const Index> reps,
                              const ClusterLabels& membership, const CondensedDistances<Scalar>& cd,
                              const DensityProfile<Scalar>& profile, const VdpcOptions& options,
                              std::optional<ADbscanDerivation<Scalar>>* derivation) {
  if (points.empty()) return {};
  if (points.size() == 1) return {Clusters{Cluster{points[0]}}, {}};
  if (algorithm == LevelAlgorithm::Snnc) return {asnnc(points, cd, options.k_rule), {}};
  const auto d = derive_adbscan_params(points, reps, membership, profile.rho, cd, options.eps_rule);
  if (derivation) *derivation = d;
  return adbscan_level(points, d, cd);
}

}  // namespace detail

/// The full pipeline: density profile, representatives, density levels, then either DPC
/// assignment (one level) or level-wise clustering with boundary handling, micro-cluster
/// merging and noise assignment. Final ids are 0..k-1 ordered by smallest member.
template <typename Scalar>
VdpcResult<Scalar> vdpc_run(const CondensedDistances<Scalar>& cd, const VdpcParams<Scalar>& params,
                            const VdpcOptions& options = {}) {
  detail::run_stage("parameters", [&] {
    params.validate();
    return 0;
  });
  VdpcResult<Scalar> res;
  const Index n = cd.size();

  res.profile = detail::run_stage("density", [&] { return density_profile(cd, params.pct); });
  res.representatives =
      detail::run_stage("representatives", [&] { return select_representatives(res.profile, params.delta_t); });
  res.initial = detail::run_stage("initial clusters", [&] { return initial_clusters(res.profile, res.representatives); });
  res.levels = detail::run_stage("density levels", [&] {
    std::vector<Scalar> rep_rhos;
    for (Index r : res.representatives) rep_rhos.push_back(res.profile.rho[r]);
    return compute_levels(std::span<const Scalar>(rep_rhos), params.num);
  });

  if (res.levels.numl() == 1) {
    res.labels = res.initial;
    return res;
  }

  const int numl = res.levels.numl();
  res.partition = options.level_assignment == LevelAssignment::Midpoint
                      ? partition_points(res.profile.rho, res.levels)
                      : partition_points_inherit(res.initial, res.representatives, res.levels);

  auto reps_at = [&](int p) {
    std::vector<Index> out;
    for (std::size_t r = 0; r < res.representatives.size(); ++r)
      if (res.levels.rep_level[r] == p) out.push_back(res.representatives[r]);
    return out;
  };

  // Lowest level.
  {
    const auto& low = res.partition.low_points();
    const auto low_reps = reps_at(1);
    std::optional<ADbscanDerivation<Scalar>> ignored;
    auto lc = detail::run_stage("level 1 clustering", [&] {
      return detail::cluster_level(options.low_algorithm, low, low_reps, res.initial, cd, res.profile, options, &ignored);
    });
    res.low_clusters = std::move(lc.clusters);
    res.low_noise = std::move(lc.noise);
  }
  res.split = split_boundary(res.low_clusters);

  res.membership = res.initial;
  res.point_level = res.partition.point_level;
  res.boundary_fallback = !reassign_boundary(std::span<const Index>(res.split.boundary), res.representatives,
                                             std::span<const int>(res.levels.rep_level), cd, res.membership,
                                             res.point_level);
  if (res.boundary_fallback) {
    // Nowhere to send them: they stay in level 1 as their own clusters.
    for (Index b : res.split.boundary) res.split.c_low.push_back(Cluster{b});
    res.split.boundary.clear();
  }

  Clusters final_clusters = res.split.c_low;
  res.noise = res.low_noise;
  for (int p = 2; p <= numl; ++p) {
    std::vector<Index> points;
    for (Index i = 0; i < n; ++i)
      if (res.point_level[static_cast<std::size_t>(i)] == p) points.push_back(i);
    const auto reps = reps_at(p);
    auto& derivation = res.derivations.emplace_back();
    const std::string stage = "level " + std::to_string(p) + " clustering";
    auto lc = detail::run_stage(stage.c_str(), [&] {
      return detail::cluster_level(options.high_algorithm, points, reps, res.membership, cd, res.profile, options,
                                   &derivation);
    });
    auto mc = microcluster_postprocess(lc.clusters, res.profile.rho, cd);
    final_clusters.insert(final_clusters.end(), mc.clusters.begin(), mc.clusters.end());
    res.noise.insert(res.noise.end(), lc.noise.begin(), lc.noise.end());
    res.level_raw.push_back(std::move(lc));
    res.level_final.push_back(std::move(mc));
  }
  std::sort(res.noise.begin(), res.noise.end());

  const auto pooled = labels_from_clusters(n, final_clusters);
  res.labels = detail::run_stage("noise assignment", [&] { return canonicalize(assign_noise(pooled, res.profile, cd)); });
  return res;
}

}  // namespace vdpc
