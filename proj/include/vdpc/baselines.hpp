#pragma once

#include "vdpc/density.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace vdpc {

/// Per-point cluster ids 0..k-1; kNoise marks unassigned points in intermediate results.
struct ClusterLabels {
  std::vector<int> assign;
  int k = 0;

  Index size() const { return static_cast<Index>(assign.size()); }
  bool has_noise() const { return std::find(assign.begin(), assign.end(), kNoise) != assign.end(); }
  bool operator==(const ClusterLabels&) const = default;
};

/// Member lists of each cluster, in id order. Noise is left out.
inline Clusters clusters_of(const ClusterLabels& labels) {
  Clusters out(static_cast<std::size_t>(labels.k));
  for (std::size_t i = 0; i < labels.assign.size(); ++i)
    if (labels.assign[i] != kNoise) out[static_cast<std::size_t>(labels.assign[i])].push_back(static_cast<Index>(i));
  return out;
}

/// Labels n points from disjoint clusters; points not covered become noise.
inline ClusterLabels labels_from_clusters(Index n, const Clusters& clusters) {
  ClusterLabels labels{std::vector<int>(static_cast<std::size_t>(n), kNoise), static_cast<int>(clusters.size())};
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (Index i : clusters[c]) labels.assign[static_cast<std::size_t>(i)] = static_cast<int>(c);
  return labels;
}

/// Renumbers ids by first appearance (smallest member index) and drops empty ids.
inline ClusterLabels canonicalize(const ClusterLabels& labels) {
  std::vector<int> remap(static_cast<std::size_t>(std::max(labels.k, 0)), -1);
  ClusterLabels out{std::vector<int>(labels.assign.size(), kNoise), 0};
  for (std::size_t i = 0; i < labels.assign.size(); ++i) {
    const int c = labels.assign[i];
    if (c == kNoise) continue;
    auto& slot = remap[static_cast<std::size_t>(c)];
    if (slot < 0) slot = out.k++;
    out.assign[i] = slot;
  }
  return out;
}

struct DbscanParams {
  double eps = 0;
  Index minpts = 1;  // counts the point itself
};

template <typename Scalar>
std::vector<Index> dpc_select_centers(const DensityProfile<Scalar>& profile, Scalar rho_u, Scalar delta_u) {
  std::vector<Index> centers;
  for (Index i = 0; i < profile.size(); ++i)
    if (profile.rho[i] >= rho_u && profile.delta[i] >= delta_u) centers.push_back(i);
  if (centers.empty())
    throw ParameterError("no point has rho >= " + std::to_string(rho_u) + " and delta >= " + std::to_string(delta_u) +
                         "; lower the thresholds");
  return centers;
}

/// Each center seeds a cluster (ids follow ascending center index); everything else takes
/// the label of its nearest higher-density neighbor, visited in descending density.
template <typename Scalar>
ClusterLabels dpc_assign(const DensityProfile<Scalar>& profile, std::span<const Index> centers) {
  if (centers.empty()) throw ParameterError("dpc_assign needs at least one center");
  std::vector<Index> sorted(centers.begin(), centers.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  ClusterLabels labels{std::vector<int>(static_cast<std::size_t>(profile.size()), kNoise), 0};
  for (Index c : sorted) {
    if (c < 0 || c >= profile.size()) throw ParameterError("center index " + std::to_string(c) + " out of range");
    labels.assign[static_cast<std::size_t>(c)] = labels.k++;
  }
  if (labels.assign[static_cast<std::size_t>(profile.argmax())] == kNoise)
    throw ParameterError("centers must include the density argmax (point " + std::to_string(profile.argmax()) + ")");

  for (Index i : profile.order) {
    auto& li = labels.assign[static_cast<std::size_t>(i)];
    if (li == kNoise) li = labels.assign[static_cast<std::size_t>(profile.nneigh[static_cast<std::size_t>(i)])];
  }
  return labels;
}

/// Number of points j (self included) with dist(i, j) < eps.
template <DistanceSource D>
Index neighborhood_count(const D& dist, Index i, double eps) {
  Index count = 0;
  for (Index j = 0; j < dist.size(); ++j)
    if (dist(i, j) < eps) ++count;
  return count;
}

/// Classic DBSCAN with strict `dist < eps` neighborhoods. Clusters grow from core points in
/// ascending index order; a border point stays with the first cluster that reaches it.
template <DistanceSource D>
ClusterLabels dbscan(const D& dist, const DbscanParams& params) {
  if (!(params.eps > 0)) throw ParameterError("dbscan eps must be > 0");
  if (params.minpts < 1) throw ParameterError("dbscan minpts must be >= 1");
  const Index n = dist.size();

  std::vector<char> core(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) core[static_cast<std::size_t>(i)] = neighborhood_count(dist, i, params.eps) >= params.minpts;

  ClusterLabels labels{std::vector<int>(static_cast<std::size_t>(n), kNoise), 0};
  std::deque<Index> frontier;
  for (Index seed = 0; seed < n; ++seed) {
    if (!core[static_cast<std::size_t>(seed)] || labels.assign[static_cast<std::size_t>(seed)] != kNoise) continue;
    const int id = labels.k++;
    labels.assign[static_cast<std::size_t>(seed)] = id;
    frontier.push_back(seed);
    while (!frontier.empty()) {
      const Index q = frontier.front();
      frontier.pop_front();
      if (!core[static_cast<std::size_t>(q)]) continue;
      for (Index j = 0; j < n; ++j) {
        if (labels.assign[static_cast<std::size_t>(j)] != kNoise || !(dist(q, j) < params.eps)) continue;
        labels.assign[static_cast<std::size_t>(j)] = id;
        frontier.push_back(j);
      }
    }
  }
  return labels;
}

/// The k nearest points to each point, self excluded, ties by ascending index.
/// Row i of the result is sorted ascending by index.
template <DistanceSource D>
std::vector<std::vector<Index>> knn_sets(const D& dist, Index k) {
  using Scalar = typename D::Scalar;
  const Index n = dist.size();
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
  std::vector<std::pair<Scalar, Index>> row;
  for (Index i = 0; i < n; ++i) {
    row.clear();
    for (Index j = 0; j < n; ++j)
      if (j != i) row.emplace_back(dist(i, j), j);
    std::partial_sort(row.begin(), row.begin() + k, row.end());
    auto& nn = out[static_cast<std::size_t>(i)];
    nn.reserve(static_cast<std::size_t>(k));
    for (Index t = 0; t < k; ++t) nn.push_back(row[static_cast<std::size_t>(t)].second);
    std::sort(nn.begin(), nn.end());
  }
  return out;
}

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(Index n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), Index{0}); }

  Index find(Index x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      auto& p = parent_[static_cast<std::size_t>(x)];
      p = parent_[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }

  void unite(Index a, Index b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
  }

 private:
  std::vector<Index> parent_;
};

}  // namespace detail

/// Shared-nearest-neighbor clustering: i and j are linked when their knn sets share more
/// than one point; clusters are the connected components, unlinked points are singletons.
/// Ids follow the smallest member index.
template <DistanceSource D>
ClusterLabels snnc(const D& dist, Index k) {
  const Index n = dist.size();
  if (k < 1 || k > n - 1)
    throw ParameterError("snnc k must be in [1, " + std::to_string(n - 1) + "], got " + std::to_string(k));
  const auto knn = knn_sets(dist, k);

  // holders[p] = points whose knn set contains p
  std::vector<std::vector<Index>> holders(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    for (Index p : knn[static_cast<std::size_t>(i)]) holders[static_cast<std::size_t>(p)].push_back(i);

  detail::DisjointSets sets(n);
  std::vector<int> shared(static_cast<std::size_t>(n), 0);
  std::vector<Index> touched;
  for (Index i = 0; i < n; ++i) {
    touched.clear();
    for (Index p : knn[static_cast<std::size_t>(i)]) {
      for (Index j : holders[static_cast<std::size_t>(p)]) {
        if (j <= i) continue;
        if (shared[static_cast<std::size_t>(j)]++ == 0) touched.push_back(j);
      }
    }
    for (Index j : touched) {
      if (shared[static_cast<std::size_t>(j)] > 1) sets.unite(i, j);
      shared[static_cast<std::size_t>(j)] = 0;
    }
  }

  ClusterLabels labels{std::vector<int>(static_cast<std::size_t>(n), kNoise), 0};
  std::vector<int> root_id(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    auto& id = root_id[static_cast<std::size_t>(sets.find(i))];
    if (id < 0) id = labels.k++;
    labels.assign[static_cast<std::size_t>(i)] = id;
  }
  return labels;
}

}  // namespace vdpc
