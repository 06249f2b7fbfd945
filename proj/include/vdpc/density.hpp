#pragma once

#include "vdpc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace vdpc {

/// rho, delta and the nearest-higher-density neighbor of every point.
template <typename Scalar>
struct DensityProfile {
  Vector<Scalar> rho;
  Vector<Scalar> delta;
  std::vector<Index> nneigh;  // kNoIndex for the density argmax
  std::vector<Index> order;   // descending rho, ascending index on ties
  Scalar d_c = 0;

  Index size() const { return rho.size(); }
  Index argmax() const { return order.front(); }
};

template <typename Scalar>
struct DecisionPoint {
  Index index;
  Scalar rho;
  Scalar delta;
};

/// 1-based rank into the sorted distances used for d_c: round-half-away(pct/100 * M),
/// clamped to [1, M].
inline Index cutoff_rank(Index pair_count, double pct) {
  if (!(pct > 0.0)) throw ParameterError("pct must be > 0");
  if (pair_count < 1) throw ParameterError("need at least one pairwise distance");
  const auto k = static_cast<Index>(std::round(pct / 100.0 * static_cast<double>(pair_count)));
  return std::clamp<Index>(k, 1, pair_count);
}

template <typename Scalar>
Scalar cutoff_distance(std::span<const Scalar> sorted, double pct) {
  return sorted[cutoff_rank(static_cast<Index>(sorted.size()), pct) - 1];
}

template <typename Scalar>
Scalar cutoff_distance(const CondensedDistances<Scalar>& cd, double pct) {
  const auto& u = cd.sorted();
  return cutoff_distance(std::span<const Scalar>(u.data(), static_cast<std::size_t>(u.size())), pct);
}

/// Gaussian-kernel density: rho_i = sum_{j != i} exp(-(d_ij / d_c)^2), summed in ascending j.
template <DistanceSource D>
Vector<typename D::Scalar> local_density(const D& dist, typename D::Scalar d_c) {
  using Scalar = typename D::Scalar;
  if (!(d_c > Scalar(0))) throw ParameterError("cut-off distance must be > 0 (all points coincide?)");
  const Index n = dist.size();
  Vector<Scalar> rho(n);
  for (Index i = 0; i < n; ++i) {
    Scalar sum = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Scalar r = dist(i, j) / d_c;
      sum += std::exp(-r * r);
    }
    rho[i] = sum;
  }
  return rho;
}

/// Indices sorted by descending rho; equal rho keeps ascending index.
template <typename Scalar>
std::vector<Index> density_order(const Vector<Scalar>& rho) {
  std::vector<Index> order(static_cast<std::size_t>(rho.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return rho[a] > rho[b]; });
  return order;
}

/// Fills delta, nneigh and order of `profile` from its rho. The first point in the order
/// gets the largest pairwise distance and no neighbor; every other point takes the nearest
/// point ahead of it in the order (earliest wins ties).
template <DistanceSource D>
void delta_and_neighbors(const D& dist, DensityProfile<typename D::Scalar>& profile) {
  using Scalar = typename D::Scalar;
  const Index n = dist.size();
  profile.order = density_order(profile.rho);
  profile.delta.resize(n);
  profile.nneigh.assign(static_cast<std::size_t>(n), kNoIndex);

  Scalar max_dist = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) max_dist = std::max(max_dist, dist(i, j));

  profile.delta[profile.order[0]] = max_dist;
  for (std::size_t p = 1; p < profile.order.size(); ++p) {
    const Index i = profile.order[p];
    Index best = profile.order[0];
    Scalar best_d = dist(i, best);
    for (std::size_t q = 1; q < p; ++q) {
      const Index j = profile.order[q];
      const Scalar dij = dist(i, j);
      if (dij < best_d) {
        best_d = dij;
        best = j;
      }
    }
    profile.delta[i] = best_d;
    profile.nneigh[static_cast<std::size_t>(i)] = best;
  }
}

template <typename Scalar>
DensityProfile<Scalar> density_profile(const CondensedDistances<Scalar>& cd, double pct) {
  DensityProfile<Scalar> profile;
  profile.d_c = cutoff_distance(cd, pct);
  profile.rho = local_density(cd, profile.d_c);
  delta_and_neighbors(cd, profile);
  return profile;
}

template <typename Scalar>
std::vector<DecisionPoint<Scalar>> decision_graph(const DensityProfile<Scalar>& profile) {
  std::vector<DecisionPoint<Scalar>> graph;
  graph.reserve(static_cast<std::size_t>(profile.size()));
  for (Index i = 0; i < profile.size(); ++i) graph.push_back({i, profile.rho[i], profile.delta[i]});
  return graph;
}

}  // namespace vdpc
