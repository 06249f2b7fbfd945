#pragma once

#include "vdpc/baselines.hpp"

#include <span>
#include <vector>

namespace vdpc {

/// Counts n_ij of points in predicted cluster i and true class j, with marginals.
struct Contingency {
  Eigen::MatrixXd table;
  Eigen::VectorXd rows;  // per predicted cluster
  Eigen::VectorXd cols;  // per true class
  Index n = 0;

  static Contingency build(std::span<const int> pred, std::span<const int> truth);
};

/// Adjusted Rand index (Hubert-Arabie). 1 for identical partitions, 0 at chance level.
double ari(std::span<const int> pred, std::span<const int> truth);

/// Mutual information over the arithmetic mean of both entropies (natural log).
double nmi(std::span<const int> pred, std::span<const int> truth);

inline double ari(const ClusterLabels& pred, std::span<const int> truth) { return ari(pred.assign, truth); }
inline double nmi(const ClusterLabels& pred, std::span<const int> truth) { return nmi(pred.assign, truth); }

/// Copy of the labels with every noise point moved into one extra cluster, for scoring
/// intermediate (DBSCAN) output.
std::vector<int> noise_as_cluster(const ClusterLabels& labels);

}  // namespace vdpc
