#pragma once

#include "vdpc/types.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vdpc {

/// N points of dimension D, one per row, plus optional ground-truth classes.
template <typename Scalar>
struct Dataset {
  PointMatrix<Scalar> points;
  std::optional<std::vector<int>> ground_truth;
  std::string name;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }

  /// Throws DataError if N < 2, a coordinate is non-finite, or the label count is off.
  void validate() const {
    if (points.rows() < 2) throw DataError("dataset needs at least 2 points, got " + std::to_string(points.rows()));
    if (points.cols() < 1) throw DataError("dataset points have no coordinates");
    if (!points.allFinite()) throw DataError("dataset contains non-finite coordinates");
    if (ground_truth && static_cast<Index>(ground_truth->size()) != points.rows())
      throw DataError("ground truth has " + std::to_string(ground_truth->size()) + " labels for " +
                      std::to_string(points.rows()) + " points");
  }
};

/// Position of the pair (i, j), i < j, in the row-major upper triangle of an n x n matrix.
inline constexpr Index condensed_index(Index n, Index i, Index j) noexcept {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

inline constexpr Index condensed_size(Index n) noexcept { return n * (n - 1) / 2; }

/// Pairwise distances stored as the strict upper triangle, plus an ascending copy.
template <typename ScalarT>
class CondensedDistances {
 public:
  using Scalar = ScalarT;

  CondensedDistances() = default;

  /// Takes ownership of `d` (row-major upper triangle). Throws DataError on a bad length
  /// or on negative / non-finite entries.
  CondensedDistances(Index n, Vector<Scalar> d) : n_(n), d_(std::move(d)) {
    if (n < 2) throw DataError("distance matrix needs n >= 2, got " + std::to_string(n));
    if (d_.size() != condensed_size(n))
      throw DataError("expected " + std::to_string(condensed_size(n)) + " distances for n=" + std::to_string(n) +
                      ", got " + std::to_string(d_.size()));
    for (Index t = 0; t < d_.size(); ++t) {
      if (!std::isfinite(d_[t])) throw DataError("distance entry " + std::to_string(t) + " is not finite");
      if (d_[t] < Scalar(0)) throw DataError("distance entry " + std::to_string(t) + " is negative");
    }
    u_ = d_;
    std::sort(u_.begin(), u_.end());
  }

  Index size() const noexcept { return n_; }
  Index pair_count() const noexcept { return d_.size(); }

  Scalar operator()(Index i, Index j) const noexcept {
    if (i == j) return Scalar(0);
    return i < j ? d_[condensed_index(n_, i, j)] : d_[condensed_index(n_, j, i)];
  }

  const Vector<Scalar>& condensed() const noexcept { return d_; }
  const Vector<Scalar>& sorted() const noexcept { return u_; }
  Scalar max_distance() const noexcept { return u_[u_.size() - 1]; }

 private:
  Index n_ = 0;
  Vector<Scalar> d_;
  Vector<Scalar> u_;
};

/// Distances restricted to `members`; local index a maps to parent point members[a].
template <DistanceSource Source>
class SubsetDistances {
 public:
  using Scalar = typename Source::Scalar;

  SubsetDistances(const Source& parent, std::span<const Index> members) : parent_(&parent), members_(members) {}

  Index size() const noexcept { return static_cast<Index>(members_.size()); }
  Scalar operator()(Index a, Index b) const { return (*parent_)(members_[a], members_[b]); }
  Index global(Index a) const noexcept { return members_[a]; }

 private:
  const Source* parent_;
  std::span<const Index> members_;
};

/// Euclidean distances between all rows of `ds.points`, row-major upper triangle.
template <typename Scalar>
CondensedDistances<Scalar> pairwise_distances(const Dataset<Scalar>& ds) {
  ds.validate();
  const Index n = ds.size();
  Vector<Scalar> d(condensed_size(n));
  Index t = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) d[t++] = (ds.points.row(i) - ds.points.row(j)).norm();
  return CondensedDistances<Scalar>(n, std::move(d));
}

struct CsvOptions {
  bool has_header = false;
  std::optional<Index> label_column;  // 0-based; negative counts from the end (-1 = last)
};

/// Reads one point per line. Cells are split on commas when the line has one,
/// otherwise on whitespace. Throws DataError naming the offending line.
Dataset<double> load_points_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

/// Reads exactly n(n-1)/2 comma- or whitespace-separated distances (row-major upper triangle).
CondensedDistances<double> load_condensed_matrix(const std::filesystem::path& path, Index n);

/// Same, with n inferred from the entry count.
CondensedDistances<double> load_condensed_matrix(const std::filesystem::path& path);

}  // namespace vdpc
