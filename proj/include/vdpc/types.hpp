#pragma once

#include <Eigen/Dense>

#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vdpc {

using Index = Eigen::Index;

template <typename Scalar>
using PointMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Marks "no index" in neighbor arrays (the density argmax has no higher-density neighbor).
inline constexpr Index kNoIndex = -1;

/// Cluster id used for DBSCAN noise in intermediate labelings.
inline constexpr int kNoise = -1;

/// A cluster as an ascending list of point indices.
using Cluster = std::vector<Index>;
using Clusters = std::vector<Cluster>;

// Exceptions. The CLI maps them onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// An argument outside its valid domain (pct <= 0, d_c = 0, k out of range, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A failure inside the VDPC pipeline, tagged with the stage that raised it.
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Anything that hands out symmetric pairwise distances over points 0..size()-1.
template <typename D>
concept DistanceSource = requires(const D& d, Index i, Index j) {
  typename D::Scalar;
  { d.size() } -> std::convertible_to<Index>;
  { d(i, j) } -> std::convertible_to<typename D::Scalar>;
};

}  // namespace vdpc
