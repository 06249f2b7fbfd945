#pragma once

#include "vdpc/dataset.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace testing {

using vdpc::Index;

// mt19937_64 is fully specified by the standard; the distributions are not, so they are
// done by hand here to keep generated data identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Index index(Index n) { return static_cast<Index>(gen_() % static_cast<std::uint64_t>(n)); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

struct Blob {
  double cx, cy, sd;
  Index count;
};

inline vdpc::Dataset<double> make_blobs(const std::vector<Blob>& blobs, std::uint64_t seed) {
  Rng rng(seed);
  Index n = 0;
  for (const auto& b : blobs) n += b.count;
  vdpc::Dataset<double> ds;
  ds.points.resize(n, 2);
  ds.ground_truth.emplace();
  Index row = 0;
  for (std::size_t c = 0; c < blobs.size(); ++c) {
    for (Index t = 0; t < blobs[c].count; ++t, ++row) {
      ds.points(row, 0) = blobs[c].cx + blobs[c].sd * rng.normal();
      ds.points(row, 1) = blobs[c].cy + blobs[c].sd * rng.normal();
      ds.ground_truth->push_back(static_cast<int>(c));
    }
  }
  return ds;
}

/// Random small point set: N in [lo, hi], D in [1, 3], a few clumps so that clustering is not
/// trivial. Coordinates are continuous so ties are improbable.
inline vdpc::Dataset<double> random_points(Rng& rng, Index lo, Index hi) {
  const Index n = lo + rng.index(hi - lo + 1);
  const Index d = 1 + rng.index(3);
  const Index clumps = 1 + rng.index(4);
  std::vector<std::vector<double>> centers(static_cast<std::size_t>(clumps), std::vector<double>(static_cast<std::size_t>(d)));
  for (auto& c : centers)
    for (auto& x : c) x = rng.uniform(-5, 5);
  vdpc::Dataset<double> ds;
  ds.points.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& c = centers[static_cast<std::size_t>(rng.index(clumps))];
    const double sd = rng.uniform(0.2, 1.5);
    for (Index k = 0; k < d; ++k) ds.points(i, k) = c[static_cast<std::size_t>(k)] + sd * rng.normal();
  }
  return ds;
}

inline vdpc::Dataset<double> points_1d(std::initializer_list<double> xs) {
  vdpc::Dataset<double> ds;
  ds.points.resize(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) ds.points(i++, 0) = x;
  return ds;
}

inline vdpc::Dataset<double> points_2d(std::initializer_list<std::pair<double, double>> ps) {
  vdpc::Dataset<double> ds;
  ds.points.resize(static_cast<Index>(ps.size()), 2);
  Index i = 0;
  for (const auto& [x, y] : ps) {
    ds.points(i, 0) = x;
    ds.points(i, 1) = y;
    ++i;
  }
  return ds;
}

/// True when two labelings induce the same partition (noise must match exactly).
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] == -1) != (b[i] == -1)) return false;
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (a[i] == -1 || a[j] == -1) continue;
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

}  // namespace testing
