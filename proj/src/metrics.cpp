#include "vdpc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace vdpc {
namespace {

std::vector<int> dense_ids(std::span<const int> labels, int& count) {
  std::map<int, int> ids;
  for (int l : labels) ids.emplace(l, 0);
  count = 0;
  for (auto& [label, id] : ids) id = count++;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(ids[l]);
  return out;
}

void check_inputs(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size())
    throw ParameterError("label length mismatch: " + std::to_string(pred.size()) + " vs " + std::to_string(truth.size()));
  if (std::find(pred.begin(), pred.end(), kNoise) != pred.end())
    throw ParameterError("predicted labels contain noise; score noise_as_cluster() instead");
}

double choose2(double x) { return x * (x - 1) / 2; }

double entropy(const Eigen::VectorXd& counts, double n) {
  double h = 0;
  for (Index i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) h -= counts[i] / n * std::log(counts[i] / n);
  return h;
}

}  // namespace

Contingency Contingency::build(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size())
    throw ParameterError("label length mismatch: " + std::to_string(pred.size()) + " vs " + std::to_string(truth.size()));
  int kp = 0;
  int kt = 0;
  const auto p = dense_ids(pred, kp);
  const auto t = dense_ids(truth, kt);
  Contingency c;
  c.n = static_cast<Index>(pred.size());
  c.table = Eigen::MatrixXd::Zero(kp, kt);
  for (std::size_t i = 0; i < p.size(); ++i) c.table(p[i], t[i]) += 1;
  c.rows = c.table.rowwise().sum();
  c.cols = c.table.colwise().sum().transpose();
  return c;
}

double ari(std::span<const int> pred, std::span<const int> truth) {
  check_inputs(pred, truth);
  const auto c = Contingency::build(pred, truth);
  const double pairs = choose2(static_cast<double>(c.n));
  const double index = c.table.unaryExpr(&choose2).sum();
  const double a = c.rows.unaryExpr(&choose2).sum();
  const double b = c.cols.unaryExpr(&choose2).sum();
  const double expected = pairs > 0 ? a * b / pairs : 0.0;
  const double max_index = (a + b) / 2;
  // Equality only happens for two all-in-one or two all-singleton partitions.
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

double nmi(std::span<const int> pred, std::span<const int> truth) {
  check_inputs(pred, truth);
  const auto c = Contingency::build(pred, truth);
  const double n = static_cast<double>(c.n);
  const double hp = entropy(c.rows, n);
  const double ht = entropy(c.cols, n);
  if (hp == 0 && ht == 0) return 1.0;
  if (hp == 0 || ht == 0) return 0.0;
  double mi = 0;
  for (Index i = 0; i < c.table.rows(); ++i)
    for (Index j = 0; j < c.table.cols(); ++j) {
      const double nij = c.table(i, j);
      if (nij > 0) mi += nij / n * std::log(n * nij / (c.rows[i] * c.cols[j]));
    }
  return std::clamp(mi / ((hp + ht) / 2), 0.0, 1.0);
}

std::vector<int> noise_as_cluster(const ClusterLabels& labels) {
  std::vector<int> out = labels.assign;
  for (int& l : out)
    if (l == kNoise) l = labels.k;
  return out;
}

}  // namespace vdpc
