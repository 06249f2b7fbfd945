#pragma once

#include "vdpc/density.hpp"
#include "vdpc/baselines.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vdpc {

/// Locale-independent "%.12g" formatting shared by every writer.
std::string format_number(double v);

/// "index,cluster" with noise written as -1.
void write_labels_csv(std::ostream& out, const ClusterLabels& labels);
std::vector<int> read_labels_csv(const std::filesystem::path& path);

/// "index,rho,delta", 12 significant digits.
void write_decision_graph_csv(std::ostream& out, const std::vector<DecisionPoint<double>>& graph);

/// Writes `contents` to `path`, creating parent directories. Throws DataError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace vdpc
