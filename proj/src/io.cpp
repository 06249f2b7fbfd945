#include "vdpc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace vdpc {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_labels_csv(std::ostream& out, const ClusterLabels& labels) {
  out << "index,cluster\n";
  for (std::size_t i = 0; i < labels.assign.size(); ++i) out << i << ',' << labels.assign[i] << '\n';
}

std::vector<int> read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("index,cluster", 0) != 0) throw DataError(path.string() + ": missing 'index,cluster' header");
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("no comma");
      const auto idx = std::stoul(line.substr(0, comma));
      if (idx != labels.size()) throw std::invalid_argument("index out of sequence");
      labels.push_back(std::stoi(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed labels row '" + line + "'");
    }
  }
  return labels;
}

void write_decision_graph_csv(std::ostream& out, const std::vector<DecisionPoint<double>>& graph) {
  out << "index,rho,delta\n";
  for (const auto& p : graph) out << p.index << ',' << format_number(p.rho) << ',' << format_number(p.delta) << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw DataError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace vdpc
