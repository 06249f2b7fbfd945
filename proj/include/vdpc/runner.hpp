#pragma once

#include "vdpc/vdpc.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace vdpc {

enum class Algorithm { Vdpc, Dpc, Dbscan, Snnc };

Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm a);

/// An algorithm plus its parameters as a flat JSON object:
///   vdpc:   pct, delta_t, [num, k_rule, eps_rule, level_combo, level_assignment]
///   dpc:    pct, and either rho_u + delta_u or centers (the `centers` largest-delta points)
///   dbscan: eps, minpts
///   snnc:   k
struct AlgorithmConfig {
  Algorithm algorithm = Algorithm::Vdpc;
  nlohmann::json params = nlohmann::json::object();
};

/// Throws ParameterError when a key is missing, unknown, or mistyped.
void validate_config(const AlgorithmConfig& config);

VdpcOptions parse_vdpc_options(const nlohmann::json& params);
VdpcParams<double> parse_vdpc_params(const nlohmann::json& params);

struct RunOutcome {
  ClusterLabels labels;
  std::optional<DensityProfile<double>> profile;
  std::optional<VdpcResult<double>> vdpc;
};

RunOutcome run_algorithm(const CondensedDistances<double>& cd, const AlgorithmConfig& config);

struct Scores {
  double ari = 0;
  double nmi = 0;
};

/// ARI/NMI against ground truth; DBSCAN noise is scored as one extra cluster.
Scores score(const ClusterLabels& labels, std::span<const int> truth);

/// {"dataset", "algorithm", "params", "ari", "nmi", "runtime_ms"}; scores and runtime are
/// null when absent.
nlohmann::json metrics_json(const std::string& dataset, const AlgorithmConfig& config,
                            const std::optional<Scores>& scores, std::optional<double> runtime_ms);

/// Per-stage snapshots of a VDPC run, keyed by relative file name:
///   representatives.csv, initial_clusters.csv, levels.json, and when there are two or more
///   levels also point_levels.csv, l1_clusters.csv, c_low.csv, adbscan.csv.
std::map<std::string, std::string> vdpc_trace_files(const VdpcResult<double>& res);

}  // namespace vdpc
