#include "vdpc/runner.hpp"

#include "vdpc/io.hpp"
#include "vdpc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace vdpc {
namespace {

using nlohmann::json;

double number_param(const json& params, const char* key) {
  const auto it = params.find(key);
  if (it == params.end()) throw ParameterError(std::string("missing parameter '") + key + "'");
  if (!it->is_number()) throw ParameterError(std::string("parameter '") + key + "' must be a number");
  return it->get<double>();
}

Index integer_param(const json& params, const char* key) {
  const double v = number_param(params, key);
  if (v != static_cast<double>(static_cast<Index>(v)))
    throw ParameterError(std::string("parameter '") + key + "' must be an integer");
  return static_cast<Index>(v);
}

std::string string_param(const json& params, const char* key, const char* fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (!it->is_string()) throw ParameterError(std::string("parameter '") + key + "' must be a string");
  return it->get<std::string>();
}

void check_keys(const json& params, std::initializer_list<std::string_view> allowed) {
  if (!params.is_object()) throw ParameterError("parameters must be a JSON object");
  for (const auto& [key, value] : params.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ParameterError("unknown parameter '" + key + "'");
}

SizeRule parse_rule(const std::string& s, const char* what) {
  if (s == "sqrt") return SizeRule::Sqrt;
  if (s == "ln") return SizeRule::Ln;
  throw ParameterError(std::string(what) + " must be 'sqrt' or 'ln', got '" + s + "'");
}

LevelAlgorithm parse_level_algorithm(std::string_view s) {
  if (s == "snnc") return LevelAlgorithm::Snnc;
  if (s == "dbscan") return LevelAlgorithm::Dbscan;
  throw ParameterError("level algorithm must be 'snnc' or 'dbscan', got '" + std::string(s) + "'");
}

ClusterLabels run_dpc(const DensityProfile<double>& profile, const json& params) {
  if (params.contains("centers")) {
    const Index count = integer_param(params, "centers");
    if (count < 1 || count > profile.size()) throw ParameterError("centers must be in [1, N]");
    std::vector<double> deltas(profile.delta.begin(), profile.delta.end());
    std::nth_element(deltas.begin(), deltas.begin() + (count - 1), deltas.end(), std::greater<>());
    const double delta_u = deltas[static_cast<std::size_t>(count - 1)];
    const auto centers = dpc_select_centers(profile, 0.0, delta_u);
    return dpc_assign(profile, centers);
  }
  const auto centers = dpc_select_centers(profile, number_param(params, "rho_u"), number_param(params, "delta_u"));
  return dpc_assign(profile, centers);
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "vdpc") return Algorithm::Vdpc;
  if (name == "dpc") return Algorithm::Dpc;
  if (name == "dbscan") return Algorithm::Dbscan;
  if (name == "snnc") return Algorithm::Snnc;
  throw ParameterError("unknown algorithm '" + std::string(name) + "' (expected vdpc, dpc, dbscan or snnc)");
}

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Vdpc: return "vdpc";
    case Algorithm::Dpc: return "dpc";
    case Algorithm::Dbscan: return "dbscan";
    case Algorithm::Snnc: return "snnc";
  }
  return "?";
}

VdpcOptions parse_vdpc_options(const json& params) {
  VdpcOptions opts;
  opts.k_rule = parse_rule(string_param(params, "k_rule", "sqrt"), "k_rule");
  opts.eps_rule = parse_rule(string_param(params, "eps_rule", "sqrt"), "eps_rule");
  const auto combo = string_param(params, "level_combo", "snnc+dbscan");
  const auto plus = combo.find('+');
  if (plus == std::string::npos) throw ParameterError("level_combo must look like 'snnc+dbscan', got '" + combo + "'");
  opts.low_algorithm = parse_level_algorithm(std::string_view(combo).substr(0, plus));
  opts.high_algorithm = parse_level_algorithm(std::string_view(combo).substr(plus + 1));
  const auto assignment = string_param(params, "level_assignment", "midpoint");
  if (assignment == "midpoint") {
    opts.level_assignment = LevelAssignment::Midpoint;
  } else if (assignment == "inherit") {
    opts.level_assignment = LevelAssignment::Inherit;
  } else {
    throw ParameterError("level_assignment must be 'midpoint' or 'inherit', got '" + assignment + "'");
  }
  return opts;
}

VdpcParams<double> parse_vdpc_params(const json& params) {
  VdpcParams<double> p;
  p.pct = number_param(params, "pct");
  p.delta_t = number_param(params, "delta_t");
  if (params.contains("num")) p.num = static_cast<int>(integer_param(params, "num"));
  p.validate();
  return p;
}

void validate_config(const AlgorithmConfig& config) {
  const auto& p = config.params;
  switch (config.algorithm) {
    case Algorithm::Vdpc:
      check_keys(p, {"pct", "delta_t", "num", "k_rule", "eps_rule", "level_combo", "level_assignment"});
      parse_vdpc_params(p);
      parse_vdpc_options(p);
      break;
    case Algorithm::Dpc:
      check_keys(p, {"pct", "rho_u", "delta_u", "centers"});
      if (!(number_param(p, "pct") > 0)) throw ParameterError("pct must be > 0");
      if (p.contains("centers")) {
        if (p.contains("rho_u") || p.contains("delta_u"))
          throw ParameterError("give either centers or rho_u/delta_u, not both");
        integer_param(p, "centers");
      } else {
        number_param(p, "rho_u");
        number_param(p, "delta_u");
      }
      break;
    case Algorithm::Dbscan:
      check_keys(p, {"eps", "minpts"});
      if (!(number_param(p, "eps") > 0)) throw ParameterError("eps must be > 0");
      if (integer_param(p, "minpts") < 1) throw ParameterError("minpts must be >= 1");
      break;
    case Algorithm::Snnc:
      check_keys(p, {"k"});
      if (integer_param(p, "k") < 1) throw ParameterError("k must be >= 1");
      break;
  }
}

RunOutcome run_algorithm(const CondensedDistances<double>& cd, const AlgorithmConfig& config) {
  validate_config(config);
  const auto& p = config.params;
  RunOutcome out;
  switch (config.algorithm) {
    case Algorithm::Vdpc: {
      auto res = vdpc_run(cd, parse_vdpc_params(p), parse_vdpc_options(p));
      out.labels = res.labels;
      out.profile = res.profile;
      out.vdpc = std::move(res);
      break;
    }
    case Algorithm::Dpc:
      out.profile = density_profile(cd, number_param(p, "pct"));
      out.labels = run_dpc(*out.profile, p);
      break;
    case Algorithm::Dbscan:
      out.labels = dbscan(cd, DbscanParams{number_param(p, "eps"), integer_param(p, "minpts")});
      break;
    case Algorithm::Snnc:
      out.labels = snnc(cd, integer_param(p, "k"));
      break;
  }
  return out;
}

Scores score(const ClusterLabels& labels, std::span<const int> truth) {
  const auto pred = noise_as_cluster(labels);
  return {ari(pred, truth), nmi(pred, truth)};
}

json metrics_json(const std::string& dataset, const AlgorithmConfig& config, const std::optional<Scores>& scores,
                  std::optional<double> runtime_ms) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"dataset", dataset},
          {"algorithm", algorithm_name(config.algorithm)},
          {"params", config.params},
          {"ari", scores ? num(scores->ari) : json(nullptr)},
          {"nmi", scores ? num(scores->nmi) : json(nullptr)},
          {"runtime_ms", runtime_ms ? json(*runtime_ms) : json(nullptr)}};
}

namespace {

std::string labels_csv(const std::vector<int>& assign) {
  std::ostringstream out;
  write_labels_csv(out, ClusterLabels{assign, 0});
  return out.str();
}

std::string clusters_csv(Index n, const Clusters& clusters) { return labels_csv(labels_from_clusters(n, clusters).assign); }

}  // namespace

std::map<std::string, std::string> vdpc_trace_files(const VdpcResult<double>& res) {
  std::map<std::string, std::string> files;
  const Index n = res.profile.size();
  const bool multi = res.levels.numl() >= 2;

  std::ostringstream reps;
  reps << "index,rho,delta,level\n";
  for (std::size_t r = 0; r < res.representatives.size(); ++r) {
    const Index i = res.representatives[r];
    reps << i << ',' << format_number(res.profile.rho[i]) << ',' << format_number(res.profile.delta[i]) << ','
         << res.levels.rep_level[r] << '\n';
  }
  files["representatives.csv"] = reps.str();
  files["initial_clusters.csv"] = labels_csv(res.initial.assign);

  json levels = {{"w", res.levels.w}, {"numl", res.levels.numl()}};
  json intervals = json::array(), gaps = json::array();
  for (const auto& iv : res.levels.intervals) intervals.push_back({iv.lo, iv.hi});
  for (const auto& g : res.levels.gaps) gaps.push_back({g.lo, g.hi});
  levels["intervals"] = intervals;
  levels["gaps"] = gaps;
  levels["mean_rep_rho"] = representative_level_means(res.profile, res.representatives, res.levels);
  levels["d_c"] = res.profile.d_c;
  if (multi) {
    levels["boundary_points"] = res.split.boundary;
    levels["boundary_fallback"] = res.boundary_fallback;
    json derivations = json::array();
    for (std::size_t t = 0; t < res.derivations.size(); ++t) {
      json d = {{"level", t + 2}};
      if (const auto& dv = res.derivations[t]) {
        d.update({{"x_low", dv->x_low}, {"x_far", dv->x_far}, {"x_high", dv->x_high}, {"c_low_size", dv->c_low_size},
                  {"sim_rank", dv->sim_rank}, {"eps", dv->eps}, {"minpts_low", dv->minpts_low},
                  {"minpts_high", dv->minpts_high}, {"minpts", dv->minpts}});
      }
      d["micro_merged"] = res.level_final[t].merged;
      derivations.push_back(std::move(d));
    }
    levels["levels"] = derivations;
  }
  files["levels.json"] = levels.dump(2) + "\n";
  if (!multi) return files;

  std::ostringstream pl;
  pl << "index,level_before,level_after\n";
  for (Index i = 0; i < n; ++i)
    pl << i << ',' << res.partition.point_level[static_cast<std::size_t>(i)] << ','
       << res.point_level[static_cast<std::size_t>(i)] << '\n';
  files["point_levels.csv"] = pl.str();

  auto l1 = labels_from_clusters(n, res.low_clusters);
  files["l1_clusters.csv"] = labels_csv(l1.assign);
  files["c_low.csv"] = clusters_csv(n, res.split.c_low);

  // Raw per-level clusters with ids offset so levels do not collide; noise stays -1.
  std::ostringstream ad;
  ad << "index,level,cluster\n";
  std::vector<std::pair<int, int>> raw(static_cast<std::size_t>(n), {0, kNoise});
  int offset = 0;
  for (std::size_t t = 0; t < res.level_raw.size(); ++t) {
    const auto& lc = res.level_raw[t];
    for (std::size_t c = 0; c < lc.clusters.size(); ++c)
      for (Index i : lc.clusters[c]) raw[static_cast<std::size_t>(i)] = {static_cast<int>(t) + 2, offset + static_cast<int>(c)};
    for (Index i : lc.noise) raw[static_cast<std::size_t>(i)] = {static_cast<int>(t) + 2, kNoise};
    offset += static_cast<int>(lc.clusters.size());
  }
  for (Index i = 0; i < n; ++i) {
    const auto& [lvl, c] = raw[static_cast<std::size_t>(i)];
    if (lvl) ad << i << ',' << lvl << ',' << c << '\n';
  }
  files["adbscan.csv"] = ad.str();
  return files;
}

}  // namespace vdpc
