#include "vdpc/bench.hpp"

#include "vdpc/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace vdpc {
namespace {

using nlohmann::json;

std::optional<double> optional_number(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw DataError(std::string("manifest field '") + key + "' must be a number or null");
  return it->get<double>();
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

std::string_view status_name(CellStatus s) {
  switch (s) {
    case CellStatus::Pass: return "pass";
    case CellStatus::Fail: return "fail";
    case CellStatus::Report: return "report";
    case CellStatus::Error: return "error";
  }
  return "?";
}

Manifest Manifest::parse(const json& doc) {
  Manifest m;
  try {
    for (const auto& [name, entry] : doc.at("datasets").items()) {
      DatasetEntry d;
      d.name = name;
      d.file = entry.at("file").get<std::string>();
      d.csv.has_header = entry.value("has_header", false);
      if (entry.contains("label_column")) d.csv.label_column = entry.at("label_column").get<Index>();
      if (entry.contains("size")) d.expected_size = entry.at("size").get<Index>();
      m.datasets.emplace(name, std::move(d));
    }
    for (const auto& [suite, cells] : doc.at("suites").items()) {
      auto& list = m.suites[suite];
      for (const auto& c : cells) {
        BenchCell cell;
        cell.dataset = c.at("dataset").get<std::string>();
        if (!m.datasets.count(cell.dataset))
          throw DataError("suite '" + suite + "' references unknown dataset '" + cell.dataset + "'");
        cell.config.algorithm = parse_algorithm(c.at("algorithm").get<std::string>());
        cell.config.params = c.at("params");
        validate_config(cell.config);
        cell.expected_ari = optional_number(c, "expected_ari");
        cell.expected_nmi = optional_number(c, "expected_nmi");
        cell.tolerance = c.value("tolerance", 0.01);
        cell.gated = c.value("gated", false);
        cell.note = c.value("note", "");
        if (cell.gated && !cell.expected_ari)
          throw DataError("suite '" + suite + "': gated cell on " + cell.dataset + " has no expected_ari");
        list.push_back(std::move(cell));
      }
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  } catch (const ParameterError& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

Manifest Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  try {
    return parse(json::parse(in));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Dataset<double> load_manifest_dataset(const DatasetEntry& entry, const std::filesystem::path& data_dir) {
  const auto path = data_dir / entry.file;
  if (!std::filesystem::exists(path))
    throw DataError("dataset '" + entry.name + "' not found (expected " + path.string() + ")");
  auto ds = load_points_csv(path, entry.csv);
  ds.name = entry.name;
  if (entry.expected_size && ds.size() != *entry.expected_size)
    throw DataError("dataset '" + entry.name + "' has " + std::to_string(ds.size()) + " points, manifest expects " +
                    std::to_string(*entry.expected_size));
  if (!ds.ground_truth) throw DataError("dataset '" + entry.name + "' has no ground-truth column");
  return ds;
}

std::vector<std::string> missing_datasets(const Manifest& manifest, const std::string& suite,
                                          const std::filesystem::path& data_dir) {
  const auto it = manifest.suites.find(suite);
  if (it == manifest.suites.end()) throw ParameterError("unknown suite '" + suite + "'");
  std::set<std::string> missing;
  for (const auto& cell : it->second) {
    const auto& entry = manifest.datasets.at(cell.dataset);
    if (!std::filesystem::exists(data_dir / entry.file)) missing.insert(cell.dataset);
  }
  return {missing.begin(), missing.end()};
}

std::vector<CellResult> run_suite(const Manifest& manifest, const std::string& suite,
                                  const std::filesystem::path& data_dir) {
  const auto it = manifest.suites.find(suite);
  if (it == manifest.suites.end()) throw ParameterError("unknown suite '" + suite + "'");

  struct Loaded {
    Dataset<double> ds;
    CondensedDistances<double> cd;
  };
  std::map<std::string, Loaded> cache;
  for (const auto& cell : it->second) {
    if (cache.count(cell.dataset)) continue;
    auto ds = load_manifest_dataset(manifest.datasets.at(cell.dataset), data_dir);
    auto cd = pairwise_distances(ds);
    cache.emplace(cell.dataset, Loaded{std::move(ds), std::move(cd)});
  }

  std::vector<CellResult> results;
  for (const auto& cell : it->second) {
    const auto& loaded = cache.at(cell.dataset);
    CellResult r{cell, {}, CellStatus::Report, {}};
    try {
      const auto outcome = run_algorithm(loaded.cd, cell.config);
      r.scores = score(outcome.labels, *loaded.ds.ground_truth);
      if (cell.gated) {
        r.status = std::abs(r.scores.ari - *cell.expected_ari) <= cell.tolerance ? CellStatus::Pass : CellStatus::Fail;
      }
    } catch (const Error& e) {
      r.scores = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
      r.status = CellStatus::Error;
      r.error = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::string suite_results_csv(const std::vector<CellResult>& results) {
  std::ostringstream out;
  out << "dataset,algorithm,params,ari,nmi,expected_ari,expected_nmi,tolerance,status\n";
  for (const auto& r : results) {
    out << r.cell.dataset << ',' << algorithm_name(r.cell.config.algorithm) << ','
        << csv_quote(r.cell.config.params.dump()) << ',' << format_number(r.scores.ari) << ','
        << format_number(r.scores.nmi) << ',' << opt_number(r.cell.expected_ari) << ','
        << opt_number(r.cell.expected_nmi) << ',' << format_number(r.cell.tolerance) << ','
        << status_name(r.status) << '\n';
  }
  return out.str();
}

json suite_results_json(const std::string& suite, const std::vector<CellResult>& results) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json cells = json::array();
  for (const auto& r : results) {
    json c = {{"dataset", r.cell.dataset},
              {"algorithm", algorithm_name(r.cell.config.algorithm)},
              {"params", r.cell.config.params},
              {"ari", num(r.scores.ari)},
              {"nmi", num(r.scores.nmi)},
              {"expected_ari", opt(r.cell.expected_ari)},
              {"expected_nmi", opt(r.cell.expected_nmi)},
              {"tolerance", r.cell.tolerance},
              {"gated", r.cell.gated},
              {"status", status_name(r.status)}};
    if (!r.error.empty()) c["error"] = r.error;
    if (!r.cell.note.empty()) c["note"] = r.cell.note;
    cells.push_back(std::move(c));
  }
  return {{"suite", suite}, {"cells", std::move(cells)}};
}

}  // namespace vdpc
