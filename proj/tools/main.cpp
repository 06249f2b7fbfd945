#include "vdpc/bench.hpp"
#include "vdpc/io.hpp"
#include "vdpc/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

namespace {

using nlohmann::json;
using namespace vdpc;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kPipeline = 3, kTolerance = 4 };

struct InputOptions {
  std::string path;
  std::string format = "points";
  bool header = false;
  std::optional<Index> label_column;
  std::optional<Index> n;
  std::string truth;
};

struct Input {
  std::string name;
  CondensedDistances<double> cd;
  std::optional<std::vector<int>> truth;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("-i,--input", in.path, "Point file (one row per point) or condensed distance file")
      ->required();
  cmd->add_option("--input-format", in.format, "points or matrix")->check(CLI::IsMember({"points", "matrix"}));
  cmd->add_flag("--header", in.header, "First row of the point file is a header");
  cmd->add_option("--label-column", in.label_column, "Ground-truth column (0-based, negative counts from the end)");
  cmd->add_option("-n,--points", in.n, "Point count of a condensed matrix (inferred when omitted)");
  cmd->add_option("--truth", in.truth, "Ground-truth labels file (index,cluster)");
}

Input load_input(const InputOptions& opt) {
  Input in;
  in.name = std::filesystem::path(opt.path).stem().string();
  if (opt.format == "matrix") {
    if (opt.label_column) throw ParameterError("--label-column only applies to point files");
    in.cd = opt.n ? load_condensed_matrix(opt.path, *opt.n) : load_condensed_matrix(opt.path);
  } else {
    auto ds = load_points_csv(opt.path, CsvOptions{opt.header, opt.label_column});
    in.cd = pairwise_distances(ds);
    in.truth = std::move(ds.ground_truth);
  }
  if (!opt.truth.empty()) {
    if (in.truth) throw ParameterError("give either --label-column or --truth, not both");
    in.truth = read_labels_csv(opt.truth);
  }
  if (in.truth && static_cast<Index>(in.truth->size()) != in.cd.size())
    throw DataError("ground truth has " + std::to_string(in.truth->size()) + " labels for " +
                    std::to_string(in.cd.size()) + " points");
  return in;
}

// Algorithm parameters given as individual flags; only the ones set end up in the JSON.
struct ParamFlags {
  std::string algorithm = "vdpc";
  std::string params_json;
  std::map<std::string, double> numbers;
  std::map<std::string, std::string> strings;
};

void add_param_options(CLI::App* cmd, ParamFlags& p) {
  cmd->add_option("-a,--algorithm", p.algorithm, "vdpc, dpc, dbscan or snnc")
      ->check(CLI::IsMember({"vdpc", "dpc", "dbscan", "snnc"}));
  cmd->add_option("--params", p.params_json, "Parameters as a JSON object, e.g. '{\"pct\":2,\"delta_t\":1}'");
  auto flag_of = [](std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return "--" + key;
  };
  for (const char* key : {"pct", "delta_t", "num", "rho_u", "delta_u", "centers", "eps", "minpts", "k"}) {
    const auto flag = flag_of(key);
    cmd->add_option_function<double>(flag, [&p, key](double v) { p.numbers[key] = v; }, std::string("Set ") + key);
  }
  for (const char* key : {"k_rule", "eps_rule", "level_combo", "level_assignment"}) {
    cmd->add_option_function<std::string>(flag_of(key), [&p, key](const std::string& v) { p.strings[key] = v; },
                                          std::string("Set ") + key);
  }
}

json integral_if_whole(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e15) return json(static_cast<std::int64_t>(v));
  return json(v);
}

AlgorithmConfig build_config(const ParamFlags& p) {
  AlgorithmConfig config;
  config.algorithm = parse_algorithm(p.algorithm);
  if (!p.params_json.empty()) {
    try {
      config.params = json::parse(p.params_json);
    } catch (const json::exception& e) {
      throw ParameterError(std::string("--params is not valid JSON: ") + e.what());
    }
  }
  for (const auto& [k, v] : p.numbers) config.params[k] = integral_if_whole(v);
  for (const auto& [k, v] : p.strings) config.params[k] = v;
  validate_config(config);
  return config;
}

std::string labels_text(const ClusterLabels& labels) {
  std::ostringstream out;
  write_labels_csv(out, labels);
  return out.str();
}

std::string summary_csv_header() { return "dataset,algorithm,params,clusters,ari,nmi\n"; }

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string fmt_or_empty(const json& v) { return v.is_number() ? format_number(v.get<double>()) : ""; }

// Output files are assembled in memory and written only once everything has succeeded.
using FileSet = std::map<std::filesystem::path, std::string>;

void write_all(const FileSet& files) {
  for (const auto& [path, text] : files) write_text_file(path, text);
}

int cmd_run(const InputOptions& io, const ParamFlags& pf, const std::string& out_dir, bool trace, bool timing,
            const std::string& format) {
  const auto input = load_input(io);
  const auto config = build_config(pf);

  const auto start = std::chrono::steady_clock::now();
  const auto outcome = run_algorithm(input.cd, config);
  const double elapsed =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  std::optional<Scores> scores;
  if (input.truth) scores = score(outcome.labels, *input.truth);
  const auto metrics = metrics_json(input.name, config, scores, timing ? std::optional(elapsed) : std::nullopt);

  FileSet files;
  const std::filesystem::path dir(out_dir);
  files[dir / "labels.csv"] = labels_text(outcome.labels);
  if (outcome.profile) {
    std::ostringstream dg;
    write_decision_graph_csv(dg, decision_graph(*outcome.profile));
    files[dir / "decision_graph.csv"] = dg.str();
  }
  if (scores) files[dir / "metrics.json"] = metrics.dump(2) + "\n";
  if (trace && outcome.vdpc)
    for (auto& [name, text] : vdpc_trace_files(*outcome.vdpc)) files[dir / "trace" / name] = std::move(text);
  write_all(files);

  json summary = metrics;
  summary["clusters"] = outcome.labels.k;
  if (format == "json") {
    std::cout << summary.dump() << '\n';
  } else {
    std::cout << summary_csv_header() << input.name << ',' << algorithm_name(config.algorithm) << ','
              << quote(config.params.dump()) << ',' << outcome.labels.k << ',' << fmt_or_empty(summary["ari"]) << ','
              << fmt_or_empty(summary["nmi"]) << '\n';
  }
  return kOk;
}

int cmd_decision_graph(const InputOptions& io, double pct, const std::string& out) {
  const auto input = load_input(io);
  const auto profile = density_profile(input.cd, pct);
  std::ostringstream text;
  write_decision_graph_csv(text, decision_graph(profile));
  if (out.empty() || out == "-") {
    std::cout << text.str();
  } else {
    write_text_file(out, text.str());
  }
  return kOk;
}

int cmd_bench(const std::string& suite, const std::string& manifest_path, std::string data_dir,
              const std::string& out_dir, const std::string& format) {
  const auto manifest = Manifest::load(manifest_path);
  if (!manifest.suites.count(suite)) throw ParameterError("unknown suite '" + suite + "' in " + manifest_path);
  if (data_dir.empty()) data_dir = std::filesystem::path(manifest_path).parent_path().string();
  const auto missing = missing_datasets(manifest, suite, data_dir);
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw DataError("suite '" + suite + "' aborted: missing dataset(s) " + names + " in " + data_dir);
  }
  const auto results = run_suite(manifest, suite, data_dir);
  const auto csv = suite_results_csv(results);
  const auto doc = suite_results_json(suite, results);
  if (!out_dir.empty()) {
    const std::filesystem::path dir(out_dir);
    write_all({{dir / (suite + ".csv"), csv}, {dir / (suite + ".json"), doc.dump(2) + "\n"}});
  }
  std::cout << (format == "json" ? doc.dump(2) + "\n" : csv);

  int failed = 0;
  for (const auto& r : results)
    if (r.cell.gated && r.status != CellStatus::Pass) ++failed;
  if (failed) {
    std::cerr << "vdpc bench: " << failed << " gated cell(s) outside tolerance\n";
    return kTolerance;
  }
  return kOk;
}

// Grid values keep the order they were given in; the last key varies fastest.
using Grid = std::vector<std::pair<std::string, std::vector<json>>>;

Grid parse_grid(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ParameterError(std::string("grid is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParameterError("grid must be a JSON object of value lists");
  Grid grid;
  for (const auto& [key, values] : doc.items()) {
    if (!values.is_array()) throw ParameterError("grid entry '" + key + "' must be a list");
    std::vector<json> vals;
    for (const auto& v : values) vals.push_back(json::parse(v.dump()));
    grid.emplace_back(key, std::move(vals));
  }
  return grid;
}

int cmd_sweep(const InputOptions& io, const ParamFlags& pf, const std::string& grid_text, const std::string& grid_file,
              const std::string& out) {
  std::string text = grid_text;
  if (!grid_file.empty()) {
    if (!text.empty()) throw ParameterError("give either --grid or --grid-file, not both");
    std::ifstream in(grid_file);
    if (!in) throw DataError("cannot open grid file " + grid_file);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  if (text.empty()) throw ParameterError("sweep needs --grid or --grid-file");
  const auto grid = parse_grid(text);

  AlgorithmConfig base;
  base.algorithm = parse_algorithm(pf.algorithm);
  if (!pf.params_json.empty()) base.params = json::parse(pf.params_json);
  for (const auto& [k, v] : pf.numbers) base.params[k] = integral_if_whole(v);
  for (const auto& [k, v] : pf.strings) base.params[k] = v;

  std::ostringstream csv;
  for (const auto& [key, values] : grid) csv << key << ',';
  csv << "clusters,ari,nmi\n";

  std::size_t cells = grid.empty() ? 0 : 1;
  for (const auto& [key, values] : grid) cells *= values.size();

  if (cells > 0) {
    const auto input = load_input(io);
    if (!input.truth) throw DataError("sweep needs ground truth (--label-column or --truth)");
    std::vector<std::size_t> pos(grid.size(), 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
      std::size_t rest = cell;
      for (std::size_t g = grid.size(); g-- > 0;) {
        pos[g] = rest % grid[g].second.size();
        rest /= grid[g].second.size();
      }
      AlgorithmConfig config = base;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto& v = grid[g].second[pos[g]];
        config.params[grid[g].first] = v;
        csv << (v.is_string() ? v.get<std::string>() : v.is_number() ? format_number(v.get<double>()) : v.dump())
            << ',';
      }
      try {
        const auto outcome = run_algorithm(input.cd, config);
        const auto s = score(outcome.labels, *input.truth);
        csv << outcome.labels.k << ',' << format_number(s.ari) << ',' << format_number(s.nmi) << '\n';
      } catch (const Error& e) {
        std::cerr << "vdpc sweep: " << config.params.dump() << ": " << e.what() << '\n';
        csv << ",nan,nan\n";
      }
    }
  }

  if (out.empty() || out == "-") {
    std::cout << csv.str();
  } else {
    write_text_file(out, csv.str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational density peak clustering and baselines"};
  app.require_subcommand(1);

  InputOptions run_in, dg_in, sweep_in;
  ParamFlags run_params, sweep_params;
  std::string run_out = "out", run_format = "csv";
  bool trace = false, timing = false;
  auto* run = app.add_subcommand("run", "Cluster one dataset and write labels, decision graph and metrics");
  add_input_options(run, run_in);
  add_param_options(run, run_params);
  run->add_option("-o,--out", run_out, "Output directory");
  run->add_flag("--trace", trace, "Also write per-stage snapshots under <out>/trace");
  run->add_flag("--timing", timing, "Record runtime_ms in metrics.json (otherwise null)");
  run->add_option("--format", run_format, "Summary format on stdout")->check(CLI::IsMember({"csv", "json"}));

  std::string suite, manifest = "data/manifest.json", data_dir, bench_out, bench_format = "csv";
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite and compare against reference scores");
  bench->add_option("-s,--suite", suite, "Suite name from the manifest, e.g. synthetic-table4")->required();
  bench->add_option("-m,--manifest", manifest, "Manifest JSON");
  bench->add_option("-d,--data-dir", data_dir, "Directory holding the dataset files (default: next to the manifest)");
  bench->add_option("-o,--out", bench_out, "Write <suite>.csv and <suite>.json here");
  bench->add_option("--format", bench_format, "Table format on stdout")->check(CLI::IsMember({"csv", "json"}));

  std::string grid, grid_file, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Evaluate every point of a parameter grid");
  add_input_options(sweep, sweep_in);
  add_param_options(sweep, sweep_params);
  sweep->add_option("-g,--grid", grid, "JSON object of value lists, e.g. '{\"pct\":[1,2],\"delta_t\":[1]}'");
  sweep->add_option("--grid-file", grid_file, "File holding the grid JSON");
  sweep->add_option("-o,--out", sweep_out, "Output CSV (default: stdout)");

  double dg_pct = 2;
  std::string dg_out;
  auto* dg = app.add_subcommand("decision-graph", "Write index,rho,delta for every point");
  add_input_options(dg, dg_in);
  dg->add_option("--pct", dg_pct, "Cut-off percentage")->required();
  dg->add_option("-o,--out", dg_out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(run_in, run_params, run_out, trace, timing, run_format);
    if (*bench) return cmd_bench(suite, manifest, data_dir, bench_out, bench_format);
    if (*sweep) return cmd_sweep(sweep_in, sweep_params, grid, grid_file, sweep_out);
    if (*dg) return cmd_decision_graph(dg_in, dg_pct, dg_out);
  } catch (const DataError& e) {
    std::cerr << "vdpc: data error: " << e.what() << '\n';
    return kData;
  } catch (const PipelineError& e) {
    std::cerr << "vdpc: pipeline error in stage '" << e.stage() << "': " << e.what() << '\n';
    return kPipeline;
  } catch (const ParameterError& e) {
    std::cerr << "vdpc: " << e.what() << '\n';
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "vdpc: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
