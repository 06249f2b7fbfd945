#pragma once

#include "vdpc/runner.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vdpc {

struct DatasetEntry {
  std::string name;
  std::filesystem::path file;  // relative to the data directory
  CsvOptions csv;
  std::optional<Index> expected_size;
};

/// One (dataset, algorithm, params) cell with the reference scores it is compared to.
/// Cells without `gated` only report; a missing expectation stays unscored.
struct BenchCell {
  std::string dataset;
  AlgorithmConfig config;
  std::optional<double> expected_ari;
  std::optional<double> expected_nmi;
  double tolerance = 0.01;
  bool gated = false;
  std::string note;
};

struct Manifest {
  std::map<std::string, DatasetEntry> datasets;
  std::map<std::string, std::vector<BenchCell>> suites;

  /// Throws DataError on malformed JSON or a cell naming an unknown dataset.
  static Manifest parse(const nlohmann::json& doc);
  static Manifest load(const std::filesystem::path& path);
};

enum class CellStatus { Pass, Fail, Report, Error };
std::string_view status_name(CellStatus s);

struct CellResult {
  BenchCell cell;
  Scores scores;
  CellStatus status = CellStatus::Report;
  std::string error;
};

/// Loads (and caches) the dataset files a suite needs, then every cell in order.
/// A missing dataset file aborts with a DataError naming the dataset; a failing cell is
/// recorded with CellStatus::Error and NaN scores.
std::vector<CellResult> run_suite(const Manifest& manifest, const std::string& suite,
                                  const std::filesystem::path& data_dir);

/// Datasets referenced by a suite whose files are absent from `data_dir`.
std::vector<std::string> missing_datasets(const Manifest& manifest, const std::string& suite,
                                          const std::filesystem::path& data_dir);

Dataset<double> load_manifest_dataset(const DatasetEntry& entry, const std::filesystem::path& data_dir);

std::string suite_results_csv(const std::vector<CellResult>& results);
nlohmann::json suite_results_json(const std::string& suite, const std::vector<CellResult>& results);

}  // namespace vdpc
