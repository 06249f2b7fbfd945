// One PASS/FAIL/BLOCKED line per acceptance criterion.
// Exit 0 when all pass, 1 on any FAIL, 77 when the only shortfall is missing reference data.

#include "oracles.hpp"
#include "support.hpp"

#include "vdpc/bench.hpp"
#include "vdpc/io.hpp"
#include "vdpc/metrics.hpp"
#include "vdpc/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <sstream>

using namespace vdpc;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Blocked };

struct Verdict {
  Status status = Status::Pass;
  std::string detail;
};

fs::path data_dir() {
  if (const char* env = std::getenv("VDPC_DATA_DIR")) return env;
  return VDPC_DATA_DIR;
}

const Manifest& manifest() {
  static const Manifest m = Manifest::load(data_dir() / "manifest.json");
  return m;
}

struct Loaded {
  Dataset<double> ds;
  CondensedDistances<double> cd;
};

// nullopt when the file is not in the data directory
std::optional<Loaded> load(const std::string& name) {
  static std::map<std::string, Loaded> cache;
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  const auto& entry = manifest().datasets.at(name);
  if (!fs::exists(data_dir() / entry.file)) return std::nullopt;
  auto ds = load_manifest_dataset(entry, data_dir());
  auto cd = pairwise_distances(ds);
  return cache.emplace(name, Loaded{std::move(ds), std::move(cd)}).first->second;
}

std::vector<std::string> missing(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& n : names)
    if (!fs::exists(data_dir() / manifest().datasets.at(n).file)) out.push_back(n);
  return out;
}

Verdict blocked(const std::vector<std::string>& names) {
  std::string s = "reference data absent from " + data_dir().string() + ":";
  for (const auto& n : names) s += " " + n;
  return {Status::Blocked, s};
}

std::string fmt(double v) { return format_number(std::round(v * 1e4) / 1e4); }

double vdpc_ari(const Loaded& d, double pct, double delta_t, const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json params = extra;
  params["pct"] = pct;
  params["delta_t"] = delta_t;
  const auto out = run_algorithm(d.cd, {Algorithm::Vdpc, params});
  return score(out.labels, *d.ds.ground_truth).ari;
}

const std::vector<std::string> kSix{"Flame", "Aggregation", "R15", "Compound", "Jain", "Pathbased"};

struct Row {
  std::string dataset;
  double pct;
  double delta_t;
  double expected;
};

const std::vector<Row> kTable4{{"Flame", 5, 5.5, 1.0},         {"Aggregation", 4, 2.9, 1.0}, {"R15", 5, 1, 0.9928},
                               {"Compound", 1.9, 1.39, 1.0}, {"Jain", 50, 5.5, 1.0},       {"Pathbased", 0.4, 3.5, 1.0}};

bool meets(double ari, double expected) {
  return expected == 1.0 ? ari >= 0.99 : std::abs(ari - expected) <= 0.01;
}

Verdict criterion_table4() {
  if (auto m = missing(kSix); !m.empty()) return blocked(m);
  Verdict v;
  std::ostringstream s;
  for (const auto& r : kTable4) {
    const auto d = *load(r.dataset);
    const auto start = std::chrono::steady_clock::now();
    const double a = vdpc_ari(d, r.pct, r.delta_t);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    s << r.dataset << "=" << fmt(a);
    if (secs >= 5) {
      v.status = Status::Fail;
      s << "(" << fmt(secs) << "s)";
    }
    if (!meets(a, r.expected)) {
      v.status = Status::Fail;
      // report whether a parameter within 10% recovers the reference score
      std::string near;
      for (double fp : {0.9, 1.0, 1.1})
        for (double fd : {0.9, 1.0, 1.1})
          if (near.empty() && (fp != 1.0 || fd != 1.0)) {
            try {
              if (meets(vdpc_ari(d, r.pct * fp, r.delta_t * fd), r.expected))
                near = "pct*" + fmt(fp) + ",delta_t*" + fmt(fd);
            } catch (const Error&) {
            }
          }
      s << "[want " << fmt(r.expected) << (near.empty() ? "; no nearby recovery" : "; recovered at " + near) << "]";
    }
    s << ' ';
  }
  v.detail = s.str();
  return v;
}

Verdict criterion_compound_structure() {
  if (auto m = missing({"Compound"}); !m.empty()) return blocked(m);
  const auto d = *load("Compound");
  const auto res = vdpc_run(d.cd, VdpcParams<double>{1.9, 1.39, 10});
  const auto& L = res.levels;
  std::ostringstream s;
  bool ok = std::abs(L.w - 1.4607) <= 0.01;
  s << "w=" << fmt(L.w) << " numl=" << L.numl();
  ok = ok && L.numl() == 2;
  const double want[2][2] = {{0.0354, 1.375}, {8.392, 14.6423}};
  for (int p = 0; p < L.numl(); ++p) {
    s << " l" << p + 1 << "=[" << fmt(L.intervals[p].lo) << "," << fmt(L.intervals[p].hi) << "]";
    if (p < 2)
      ok = ok && std::abs(L.intervals[p].lo - want[p][0]) <= 0.01 && std::abs(L.intervals[p].hi - want[p][1]) <= 0.01;
  }
  const auto means = representative_level_means(res.profile, res.representatives, L);
  const double want_mean[2] = {0.3685, 11.3278};
  s << " mean_rep_rho=";
  for (std::size_t p = 0; p < means.size(); ++p) {
    s << fmt(means[p]) << (p + 1 < means.size() ? "," : "");
    if (p < 2) ok = ok && std::abs(means[p] - want_mean[p]) <= 0.01 * want_mean[p];
  }
  return {ok ? Status::Pass : Status::Fail, s.str()};
}

Verdict criterion_num_sensitivity() {
  if (auto m = missing(kSix); !m.empty()) return blocked(m);
  Verdict v;
  std::ostringstream s;
  for (const auto& r : kTable4) {
    const auto d = *load(r.dataset);
    s << r.dataset << "=";
    for (int num : {8, 10, 12}) {
      const double a = vdpc_ari(d, r.pct, r.delta_t, {{"num", num}});
      const bool gated = !(r.dataset == "Pathbased" && num >= 12);
      s << fmt(a) << (gated ? "" : "(ungated)") << (num < 12 ? "/" : " ");
      if (gated && a < 0.99) v.status = Status::Fail;
    }
  }
  v.detail = s.str();
  return v;
}

Verdict criterion_combinations() {
  if (auto m = missing({"Compound", "Pathbased"}); !m.empty()) return blocked(m);
  Verdict v;
  std::ostringstream s;
  for (const auto* name : {"Compound", "Pathbased"}) {
    const auto& r = *std::find_if(kTable4.begin(), kTable4.end(), [&](const Row& x) { return x.dataset == name; });
    const auto d = *load(name);
    std::map<std::string, double> a;
    for (const char* combo : {"snnc+dbscan", "snnc+snnc", "dbscan+dbscan", "dbscan+snnc"})
      a[combo] = vdpc_ari(d, r.pct, r.delta_t, {{"level_combo", combo}});
    s << name << ":";
    for (const auto& [combo, value] : a) {
      s << " " << combo << "=" << fmt(value);
      if (combo != "snnc+dbscan" && !(a["snnc+dbscan"] > value)) v.status = Status::Fail;
    }
    if (std::string(name) == "Pathbased" && !(a["dbscan+dbscan"] < 0.1)) v.status = Status::Fail;
    s << "; ";
  }
  v.detail = s.str();
  return v;
}

Verdict criterion_baselines() {
  if (auto m = missing({"Jain", "Flame"}); !m.empty()) return blocked(m);
  const auto jain = *load("Jain");
  const auto db = run_algorithm(jain.cd, {Algorithm::Dbscan, {{"eps", 2.9}, {"minpts", 20}}});
  const double a_db = score(db.labels, *jain.ds.ground_truth).ari;

  // the manual rectangle is emulated by the manifest's DPC row for Flame
  nlohmann::json dpc_params = {{"pct", 5}, {"centers", 2}};
  for (const auto& cell : manifest().suites.at("synthetic-table4"))
    if (cell.dataset == "Flame" && cell.config.algorithm == Algorithm::Dpc) dpc_params = cell.config.params;
  const auto flame = *load("Flame");
  const auto dpc = run_algorithm(flame.cd, {Algorithm::Dpc, dpc_params});
  const double a_dpc = score(dpc.labels, *flame.ds.ground_truth).ari;

  return {a_db >= 0.99 && a_dpc >= 0.99 ? Status::Pass : Status::Fail,
          "dbscan Jain=" + fmt(a_db) + " dpc Flame " + dpc_params.dump() + "=" + fmt(a_dpc)};
}

Verdict criterion_oracles() {
  testing::Rng rng(6);
  int bad_dbscan = 0, bad_density = 0, bad_metrics = 0, bad_snnc = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto ds = testing::random_points(rng, 2, 30);
    const Index n = ds.size();
    const auto cd = pairwise_distances(ds);
    const auto d = oracle::distances(ds.points);

    const double eps = rng.uniform(0.1, 3.0);
    const Index minpts = 1 + rng.index(6);
    if (!testing::same_partition(dbscan(cd, {eps, minpts}).assign, oracle::dbscan(d, eps, minpts))) ++bad_dbscan;

    const auto p = density_profile(cd, rng.uniform(0.5, 30));
    const auto rho = oracle::rho(d, p.d_c);
    const auto del = oracle::delta(d, rho);
    for (Index i = 0; i < n; ++i) {
      const auto s = static_cast<std::size_t>(i);
      if (std::abs(p.rho[i] - rho[s]) > 1e-12 || std::abs(p.delta[i] - del.delta[s]) > 1e-12 ||
          p.nneigh[s] != del.nneigh[s]) {
        ++bad_density;
        break;
      }
    }

    std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    const int ka = 1 + static_cast<int>(rng.index(5)), kb = 1 + static_cast<int>(rng.index(5));
    for (auto& x : a) x = static_cast<int>(rng.index(ka));
    for (auto& x : b) x = static_cast<int>(rng.index(kb));
    if (std::abs(ari(a, b) - oracle::ari(a, b)) > 1e-12 || std::abs(nmi(a, b) - oracle::nmi(a, b)) > 1e-12)
      ++bad_metrics;

    const Index k = 1 + rng.index(n - 1);
    if (!testing::same_partition(snnc(cd, k).assign, oracle::snnc(d, static_cast<std::size_t>(k)))) ++bad_snnc;
  }
  const bool ok = bad_dbscan + bad_density + bad_metrics + bad_snnc == 0;
  return {ok ? Status::Pass : Status::Fail, "200 datasets; mismatches dbscan=" + std::to_string(bad_dbscan) +
                                                " rho/delta=" + std::to_string(bad_density) +
                                                " ari/nmi=" + std::to_string(bad_metrics) +
                                                " snnc=" + std::to_string(bad_snnc)};
}

struct InvarianceCase {
  std::string name;
  Dataset<double> ds;
  double pct;
  double delta_t;
};

std::string run_fingerprint(const CondensedDistances<double>& cd, const VdpcParams<double>& params) {
  const auto res = vdpc_run(cd, params);
  std::ostringstream s;
  write_labels_csv(s, res.labels);
  for (const auto& [name, text] : vdpc_trace_files(res)) s << name << '\n' << text;
  return s.str();
}

// No repeated distance and no two densities within rounding of each other. Isolated pairs
// tie exactly: every other kernel term underflows, so each sees only the other.
bool tie_free(const CondensedDistances<double>& cd, double pct) {
  const auto& u = cd.sorted();
  if (std::adjacent_find(u.begin(), u.end()) != u.end()) return false;
  const auto rho = local_density(cd, cutoff_distance(cd, pct));
  std::vector<double> r(rho.data(), rho.data() + rho.size());
  std::sort(r.begin(), r.end());
  for (std::size_t i = 1; i < r.size(); ++i)
    if (r[i] - r[i - 1] <= 1e-9 * r[i]) return false;
  return true;
}

Verdict criterion_invariances() {
  std::vector<InvarianceCase> cases;
  cases.push_back({"mixed", testing::make_blobs({{0, 0, 0.5, 60}, {6, 0, 0.5, 60}, {3, 10, 1.6, 60}}, 42), 2, 2.0});
  cases.push_back(
      {"four", testing::make_blobs({{0, 0, 0.4, 80}, {5, 0, 0.4, 80}, {0, 9, 1.2, 80}, {9, 9, 2.0, 80}}, 11), 2, 2.5});
  for (const auto* name : {"Compound", "Pathbased"})
    if (missing({name}).empty()) {
      const auto& r = *std::find_if(kTable4.begin(), kTable4.end(), [&](const Row& x) { return x.dataset == name; });
      cases.push_back({name, load(name)->ds, r.pct, r.delta_t});
    }
  testing::Rng rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    auto ds = testing::random_points(rng, 15, 60);
    const auto p = density_profile(pairwise_distances(ds), 3);
    cases.push_back({"random" + std::to_string(rep), ds, 3, p.delta[p.argmax()] * rng.uniform(0.1, 0.6)});
  }

  int runs = 0, skipped = 0, with_ties = 0;
  std::vector<std::string> failures;
  for (const auto& c : cases) {
    const auto cd = pairwise_distances(c.ds);
    const VdpcParams<double> params{c.pct, c.delta_t, 10};
    std::string first;
    try {
      first = run_fingerprint(cd, params);
    } catch (const PipelineError&) {
      ++skipped;
      continue;
    }
    ++runs;
    if (run_fingerprint(cd, params) != first) failures.push_back(c.name + ":repeat");

    const auto base = vdpc_run(cd, params).labels;
    for (double f : {2.0, 0.5, 3.0}) {
      Dataset<double> scaled = c.ds;
      scaled.points *= f;
      try {
        const auto l = vdpc_run(pairwise_distances(scaled), VdpcParams<double>{c.pct, c.delta_t * f, 10}).labels;
        if (l != base) failures.push_back(c.name + ":scale" + fmt(f));
      } catch (const PipelineError&) {
        failures.push_back(c.name + ":scale" + fmt(f) + "(threw)");
      }
    }

    if (!tie_free(cd, c.pct)) {
      ++with_ties;
      continue;
    }
    const Index n = c.ds.size();
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = n - 1; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[rng.index(i + 1)]);
    Dataset<double> shuffled;
    shuffled.points.resize(n, c.ds.dim());
    for (Index i = 0; i < n; ++i) shuffled.points.row(i) = c.ds.points.row(perm[static_cast<std::size_t>(i)]);
    try {
      const auto l = vdpc_run(pairwise_distances(shuffled), params).labels;
      std::vector<int> back(static_cast<std::size_t>(n));
      for (Index i = 0; i < n; ++i)
        back[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = l.assign[static_cast<std::size_t>(i)];
      if (!testing::same_partition(back, base.assign)) failures.push_back(c.name + ":permute");
    } catch (const PipelineError&) {
      failures.push_back(c.name + ":permute(threw)");
    }
  }
  std::string detail = std::to_string(runs) + " datasets (" + std::to_string(skipped) + " rejected by the pipeline, " +
                       std::to_string(with_ties) + " with ties skipped for permutation)";
  if (!failures.empty()) {
    detail += "; broken:";
    for (const auto& f : failures) detail += " " + f;
  }
  return {failures.empty() && runs > 0 ? Status::Pass : Status::Fail, detail};
}

Verdict criterion_scale() {
  // the reference file when present, otherwise a generated set of the same size and dimension
  const auto t710 = data_dir() / "t7.10k.dat";
  Dataset<double> ds;
  std::string source;
  if (fs::exists(t710)) {
    ds = load_points_csv(t710);
    source = "T710";
  } else {
    testing::Rng rng(710);
    ds.points.resize(10000, 2);
    const double c[4][3] = {{0, 0, 0.4}, {8, 0, 0.4}, {4, 12, 1.5}, {16, 10, 2.5}};
    for (Index i = 0; i < 10000; ++i) {
      const auto& b = c[i % 4];
      ds.points(i, 0) = b[0] + b[2] * rng.normal();
      ds.points(i, 1) = b[1] + b[2] * rng.normal();
    }
    source = "generated stand-in (t7.10k.dat absent)";
  }

  const auto start = std::chrono::steady_clock::now();
  const auto cd = pairwise_distances(ds);
  // delta_t admits the 20 largest deltas as representatives
  const auto p = density_profile(cd, 2);
  std::vector<double> deltas(p.delta.data(), p.delta.data() + p.delta.size());
  std::nth_element(deltas.begin(), deltas.begin() + 19, deltas.end(), std::greater<>());
  const auto res = vdpc_run(cd, VdpcParams<double>{2, deltas[19], 10});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const bool ok = secs < 300 && static_cast<Index>(res.labels.assign.size()) == ds.size() && !res.labels.has_noise();
  return {ok ? Status::Pass : Status::Fail, source + ": N=" + std::to_string(ds.size()) + " numl=" +
                                                std::to_string(res.levels.numl()) + " clusters=" +
                                                std::to_string(res.labels.k) + " in " + fmt(secs) + "s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Verdict (*)()>> criteria{
      {"1 VDPC reference scores on the six synthetic sets", criterion_table4},
      {"2 Compound level structure", criterion_compound_structure},
      {"3 num sensitivity", criterion_num_sensitivity},
      {"4 level algorithm combinations", criterion_combinations},
      {"5 DBSCAN and DPC spot checks", criterion_baselines},
      {"6 oracle equivalence", criterion_oracles},
      {"7 determinism and invariances", criterion_invariances},
      {"8 10k-point pipeline under 5 minutes", criterion_scale},
  };
  int failed = 0, blocked_count = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {Status::Fail, std::string("threw: ") + e.what()};
    }
    const char* tag = v.status == Status::Pass ? "PASS" : v.status == Status::Fail ? "FAIL" : "BLOCKED";
    std::cout << tag << "  " << name << ": " << v.detail << std::endl;
    failed += v.status == Status::Fail;
    blocked_count += v.status == Status::Blocked;
  }
  if (failed) return 1;
  return blocked_count ? 77 : 0;
}
