#ifndef ICSCLUST_PIPELINE_HPP
#define ICSCLUST_PIPELINE_HPP

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "icsclust/csv.hpp"
#include "icsclust/ics.hpp"
#include "icsclust/metrics.hpp"
#include "icsclust/pca.hpp"
#include "icsclust/select.hpp"
#include "icsclust/specs.hpp"

#ifdef ICSCLUST_AUDIT
#include <cassert>
#endif

namespace icsclust {

/// One Monte Carlo cell result. eta2/ari are NaN when `failure` is set.
struct ExperimentRecord {
  std::string setting_id;
  std::string method_id;
  std::string clusterer_id;
  int replicate = 0;
  std::uint64_t seed = 0;
  std::vector<int> selected;
  double eta2 = std::numeric_limits<double>::quiet_NaN();
  double ari = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
  std::string failure;

  bool ok() const { return failure.empty(); }
};

namespace detail {

struct Reduced {
  Matrix Y;
  std::vector<int> selected;
};

inline Reduced reduce(const Matrix& X, const Labels* truth, const MethodSpec& method,
                      const ClustererSpec& clusterer, int k, std::uint64_t seed) {
  Reduced out;
  switch (method.kind) {
    case MethodSpec::Kind::none: {
      const bool robust = clusterer.kind == ClustererSpec::Kind::pam ||
                          clusterer.kind == ClustererSpec::Kind::tkmeans;
      out.Y = standardize(X, robust);
      return out;
    }
    case MethodSpec::Kind::ics: {
      const ScatterEstimate v1 = compute_scatter(X, method.v1, derive_seed(seed, "v1"));
      const ScatterEstimate v2 = compute_scatter(X, method.v2, derive_seed(seed, "v2"));
      const IcsResult result = ics(X, v1, v2);
      SelectionResult sel;
      switch (method.criterion.kind) {
        case CriterionSpec::Kind::med:
          sel = med_select(result.eigenvalues, k);
          break;
        case CriterionSpec::Kind::var:
          sel = var_select(result.eigenvalues, k);
          break;
        case CriterionSpec::Kind::normal:
          sel = normal_select(result.scores, method.criterion.level);
          break;
        case CriterionSpec::Kind::oracle:
          if (truth == nullptr)
            throw validation_error("oracle criterion requires true labels");
          sel = oracle_select(result.scores, *truth, k);
          break;
      }
#ifdef ICSCLUST_AUDIT
      // the oracle eta2 upper-bounds any k-1 end-selection on these scores
      if (truth != nullptr && !sel.indices.empty() &&
          static_cast<int>(sel.indices.size()) == k - 1 &&
          (method.criterion.kind == CriterionSpec::Kind::med ||
           method.criterion.kind == CriterionSpec::Kind::var)) {
        try {
          const double ours = eta2(project(result, sel.indices), *truth);
          const double oracle =
              eta2(project(result, oracle_select(result.scores, *truth, k).indices), *truth);
          const bool end_selection = [&] {
            const int d = static_cast<int>(result.eigenvalues.size());
            for (std::size_t i = 0; i < sel.indices.size(); ++i) {
              const int idx = sel.indices[i];
              const int tail = static_cast<int>(sel.indices.size()) - static_cast<int>(i);
              if (idx != static_cast<int>(i) + 1 && idx != d - tail + 1) return false;
            }
            return true;
          }();
          assert(!end_selection || oracle >= ours - 1e-9);
        } catch (const error&) {
        }
      }
#endif
      out.selected = sel.indices;
      if (out.selected.empty()) return out;  // empty normal selection, caller records failure
      out.Y = project(result, out.selected);
      return out;
    }
    case MethodSpec::Kind::pca: {
      const ScatterEstimate scatter =
          compute_scatter(X, method.pca_scatter, derive_seed(seed, "pca"));
      const PcaResult result = pca(X, scatter);
      out.selected =
          method.pca_pct ? select_pct(result, method.pca_threshold) : select_k_minus_1(result, k);
      Matrix Y(result.scores.rows(), static_cast<Eigen::Index>(out.selected.size()));
      for (std::size_t j = 0; j < out.selected.size(); ++j)
        Y.col(static_cast<Eigen::Index>(j)) = result.scores.col(out.selected[j] - 1);
      out.Y = std::move(Y);
      return out;
    }
  }
  throw validation_error("unreachable method kind");
}

}  // namespace detail

/// Reduce -> select -> cluster -> evaluate on one data set. Stage errors
/// land in the record's failure field; the caller's grid keeps running.
inline ExperimentRecord run_pipeline(const Matrix& X, const Labels* truth,
                                     const MethodSpec& method, const ClustererSpec& clusterer,
                                     int k, std::uint64_t seed) {
  if (k < 2) throw validation_error("run_pipeline: k must be >= 2");
  ExperimentRecord rec;
  rec.method_id = method.id;
  rec.clusterer_id = clusterer.id;
  rec.seed = seed;
  const auto started = std::chrono::steady_clock::now();
  try {
    validate_data(X);
    if (truth != nullptr) validate_labels(*truth, X.rows());
    detail::Reduced reduced = detail::reduce(X, truth, method, clusterer, k, seed);
    rec.selected = reduced.selected;
    if (method.kind == MethodSpec::Kind::ics && reduced.selected.empty()) {
      rec.failure = "empty-selection";
    } else {
      const ClusterResult clustering =
          run_clusterer(reduced.Y, clusterer, k, derive_seed(seed, "cluster"));
      if (truth != nullptr) {
        rec.eta2 = eta2(reduced.Y, *truth);
        rec.ari = ari(*truth, clustering.labels);
      }
    }
  } catch (const error& e) {
    rec.failure = e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - started)
                    .count();
  return rec;
}

/// The full Monte Carlo grid: settings x methods x clusterers x replicates.
struct ExperimentConfig {
  std::vector<SettingSpec> settings;
  std::vector<MethodSpec> methods;
  std::vector<ClustererSpec> clusterers;
  int replications = 1;
  std::uint64_t base_seed = 1;
  std::string output = "records.csv";

  void validate() const {
    if (settings.empty() || methods.empty() || clusterers.empty())
      throw validation_error("experiment config: settings, methods and clusterers "
                             "must all be nonempty");
    if (replications < 1)
      throw validation_error("experiment config: replications must be >= 1");
  }
};

/// Key-value config text: 'setting = ...', 'method = ...', 'clusterer = ...'
/// lines may repeat; 'replications', 'base_seed' and 'output' take one
/// value. '#' starts a comment.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig config;
  config.replications = 0;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw parse_error("config line " + std::to_string(line_no) + ": expected KEY = VALUE");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty())
      throw parse_error("config line " + std::to_string(line_no) + ": empty value");
    if (key == "setting") {
      config.settings.push_back(parse_setting_spec(value));
    } else if (key == "method") {
      config.methods.push_back(parse_method_spec(value));
    } else if (key == "clusterer") {
      config.clusterers.push_back(parse_clusterer_spec(value));
    } else if (key == "replications") {
      config.replications = detail::parse_int(value, "config replications");
    } else if (key == "base_seed") {
      config.base_seed = static_cast<std::uint64_t>(
          detail::parse_number(value, "config base_seed"));
    } else if (key == "output") {
      config.output = value;
    } else {
      throw parse_error("config line " + std::to_string(line_no) + ": unknown key '" + key +
                        "'");
    }
  }
  if (config.replications == 0) config.replications = 1;
  config.validate();
  return config;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open config '" + path + "'");
  return parse_config(in);
}

/// Cell seed: base_seed xor a stable hash of (setting id, replicate), so
/// every method and clusterer sees the same data for a given cell.
inline std::uint64_t cell_seed(const ExperimentConfig& config, const SettingSpec& setting,
                               int replicate) {
  return config.base_seed ^
         hash_tag(setting.id + "#" + std::to_string(replicate));
}

/// Runs the full grid, parallelized over (setting, replicate, method)
/// tasks with clusterers sharing the reduction inside a task. Results are
/// deterministic for a given config regardless of the worker count.
inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& config,
                                                    int threads = 1) {
  config.validate();
  if (threads < 1) threads = 1;

  struct Task {
    std::size_t setting;
    int replicate;
    std::size_t method;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < config.settings.size(); ++s)
    for (int r = 0; r < config.replications; ++r)
      for (std::size_t m = 0; m < config.methods.size(); ++m)
        tasks.push_back({s, r, m});

  const std::size_t n_clusterers = config.clusterers.size();
  std::vector<ExperimentRecord> records(tasks.size() * n_clusterers);

  auto run_task = [&](std::size_t t) {
    const Task& task = tasks[t];
    const SettingSpec& setting = config.settings[task.setting];
    const MethodSpec& method = config.methods[task.method];
    const std::uint64_t seed = cell_seed(config, setting, task.replicate);
    Matrix X;
    Labels truth;
    std::string generation_failure;
    try {
      auto data = generate_setting(setting, seed);
      X = std::move(data.first);
      truth = std::move(data.second);
    } catch (const error& e) {
      generation_failure = e.what();
    }
    for (std::size_t c = 0; c < n_clusterers; ++c) {
      ExperimentRecord rec;
      if (generation_failure.empty()) {
        rec = run_pipeline(X, &truth, method, config.clusterers[c], setting.true_clusters(),
                           derive_seed(seed, method.id));
      } else {
        rec.method_id = method.id;
        rec.clusterer_id = config.clusterers[c].id;
        rec.failure = generation_failure;
      }
      rec.setting_id = setting.id;
      rec.replicate = task.replicate;
      rec.seed = seed;
      records[t * n_clusterers + c] = std::move(rec);
    }
  };

  if (threads == 1 || tasks.size() <= 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), tasks.size());
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t t = next.fetch_add(1);
          if (t >= tasks.size()) return;
          run_task(t);
        }
      });
    for (auto& th : pool) th.join();
  }
  return records;
}

inline std::string join_indices(const std::vector<int>& indices) {
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out += '+';
    out += std::to_string(indices[i]);
  }
  return out;
}

inline void write_records_csv(const std::string& path,
                              const std::vector<ExperimentRecord>& records) {
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << "setting,method,clusterer,replicate,seed,selected,eta2,ari,wall_ms,failure\n";
  for (const auto& r : records) {
    out << '"' << r.setting_id << "\",\"" << r.method_id << "\",\"" << r.clusterer_id << "\","
        << r.replicate << ',' << r.seed << ',' << join_indices(r.selected) << ',';
    if (std::isnan(r.eta2))
      out << ',';
    else
      out << detail::format_full(r.eta2) << ',';
    if (std::isnan(r.ari))
      out << ',';
    else
      out << detail::format_full(r.ari) << ',';
    out << detail::format_full(r.wall_ms) << ",\"" << r.failure << "\"\n";
  }
}

struct CellSummary {
  std::string setting_id, method_id, clusterer_id;
  int n_ok = 0, n_failed = 0;
  double eta2_median = std::numeric_limits<double>::quiet_NaN();
  double eta2_q1 = std::numeric_limits<double>::quiet_NaN();
  double eta2_q3 = std::numeric_limits<double>::quiet_NaN();
  double ari_median = std::numeric_limits<double>::quiet_NaN();
  double ari_q1 = std::numeric_limits<double>::quiet_NaN();
  double ari_q3 = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// Linear-interpolation quantile of a sorted vector.
inline double sorted_quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace detail

inline std::vector<CellSummary> summarize_records(const std::vector<ExperimentRecord>& records) {
  std::vector<CellSummary> cells;
  auto find_cell = [&](const ExperimentRecord& r) -> CellSummary& {
    for (auto& c : cells)
      if (c.setting_id == r.setting_id && c.method_id == r.method_id &&
          c.clusterer_id == r.clusterer_id)
        return c;
    cells.push_back({r.setting_id, r.method_id, r.clusterer_id});
    return cells.back();
  };
  std::vector<std::vector<double>> eta_by_cell, ari_by_cell;
  for (const auto& r : records) {
    CellSummary& cell = find_cell(r);
    const auto idx = static_cast<std::size_t>(&cell - cells.data());
    if (idx >= eta_by_cell.size()) {
      eta_by_cell.resize(cells.size());
      ari_by_cell.resize(cells.size());
    }
    if (r.ok()) {
      ++cell.n_ok;
      if (!std::isnan(r.eta2)) eta_by_cell[idx].push_back(r.eta2);
      if (!std::isnan(r.ari)) ari_by_cell[idx].push_back(r.ari);
    } else {
      ++cell.n_failed;
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto& e = eta_by_cell[i];
    auto& a = ari_by_cell[i];
    std::sort(e.begin(), e.end());
    std::sort(a.begin(), a.end());
    if (!e.empty()) {
      cells[i].eta2_median = detail::sorted_quantile(e, 0.5);
      cells[i].eta2_q1 = detail::sorted_quantile(e, 0.25);
      cells[i].eta2_q3 = detail::sorted_quantile(e, 0.75);
    }
    if (!a.empty()) {
      cells[i].ari_median = detail::sorted_quantile(a, 0.5);
      cells[i].ari_q1 = detail::sorted_quantile(a, 0.25);
      cells[i].ari_q3 = detail::sorted_quantile(a, 0.75);
    }
  }
  return cells;
}

inline void write_summary_csv(const std::string& path,
                              const std::vector<ExperimentRecord>& records) {
  const auto cells = summarize_records(records);
  std::ofstream out(path);
  if (!out) throw parse_error("cannot write '" + path + "'");
  out << "setting,method,clusterer,n_ok,n_failed,eta2_q1,eta2_median,eta2_q3,"
         "ari_q1,ari_median,ari_q3\n";
  auto emit = [&](double v) {
    if (std::isnan(v))
      out << ',';
    else
      out << detail::format_full(v) << ',';
  };
  for (const auto& c : cells) {
    out << '"' << c.setting_id << "\",\"" << c.method_id << "\",\"" << c.clusterer_id << "\","
        << c.n_ok << ',' << c.n_failed << ',';
    emit(c.eta2_q1);
    emit(c.eta2_median);
    emit(c.eta2_q3);
    emit(c.ari_q1);
    emit(c.ari_median);
    out << (std::isnan(c.ari_q3) ? "" : detail::format_full(c.ari_q3)) << '\n';
  }
}

}  // namespace icsclust

#endif
