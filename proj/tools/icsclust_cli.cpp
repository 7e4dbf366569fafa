// Command-line front end: data simulation, ICS/PCA reduction, component
// selection, clustering, metric evaluation, single pipeline runs, and the
// seeded Monte Carlo experiment grid.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icsclust/icsclust.hpp"

namespace {

using namespace icsclust;

struct InputArgs {
  std::string path;
  std::string label_column;
  std::string setting;
  std::uint64_t seed = 1;
};

/// Loads either a CSV (--input) or a generated setting (--setting).
std::pair<Matrix, std::optional<Labels>> load_input(const InputArgs& args) {
  if (!args.setting.empty()) {
    auto [X, y] = generate_setting(parse_setting_spec(args.setting), args.seed);
    return {std::move(X), std::move(y)};
  }
  if (args.path == "iris") {
    auto [X, y] = iris();
    return {std::move(X), std::move(y)};
  }
  CsvData data = read_csv(args.path, args.label_column);
  return {std::move(data.values), std::move(data.labels)};
}

std::vector<std::string> score_columns(Eigen::Index d, const char* prefix) {
  std::vector<std::string> cols;
  for (Eigen::Index j = 0; j < d; ++j) cols.push_back(prefix + std::to_string(j + 1));
  return cols;
}

void add_input_options(CLI::App* cmd, InputArgs& args, bool need_data = true) {
  auto* in = cmd->add_option("--input", args.path, "input CSV path (or 'iris')");
  auto* st = cmd->add_option("--setting", args.setting,
                             "generate data from a setting spec instead of reading a file");
  cmd->add_option("--label-column", args.label_column, "name of the label column in the CSV");
  cmd->add_option("--seed", args.seed, "RNG seed");
  if (need_data) {
    in->excludes(st);
    st->excludes(in);
  }
}

void require_input(const InputArgs& args) {
  if (args.path.empty() && args.setting.empty())
    throw validation_error("one of --input or --setting is required");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Tandem clustering with invariant coordinate selection"};
  app.require_subcommand(1);

  // ---- simulate ----
  InputArgs sim_args;
  std::string sim_output;
  auto* sim = app.add_subcommand("simulate", "generate a data set from a setting spec");
  sim->add_option("--setting", sim_args.setting, "e.g. mix:10:50-50:delta10, bwheel:d3, "
                  "mix:10:90-10:delta10+outliers:0.05")->required();
  sim->add_option("--seed", sim_args.seed, "RNG seed");
  sim->add_option("--output", sim_output, "output CSV path")->required();

  // ---- ics ----
  InputArgs ics_args;
  std::string ics_pair = "tcov:2,cov";
  std::string ics_output;
  auto* ics_cmd = app.add_subcommand("ics", "invariant coordinates for a scatter pair");
  add_input_options(ics_cmd, ics_args);
  ics_cmd->add_option("--pair", ics_pair, "scatter pair, e.g. tcov:2,cov")->required();
  ics_cmd->add_option("--output", ics_output, "write scores CSV here");

  // ---- pca ----
  InputArgs pca_args;
  std::string pca_scatter = "cov";
  std::string pca_output;
  auto* pca_cmd = app.add_subcommand("pca", "correlation-matrix PCA baseline");
  add_input_options(pca_cmd, pca_args);
  pca_cmd->add_option("--scatter", pca_scatter, "cov or rmcdALPHA (e.g. rmcd0.75)");
  pca_cmd->add_option("--output", pca_output, "write scores CSV here");

  // ---- select ----
  InputArgs sel_args;
  std::string sel_pair = "tcov:2,cov";
  std::string sel_criterion = "med";
  int sel_k = 2;
  auto* sel_cmd = app.add_subcommand("select", "run ICS and report the retained components");
  add_input_options(sel_cmd, sel_args);
  sel_cmd->add_option("--pair", sel_pair, "scatter pair");
  sel_cmd->add_option("--criterion", sel_criterion, "med | var | normal:LEVEL | oracle");
  sel_cmd->add_option("--k", sel_k, "cluster count for med/var/oracle");

  // ---- cluster ----
  InputArgs clu_args;
  std::string clu_method = "kmeans";
  std::string clu_output;
  int clu_k = 2;
  auto* clu_cmd = app.add_subcommand("cluster", "cluster rows of a data set");
  add_input_options(clu_cmd, clu_args);
  clu_cmd->add_option("--method", clu_method, "kmeans | pam | tkmeans:TRIM | gmm | gmm-noise");
  clu_cmd->add_option("--k", clu_k, "number of clusters")->required();
  clu_cmd->add_option("--output", clu_output, "write per-row cluster labels here");

  // ---- evaluate ----
  InputArgs eval_args;
  std::string eval_pred;
  auto* eval_cmd = app.add_subcommand("evaluate", "ARI and discriminatory power of labelings");
  add_input_options(eval_cmd, eval_args);
  eval_cmd->add_option("--pred", eval_pred, "CSV with a 'cluster' column of predicted labels")
      ->required();

  // ---- run ----
  InputArgs run_args;
  std::string run_method = "none";
  std::string run_clusterer_arg = "kmeans";
  std::string run_output;
  int run_k = 2;
  auto* run_cmd = app.add_subcommand("run", "one reduce-select-cluster-evaluate pipeline");
  add_input_options(run_cmd, run_args);
  run_cmd->add_option("--method", run_method,
                      "none | 'ics V1,V2 CRITERION' | pca:SCATTER:CRITERION");
  run_cmd->add_option("--clusterer", run_clusterer_arg, "clustering method spec");
  run_cmd->add_option("--k", run_k, "number of clusters")->required();
  run_cmd->add_option("--output", run_output, "append the record to this CSV");

  // ---- experiment ----
  std::string exp_config;
  std::string exp_output;
  int exp_threads = 1;
  std::uint64_t exp_seed = 0;
  bool exp_seed_set = false;
  auto* exp_cmd = app.add_subcommand("experiment", "run a Monte Carlo experiment grid");
  exp_cmd->add_option("--config", exp_config, "experiment config file")->required();
  exp_cmd->add_option("--output", exp_output, "records CSV (overrides the config's output)");
  exp_cmd->add_option("--threads", exp_threads, "worker threads");
  exp_cmd->add_option("--seed", exp_seed, "override the config's base_seed")
      ->each([&](const std::string&) { exp_seed_set = true; });

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    auto [X, y] = generate_setting(parse_setting_spec(sim_args.setting), sim_args.seed);
    write_csv(sim_output, X, score_columns(X.cols(), "x"), &y);
    std::printf("wrote %ld x %ld + labels to %s\n", static_cast<long>(X.rows()),
                static_cast<long>(X.cols()), sim_output.c_str());
    return 0;
  }

  if (ics_cmd->parsed()) {
    require_input(ics_args);
    auto [X, y] = load_input(ics_args);
    const auto pair = detail::split(ics_pair, ',');
    if (pair.size() != 2) throw parse_error("--pair must be 'V1,V2'");
    const auto v1 = compute_scatter(X, parse_scatter_spec(pair[0]),
                                    derive_seed(ics_args.seed, "v1"));
    const auto v2 = compute_scatter(X, parse_scatter_spec(pair[1]),
                                    derive_seed(ics_args.seed, "v2"));
    const IcsResult result = ics(X, v1, v2);
    std::printf("pair %s\ngeneralized eigenvalues:", result.pair_id.c_str());
    for (Eigen::Index j = 0; j < result.eigenvalues.size(); ++j)
      std::printf(" %.6g", result.eigenvalues(j));
    std::printf("\n");
    if (!ics_output.empty()) {
      write_csv(ics_output, result.scores, score_columns(result.scores.cols(), "ic"),
                y ? &*y : nullptr);
      std::printf("scores written to %s\n", ics_output.c_str());
    }
    return 0;
  }

  if (pca_cmd->parsed()) {
    require_input(pca_args);
    auto [X, y] = load_input(pca_args);
    ScatterEstimate scatter;
    if (pca_scatter == "cov") {
      scatter = cov(X);
    } else if (pca_scatter.rfind("rmcd", 0) == 0) {
      const std::string alpha = pca_scatter.substr(4);
      scatter = rmcd(X, alpha.empty() ? 0.75 : detail::parse_number(alpha, "--scatter"), 500,
                     derive_seed(pca_args.seed, "pca"));
    } else {
      throw parse_error("--scatter must be cov or rmcdALPHA");
    }
    const PcaResult result = pca(X, scatter);
    std::printf("scatter %s\neigenvalues:", result.scatter_id.c_str());
    for (Eigen::Index j = 0; j < result.eigenvalues.size(); ++j)
      std::printf(" %.6g", result.eigenvalues(j));
    std::printf("\n");
    if (!pca_output.empty()) {
      write_csv(pca_output, result.scores, score_columns(result.scores.cols(), "pc"),
                y ? &*y : nullptr);
      std::printf("scores written to %s\n", pca_output.c_str());
    }
    return 0;
  }

  if (sel_cmd->parsed()) {
    require_input(sel_args);
    auto [X, y] = load_input(sel_args);
    const auto pair = detail::split(sel_pair, ',');
    if (pair.size() != 2) throw parse_error("--pair must be 'V1,V2'");
    const auto v1 = compute_scatter(X, parse_scatter_spec(pair[0]),
                                    derive_seed(sel_args.seed, "v1"));
    const auto v2 = compute_scatter(X, parse_scatter_spec(pair[1]),
                                    derive_seed(sel_args.seed, "v2"));
    const IcsResult result = ics(X, v1, v2);
    const CriterionSpec criterion = parse_criterion_spec(sel_criterion);
    SelectionResult selection;
    switch (criterion.kind) {
      case CriterionSpec::Kind::med:
        selection = med_select(result.eigenvalues, sel_k);
        break;
      case CriterionSpec::Kind::var:
        selection = var_select(result.eigenvalues, sel_k);
        break;
      case CriterionSpec::Kind::normal:
        selection = normal_select(result.scores, criterion.level);
        break;
      case CriterionSpec::Kind::oracle:
        if (!y) throw validation_error("oracle criterion requires labeled input");
        selection = oracle_select(result.scores, *y, sel_k);
        break;
    }
    std::printf("criterion %s selected: %s\n", selection.criterion_id.c_str(),
                selection.indices.empty() ? "(none)" : join_indices(selection.indices).c_str());
    std::printf("diagnostics:");
    for (double v : selection.diagnostics) std::printf(" %.6g", v);
    std::printf("\n");
    return 0;
  }

  if (clu_cmd->parsed()) {
    require_input(clu_args);
    auto [X, y] = load_input(clu_args);
    const ClusterResult result =
        run_clusterer(X, parse_clusterer_spec(clu_method), clu_k, clu_args.seed);
    std::printf("%s: objective %.6g, %d iterations%s\n", result.method_id.c_str(),
                result.objective, result.iterations,
                result.converged ? "" : " (not converged)");
    if (y) std::printf("ARI vs labels: %.6g\n", ari(*y, result.labels));
    if (!clu_output.empty()) {
      Matrix empty(static_cast<Eigen::Index>(result.labels.size()), 0);
      write_csv(clu_output, empty, {}, &result.labels, "cluster");
      std::printf("labels written to %s\n", clu_output.c_str());
    }
    return 0;
  }

  if (eval_cmd->parsed()) {
    require_input(eval_args);
    auto [X, y] = load_input(eval_args);
    if (!y) throw validation_error("evaluate needs --label-column (or a labeled setting)");
    CsvData pred = read_csv(eval_pred, "cluster");
    if (!pred.labels) throw parse_error("--pred file needs a 'cluster' column");
    std::printf("ari = %.6g\n", ari(*y, *pred.labels));
    std::printf("eta2 (true labels) = %.6g\n", eta2(X, *y));
    std::printf("eta2 (predicted)   = %.6g\n", eta2(X, *pred.labels));
    return 0;
  }

  if (run_cmd->parsed()) {
    require_input(run_args);
    auto [X, y] = load_input(run_args);
    const ExperimentRecord rec =
        run_pipeline(X, y ? &*y : nullptr, parse_method_spec(run_method),
                     parse_clusterer_spec(run_clusterer_arg), run_k, run_args.seed);
    std::printf("method=%s clusterer=%s selected=%s eta2=%.6g ari=%.6g wall_ms=%.1f%s%s\n",
                rec.method_id.c_str(), rec.clusterer_id.c_str(),
                rec.selected.empty() ? "-" : join_indices(rec.selected).c_str(), rec.eta2,
                rec.ari, rec.wall_ms, rec.failure.empty() ? "" : " failure=",
                rec.failure.c_str());
    if (!run_output.empty()) write_records_csv(run_output, {rec});
    if (!rec.failure.empty()) return 1;
    return 0;
  }

  if (exp_cmd->parsed()) {
    ExperimentConfig config = parse_config_file(exp_config);
    if (!exp_output.empty()) config.output = exp_output;
    if (exp_seed_set) config.base_seed = exp_seed;
    const auto records = run_experiment(config, exp_threads);
    write_records_csv(config.output, records);
    const std::string summary_path =
        config.output.size() > 4 && config.output.substr(config.output.size() - 4) == ".csv"
            ? config.output.substr(0, config.output.size() - 4) + "_summary.csv"
            : config.output + "_summary.csv";
    write_summary_csv(summary_path, records);
    std::size_t failed = 0;
    for (const auto& r : records)
      if (!r.ok()) ++failed;
    std::printf("%zu records (%zu failed) -> %s, summary -> %s\n", records.size(), failed,
                config.output.c_str(), summary_path.c_str());
    if (failed == records.size()) return 2;
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const icsclust::validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const icsclust::parse_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
