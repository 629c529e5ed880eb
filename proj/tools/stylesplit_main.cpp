// stylesplit command line: synthetic cohorts, partition search, grid runs
// and F/G correlation studies.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "stylesplit/harness.hpp"
#include "stylesplit/report.hpp"

namespace fs = std::filesystem;
using namespace stylesplit;

namespace {

nlohmann::json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

struct GaOverrides {
  std::optional<int> budget;
  std::optional<int> warmup;
  std::optional<std::uint64_t> seed;
  std::optional<int> population;
  std::optional<std::string> surrogate;

  void add_to(CLI::App* app) {
    app->add_option("--budget", budget, "Maximum true objective evaluations");
    app->add_option("--warmup", warmup, "Random warm-up evaluations");
    app->add_option("--population", population, "GA population size");
    app->add_option("--surrogate", surrogate, "hamming-knn or off")->check(CLI::IsMember({"hamming-knn", "off"}));
  }
  void apply(GAConfig& ga) const {
    if (budget) ga.max_true_evaluations = *budget;
    if (warmup) ga.warmup_evaluations = *warmup;
    if (population) ga.population_size = *population;
    if (surrogate) ga.surrogate.enabled = *surrogate != "off";
    if (warmup && !budget && ga.max_true_evaluations < ga.warmup_evaluations)
      ga.max_true_evaluations = ga.warmup_evaluations;
    ga.validate();
  }
};

int cmd_synth(std::uint64_t seed, const std::string& styles, const std::string& layout, const fs::path& out,
              const std::optional<fs::path>& config) {
  ExperimentConfig cfg;
  if (config) cfg = ExperimentConfig::from_json(load_json(*config));
  cfg.seed = seed;
  cfg.styles = parse_style_list(styles);
  cfg.layout = layout;
  cfg.validate();
  const auto cohort = build_experiment_cohort(cfg.seed, cfg.styles, CohortLayout::parse(cfg.layout), cfg.phantom);
  write_cohort(out, cohort);
  std::cout << "wrote " << cohort.scans.size() << " scans (" << cohort.optimize_ids.size() << " to optimise) to "
            << out << "\n";
  return 0;
}

int cmd_partition(const fs::path& cohort_dir, const fs::path& out, const GaOverrides& ga_over,
                  const std::optional<fs::path>& config) {
  ExperimentConfig cfg;
  if (config) cfg = ExperimentConfig::from_json(load_json(*config));
  if (ga_over.seed) cfg.ga.seed = *ga_over.seed;
  ga_over.apply(cfg.ga);

  auto cohort = read_cohort(cohort_dir);
  const auto styles = cohort.specs.size();
  const auto prep = prepare_experiment(std::move(cohort), cfg.learner, cfg.metric);

  RecursiveConfig rc;
  rc.min_group = cfg.min_group;
  rc.min_improvement = cfg.min_improvement;
  rc.expected_groups = cfg.expected_groups > 0 ? cfg.expected_groups : static_cast<int>(styles);
  rc.ga = cfg.ga;

  nlohmann::json run{{"config", cfg.to_json()}, {"cohort", cohort_dir.string()}};
  std::vector<nlohmann::json> evals;
  std::vector<std::vector<std::size_t>> groups;
  if (styles > 2) {
    const auto tree = recursive_partition(prep->scans, *prep->learner, rc);
    run["tree"] = tree->to_json();
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < prep->scans.size(); ++i) position[prep->scans[i]->id()] = i;
    for (const auto* leaf : leaves(*tree)) {
      std::vector<std::size_t> idx;
      for (const auto& id : leaf->scan_ids) idx.push_back(position.at(id));
      groups.push_back(idx);
    }
    std::vector<const PartitionTreeNode*> queue{tree.get()};
    for (std::size_t n = 0; n < queue.size(); ++n) {
      for (const auto& rec : queue[n]->log) {
        auto j = rec.to_json(cfg.ga.seed + n);
        j["node"] = n;
        evals.push_back(j);
      }
      for (const auto& c : queue[n]->children) queue.push_back(c.get());
    }
  } else {
    const auto baseline = compute_baseline(prep->scans, *prep->learner);
    PartitionEvaluator evaluator(prep->scans, *prep->learner, baseline);
    const auto result = optimize_partition(evaluator, cfg.ga);
    for (const auto& rec : result.log) evals.push_back(rec.to_json(cfg.ga.seed));
    groups = {result.best.group(0), result.best.group(1)};
    run["best"] = {{"bits", result.best.to_string()}, {"G", result.best_value}};
    run["true_evaluations"] = result.true_evaluations;
    run["stop_reason"] = result.stop_reason;
    run["mixture_sdsc"] = baseline.mean_sdsc();
    // Without a split decision the tree is the root plus the two found groups.
    nlohmann::json tree{{"scan_ids", prep->cohort.optimize_ids}, {"decision", result.best.to_string()},
                        {"children", nlohmann::json::array()}};
    for (const auto& g : groups) {
      std::vector<std::string> ids;
      for (auto i : g) ids.push_back(prep->scans[i]->id());
      tree["children"].push_back({{"scan_ids", ids}, {"children", nlohmann::json::array()}});
    }
    run["tree"] = tree;
  }
  run["evaluations"] = evals;
  std::set<int> distinct(prep->labels.begin(), prep->labels.end());
  if (distinct.size() == groups.size()) run["misclassified"] = misclassification(groups, prep->labels);
  write_file(out, run.dump(2) + "\n");
  write_file(out.parent_path() / "evals.jsonl", render_jsonl(evals));
  std::cout << "groups: " << groups.size();
  if (run.contains("misclassified")) std::cout << ", misclassified: " << run["misclassified"];
  std::cout << "\nwrote " << out << "\n";
  return 0;
}

int cmd_grid(const std::optional<fs::path>& config, std::optional<std::uint64_t> seed, const GaOverrides& ga_over,
             const std::vector<int>& only_rows, const fs::path& out) {
  auto rows = config ? grid_from_json(load_json(*config)) : default_grid(seed.value_or(1));
  if (config && seed) {
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].seed = rows[i].ga.seed = *seed + i;
  }
  for (auto& r : rows) ga_over.apply(r.ga);
  if (!only_rows.empty()) {
    std::vector<ExperimentConfig> picked;
    for (int i : only_rows) {
      if (i < 0 || i >= static_cast<int>(rows.size())) throw ConfigError("row index out of range");
      picked.push_back(rows[static_cast<std::size_t>(i)]);
    }
    rows = picked;
  }
  fs::create_directories(out);
  write_file(out / "config.json", grid_to_json(rows).dump(2) + "\n");
  const auto reports = run_grid(rows, out);
  std::cout << render_report(reports).markdown;
  return 0;
}

int cmd_correlate(const std::optional<fs::path>& config, std::optional<std::uint64_t> seed, const fs::path& out) {
  ExperimentConfig cfg;
  if (config) cfg = ExperimentConfig::from_json(load_json(*config));
  cfg.kind = ExperimentKind::kCorrelation;
  if (seed) cfg.seed = *seed;
  cfg.validate();
  const auto report = run_correlation(cfg);
  fs::create_directories(out);
  const auto cohort = build_experiment_cohort(cfg.seed, cfg.styles, CohortLayout::parse(cfg.layout), cfg.phantom);
  write_file(out / "cohort.json", nlohmann::json{{"config", cfg.to_json()}, {"cohort", cohort_manifest(cohort)}}.dump(2) + "\n");
  write_file(out / "correlation.csv", render_correlation_csv(report));
  write_file(out / "correlation.json", report.to_json().dump(2) + "\n");
  write_file(out / "evals.jsonl", render_jsonl(report.evaluations));
  write_file(out / "correlation.md", render_correlation_markdown(report));
  std::cout << render_correlation_markdown(report);
  return 0;
}

int cmd_report(const fs::path& run) {
  std::string md;
  if (fs::exists(run / "grid.json")) {
    std::vector<GridRowReport> rows;
    for (const auto& j : load_json(run / "grid.json")) rows.push_back(GridRowReport::from_json(j));
    md += render_report(rows).markdown;
  }
  if (fs::exists(run / "correlation.json")) {
    const auto j = load_json(run / "correlation.json");
    CorrelationReport c;
    c.rho = j.at("rho").get<double>();
    for (const auto& p : j.at("points"))
      c.points.push_back({p.at("distance").get<int>(), Partition::from_string(p.at("bits").get<std::string>()),
                          p.at("F").get<double>(), p.at("G").get<double>(), p.at("optimum").get<bool>()});
    md += (md.empty() ? "" : "\n") + render_correlation_markdown(c);
  }
  if (md.empty()) throw IoError("no grid.json or correlation.json in " + run.string());
  write_file(run / "report.md", md);
  std::cout << md;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Style-aware partitioning of segmentation cohorts"};
  app.require_subcommand(1);

  std::uint64_t synth_seed = 1;
  std::string styles = "erosion:10:4,dilation:10:4", layout = "two-style";
  fs::path synth_out;
  std::optional<fs::path> synth_config;
  auto* synth = app.add_subcommand("synth", "Generate a styled phantom cohort");
  synth->add_option("--seed", synth_seed, "Cohort seed");
  synth->add_option("--styles", styles, "Comma-separated op:mean:std list");
  synth->add_option("--layout", layout, "two-style, three-style or one-style");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--config", synth_config, "Experiment JSON (phantom settings)");

  fs::path cohort_dir, run_out = "run.json";
  std::optional<fs::path> part_config;
  GaOverrides part_ga;
  auto* part = app.add_subcommand("partition", "Search a split of a cohort's optimisation scans");
  part->add_option("--cohort", cohort_dir, "Cohort directory written by synth")->required();
  part->add_option("--seed", part_ga.seed, "GA seed");
  part->add_option("--out", run_out, "Run JSON path");
  part->add_option("--config", part_config, "Experiment JSON");
  part_ga.add_to(part);

  std::optional<fs::path> grid_config;
  std::optional<std::uint64_t> grid_seed;
  std::vector<int> grid_rows;
  fs::path grid_out = "run";
  GaOverrides grid_ga;
  auto* grid = app.add_subcommand("grid", "Run the variation grid");
  grid->add_option("--config", grid_config, "Grid JSON {\"rows\": [...]}; defaults to the nine standard rows");
  grid->add_option("--seed", grid_seed, "Base seed; row i uses seed + i");
  grid->add_option("--rows", grid_rows, "Run only these row indices");
  grid->add_option("--out", grid_out, "Run directory");
  grid_ga.add_to(grid);

  std::optional<fs::path> corr_config;
  std::optional<std::uint64_t> corr_seed;
  fs::path corr_out = "run";
  auto* corr = app.add_subcommand("correlate", "F/G correlation over a Hamming sample around the true split");
  corr->add_option("--config", corr_config, "Experiment JSON");
  corr->add_option("--seed", corr_seed, "Cohort seed");
  corr->add_option("--out", corr_out, "Run directory");

  fs::path report_dir;
  auto* rep = app.add_subcommand("report", "Re-render report.md from a run directory");
  rep->add_option("--run", report_dir, "Run directory")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*synth) return cmd_synth(synth_seed, styles, layout, synth_out, synth_config);
    if (*part) return cmd_partition(cohort_dir, run_out, part_ga, part_config);
    if (*grid) return cmd_grid(grid_config, grid_seed, grid_ga, grid_rows, grid_out);
    if (*corr) return cmd_correlate(corr_config, corr_seed, corr_out);
    if (*rep) return cmd_report(report_dir);
  } catch (const std::exception& e) {
    std::cerr << "stylesplit: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
