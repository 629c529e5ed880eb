#include "stylesplit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "stylesplit/report.hpp"

namespace stylesplit {

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kGridRow: return "grid-row";
    case ExperimentKind::kCorrelation: return "correlation";
    case ExperimentKind::kRecursive: return "recursive";
  }
  return "?";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  if (text == "grid-row") return ExperimentKind::kGridRow;
  if (text == "correlation") return ExperimentKind::kCorrelation;
  if (text == "recursive") return ExperimentKind::kRecursive;
  throw ConfigError("unknown experiment kind '" + std::string(text) + "'");
}

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

std::string style_list_string(const std::vector<StyleSpec>& styles) {
  std::string s;
  for (const auto& st : styles) s += (s.empty() ? "" : ",") + st.to_string();
  return s;
}

std::string fmt_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string variation_name(const std::vector<StyleSpec>& styles) {
  std::string s;
  for (const auto& st : styles) s += (s.empty() ? "" : "/") + std::string(to_string(st.operation));
  return s;
}

std::string magnitude_name(const std::vector<StyleSpec>& styles) {
  auto one = [](const StyleSpec& st) {
    return "N(" + fmt_number(st.magnitude_mean) + "," + fmt_number(st.magnitude_std) + ")";
  };
  std::set<std::string> distinct;
  for (const auto& st : styles) distinct.insert(one(st));
  if (distinct.size() == 1) return *distinct.begin();
  std::string s;
  for (const auto& st : styles) s += (s.empty() ? "" : "/") + one(st);
  return s;
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

double mean_of(const std::vector<ScorePair>& v, double ScorePair::*field) {
  double s = 0.0;
  for (const auto& x : v) s += x.*field;
  return v.empty() ? 0.0 : s / double(v.size());
}

}  // namespace

nlohmann::json phantom_to_json(const PhantomConfig& cfg) {
  return {{"width", cfg.width},
          {"height", cfg.height},
          {"spacing", {cfg.spacing.x, cfg.spacing.y, cfg.spacing.z}},
          {"slices_per_scan", cfg.slices_per_scan},
          {"blur_sigma", cfg.blur_sigma},
          {"noise_sd", cfg.noise_sd}};
}

PhantomConfig phantom_from_json(const nlohmann::json& j, PhantomConfig d) {
  check_keys(j, {"width", "height", "spacing", "slices_per_scan", "blur_sigma", "noise_sd"}, "phantom");
  d.width = j.value("width", d.width);
  d.height = j.value("height", d.height);
  if (j.contains("spacing")) {
    const auto sp = j.at("spacing").get<std::vector<double>>();
    if (sp.size() != 3) throw ConfigError("phantom spacing needs 3 values");
    d.spacing = {sp[0], sp[1], sp[2]};
  }
  d.slices_per_scan = j.value("slices_per_scan", d.slices_per_scan);
  d.blur_sigma = j.value("blur_sigma", d.blur_sigma);
  d.noise_sd = j.value("noise_sd", d.noise_sd);
  return d;
}

void ExperimentConfig::validate() const {
  try {
    if (styles.empty()) throw ConfigError("at least one style is required");
    for (const auto& s : styles) s.validate();
    const auto lay = CohortLayout::parse(layout);
    if (lay.styles != static_cast<int>(styles.size()))
      throw ConfigError("layout '" + layout + "' expects " + std::to_string(lay.styles) + " styles, got " +
                        std::to_string(styles.size()));
    phantom.validate();
    metric.validate();
    ga.validate();
    if (!LearnerRegistry::instance().contains(learner.kind))
      throw ConfigError("unknown learner kind '" + learner.kind + "'");
    if (min_group < 2) throw ConfigError("min_group must be at least 2");
    if (expected_groups < 0) throw ConfigError("expected_groups must be non-negative");
    if (samples_per_distance < 1 || max_distance < 1) throw ConfigError("correlation sample sizes must be positive");
    if (kind == ExperimentKind::kCorrelation && styles.size() != 2)
      throw ConfigError("the correlation study needs exactly two styles");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"kind", to_string(kind)},
          {"cohort",
           {{"styles", style_list_string(styles)}, {"layout", layout}, {"seed", seed}, {"phantom", phantom_to_json(phantom)}}},
          {"learner", learner.to_json()},
          {"metric", {{"tau_mm", metric.tau_mm}}},
          {"ga", ga.to_json()},
          {"recursive",
           {{"min_group", min_group}, {"min_improvement", min_improvement}, {"expected_groups", expected_groups}}},
          {"correlation", {{"samples_per_distance", samples_per_distance}, {"max_distance", max_distance}}}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    check_keys(j, {"kind", "cohort", "learner", "metric", "ga", "recursive", "correlation"}, "experiment");
    if (j.contains("kind")) c.kind = parse_experiment_kind(j.at("kind").get<std::string>());
    if (j.contains("cohort")) {
      const auto& cj = j.at("cohort");
      check_keys(cj, {"styles", "layout", "seed", "phantom"}, "cohort");
      if (cj.contains("styles")) c.styles = parse_style_list(cj.at("styles").get<std::string>());
      c.layout = cj.value("layout", c.layout);
      c.seed = cj.value("seed", c.seed);
      if (cj.contains("phantom")) c.phantom = phantom_from_json(cj.at("phantom"), c.phantom);
    }
    if (j.contains("learner")) {
      check_keys(j.at("learner"), {"kind", "hyperparams", "pretrain_state"}, "learner");
      c.learner = LearnerSpec::from_json(j.at("learner"));
    }
    if (j.contains("metric")) {
      check_keys(j.at("metric"), {"tau_mm"}, "metric");
      c.metric.tau_mm = j.at("metric").value("tau_mm", c.metric.tau_mm);
    }
    if (j.contains("ga")) {
      check_keys(j.at("ga"), {"population_size", "max_true_evaluations", "warmup_evaluations", "surrogate", "seed",
                              "stall_generations", "batch_size", "guided_moves"},
                 "ga");
      c.ga = GAConfig::from_json(j.at("ga"), c.ga);
    }
    if (j.contains("recursive")) {
      const auto& r = j.at("recursive");
      check_keys(r, {"min_group", "min_improvement", "expected_groups"}, "recursive");
      c.min_group = r.value("min_group", c.min_group);
      c.min_improvement = r.value("min_improvement", c.min_improvement);
      c.expected_groups = r.value("expected_groups", c.expected_groups);
    }
    if (j.contains("correlation")) {
      const auto& r = j.at("correlation");
      check_keys(r, {"samples_per_distance", "max_distance"}, "correlation");
      c.samples_per_distance = r.value("samples_per_distance", c.samples_per_distance);
      c.max_distance = r.value("max_distance", c.max_distance);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

std::vector<ExperimentConfig> default_grid(std::uint64_t seed) {
  using Op = StyleOperation;
  const std::vector<std::pair<Op, Op>> pairs{{Op::kErosion, Op::kDilation},
                                             {Op::kShiftUp, Op::kShiftDown},
                                             {Op::kBottomOver, Op::kBottomUnder},
                                             {Op::kTopOver, Op::kTopUnder}};
  std::vector<ExperimentConfig> rows;
  for (const auto& [a, b] : pairs) {
    for (auto [mean, sd] : {std::pair{10.0, 4.0}, std::pair{5.0, 1.0}}) {
      ExperimentConfig c;
      c.styles = {{a, mean, sd}, {b, mean, sd}};
      rows.push_back(c);
    }
  }
  ExperimentConfig three;
  three.kind = ExperimentKind::kRecursive;
  three.layout = "three-style";
  three.styles = {{Op::kTopOver, 10, 4}, {Op::kTopUnder, 10, 4}, {Op::kBottomUnder, 10, 4}};
  rows.push_back(three);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].seed = seed + i;
    rows[i].ga.seed = seed + i;
  }
  return rows;
}

nlohmann::json grid_to_json(const std::vector<ExperimentConfig>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) j.push_back(r.to_json());
  return {{"rows", j}};
}

std::vector<ExperimentConfig> grid_from_json(const nlohmann::json& j) {
  check_keys(j, {"rows"}, "grid");
  std::vector<ExperimentConfig> rows;
  for (const auto& r : j.at("rows")) rows.push_back(ExperimentConfig::from_json(r));
  if (rows.empty()) throw ConfigError("grid has no rows");
  return rows;
}

std::unique_ptr<PreparedExperiment> prepare_experiment(StyledCohort cohort, const LearnerSpec& learner,
                                                       const MetricConfig& metric) {
  auto out = std::make_unique<PreparedExperiment>();
  out->cohort = std::move(cohort);
  auto& registry = LearnerRegistry::instance();
  const auto pretrained = registry.make(learner, metric)->pretrain(out->cohort.pretrain_scans());
  out->learner = registry.make(pretrained, metric);
  out->scans = out->cohort.optimize_scans();
  out->labels = out->cohort.optimize_labels();
  return out;
}

std::unique_ptr<PreparedExperiment> prepare_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  auto cohort = stage("cohort", [&] {
    return build_experiment_cohort(cfg.seed, cfg.styles, CohortLayout::parse(cfg.layout), cfg.phantom);
  });
  return stage("pretrain", [&] { return prepare_experiment(std::move(cohort), cfg.learner, cfg.metric); });
}

double improvement_percent(double mixture, double specific) {
  if (mixture == 0.0) {
    if (specific == 0.0) return 0.0;
    return specific > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
  }
  return 100.0 * (specific - mixture) / mixture;
}

double GridRowReport::dsc_improvement() const { return improvement_percent(mixture.dsc, specific.dsc); }
double GridRowReport::sdsc_improvement() const { return improvement_percent(mixture.sdsc, specific.sdsc); }

nlohmann::json GridRowReport::to_json() const {
  return {{"variation", variation},
          {"magnitude", magnitude},
          {"misclassified", misclassified ? nlohmann::json(*misclassified) : nlohmann::json(nullptr)},
          {"groups", groups},
          {"mixture", {{"dsc", mixture.dsc}, {"sdsc", mixture.sdsc}}},
          {"specific", {{"dsc", specific.dsc}, {"sdsc", specific.sdsc}}},
          {"improvement_pct", {{"dsc", dsc_improvement()}, {"sdsc", sdsc_improvement()}}},
          {"group_ids", group_ids},
          {"true_evaluations", true_evaluations},
          {"run_evaluations", run_evaluations}};
}

GridRowReport GridRowReport::from_json(const nlohmann::json& j) {
  GridRowReport r;
  r.variation = j.at("variation").get<std::string>();
  r.magnitude = j.at("magnitude").get<std::string>();
  if (!j.at("misclassified").is_null()) r.misclassified = j.at("misclassified").get<int>();
  r.groups = j.value("groups", 0);
  r.mixture = {j.at("mixture").at("dsc").get<double>(), j.at("mixture").at("sdsc").get<double>()};
  r.specific = {j.at("specific").at("dsc").get<double>(), j.at("specific").at("sdsc").get<double>()};
  r.group_ids = j.value("group_ids", r.group_ids);
  r.true_evaluations = j.value("true_evaluations", 0);
  r.run_evaluations = j.value("run_evaluations", r.run_evaluations);
  return r;
}

GridRowReport run_grid_row(const ExperimentConfig& cfg) {
  const auto prep = prepare_experiment(cfg);
  const auto& scans = prep->scans;
  const auto& learner = *prep->learner;

  GridRowReport report;
  report.variation = variation_name(cfg.styles);
  report.magnitude = magnitude_name(cfg.styles);
  report.cohort = cohort_manifest(prep->cohort);

  auto baseline = stage("baseline", [&] { return compute_baseline(scans, learner); });
  report.mixture = {baseline.mean_dsc(), baseline.mean_sdsc()};

  std::vector<std::vector<std::size_t>> groups;
  const bool recursive = cfg.kind == ExperimentKind::kRecursive || cfg.styles.size() > 2;
  if (recursive) {
    RecursiveConfig rc;
    rc.min_group = cfg.min_group;
    rc.min_improvement = cfg.min_improvement;
    rc.expected_groups = cfg.expected_groups > 0 ? cfg.expected_groups : static_cast<int>(cfg.styles.size());
    rc.ga = cfg.ga;
    const auto tree = stage("partition", [&] { return recursive_partition(scans, learner, rc); });
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < scans.size(); ++i) position[scans[i]->id()] = i;
    for (const auto* leaf : leaves(*tree)) {
      std::vector<std::size_t> idx;
      for (const auto& id : leaf->scan_ids) idx.push_back(position.at(id));
      groups.push_back(std::move(idx));
    }
    // Evaluation logs in breadth-first node order.
    std::vector<const PartitionTreeNode*> queue{tree.get()};
    for (std::size_t n = 0; n < queue.size(); ++n) {
      for (const auto& rec : queue[n]->log) {
        auto j = rec.to_json(queue[n]->ga_seed);
        j["row"] = report.variation + " " + report.magnitude;
        j["node"] = n;
        report.evaluations.push_back(std::move(j));
      }
      if (queue[n]->evaluated) report.run_evaluations.push_back(queue[n]->true_evaluations);
      report.true_evaluations += queue[n]->true_evaluations;
      for (const auto& c : queue[n]->children) queue.push_back(c.get());
    }
  } else {
    PartitionEvaluator evaluator(scans, learner, baseline);
    const auto result = stage("partition", [&] { return optimize_partition(evaluator, cfg.ga); });
    for (int g = 0; g < 2; ++g) groups.push_back(result.best.group(g));
    for (const auto& rec : result.log) {
      auto j = rec.to_json(cfg.ga.seed);
      j["row"] = report.variation + " " + report.magnitude;
      report.evaluations.push_back(std::move(j));
    }
    report.true_evaluations = result.true_evaluations;
    report.run_evaluations = {result.true_evaluations};
  }

  // Specific-style scores come from the found groups only. A scan alone in
  // its group has no peers to train on and keeps its mixture score.
  std::vector<ScorePair> specific(scans.size());
  stage("evaluate", [&] {
    for (const auto& g : groups) {
      if (g.size() == 1) {
        specific[g.front()] = baseline.raw[g.front()];
        continue;
      }
      std::vector<const Scan*> members;
      for (auto i : g) members.push_back(scans[i]);
      const auto scores = leave_one_out(members, learner, true);
      for (std::size_t k = 0; k < g.size(); ++k) specific[g[k]] = scores[k];
    }
    return 0;
  });
  report.specific = {mean_of(specific, &ScorePair::dsc), mean_of(specific, &ScorePair::sdsc)};
  report.groups = static_cast<int>(groups.size());
  for (const auto& g : groups) {
    std::vector<std::string> ids;
    for (auto i : g) ids.push_back(scans[i]->id());
    report.group_ids.push_back(std::move(ids));
  }
  std::set<int> distinct(prep->labels.begin(), prep->labels.end());
  if (distinct.size() == groups.size()) report.misclassified = misclassification(groups, prep->labels);
  return report;
}

std::vector<CorrelationPoint> sample_hamming_shell(const Partition& optimum, int per_distance, int max_distance,
                                                   Rng& rng) {
  const auto n = optimum.size();
  if (max_distance > static_cast<int>(n)) throw InsufficientSolutionsError("max distance exceeds partition length");
  std::set<Partition> seen{optimum.canonical()};
  std::vector<CorrelationPoint> out;
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), 0);
  for (int d = 1; d <= max_distance; ++d) {
    int found = 0;
    for (int attempt = 0; found < per_distance; ++attempt) {
      if (attempt >= 10000)
        throw InsufficientSolutionsError("could not draw " + std::to_string(per_distance) +
                                         " distinct solutions at Hamming distance " + std::to_string(d));
      std::shuffle(positions.begin(), positions.end(), rng);
      auto bits = optimum.bits();
      for (int k = 0; k < d; ++k) bits[positions[static_cast<std::size_t>(k)]] ^= 1;
      const auto p = Partition(std::move(bits)).canonical();
      if (p.group(0).size() < 2 || p.group(1).size() < 2) continue;
      if (!seen.insert(p).second) continue;
      out.push_back({d, p, 0.0, 0.0, false});
      ++found;
    }
  }
  return out;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("pearson needs two equal-length samples");
  const double n = double(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw InvalidArgument("pearson is undefined for a constant sample");
  return sxy / std::sqrt(sxx * syy);
}

CorrelationReport correlation_study(const PartitionEvaluator& evaluator, const Partition& optimum, int per_distance,
                                    int max_distance, Rng& rng) {
  CorrelationReport report;
  report.points.push_back({0, optimum.canonical(), 0.0, 0.0, true});
  for (auto& p : sample_hamming_shell(optimum, per_distance, max_distance, rng)) report.points.push_back(std::move(p));
  std::vector<double> fs, gs;
  for (auto& pt : report.points) {
    const auto f = evaluator.direct_f(pt.partition);
    const auto g = evaluator.proxy_g(pt.partition);
    pt.f = f.value;
    pt.g = g.value;
    fs.push_back(pt.f);
    gs.push_back(pt.g);
    report.evaluations.push_back(f.to_json(0));
    report.evaluations.push_back(g.to_json(0));
  }
  report.rho = pearson(fs, gs);
  return report;
}

CorrelationReport run_correlation(const ExperimentConfig& cfg) {
  const auto prep = prepare_experiment(cfg);
  auto baseline = stage("baseline", [&] { return compute_baseline(prep->scans, *prep->learner); });
  PartitionEvaluator evaluator(prep->scans, *prep->learner, std::move(baseline));
  const auto optimum = Partition::from_labels(prep->labels);
  std::seed_seq seq{cfg.seed, std::uint64_t{0xC0441}};
  Rng rng(seq);
  auto report = stage("correlate", [&] {
    return correlation_study(evaluator, optimum, cfg.samples_per_distance, cfg.max_distance, rng);
  });
  for (auto& j : report.evaluations) j["seed"] = cfg.seed;
  return report;
}

nlohmann::json CorrelationReport::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points)
    pts.push_back({{"distance", p.distance}, {"bits", p.partition.to_string()}, {"F", p.f}, {"G", p.g},
                   {"optimum", p.optimum}});
  return {{"rho", rho}, {"points", pts}};
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::vector<GridRowReport> run_grid(const std::vector<ExperimentConfig>& rows, const std::filesystem::path& out_dir) {
  if (rows.empty()) throw ConfigError("grid has no rows");
  std::filesystem::create_directories(out_dir);
  std::vector<GridRowReport> reports;
  nlohmann::json cohorts = nlohmann::json::array();
  std::vector<nlohmann::json> evals;
  for (const auto& row : rows) {
    reports.push_back(run_grid_row(row));
    for (auto& e : reports.back().evaluations) evals.push_back(e);
    cohorts.push_back({{"row", reports.back().variation + " " + reports.back().magnitude},
                       {"config", row.to_json()},
                       {"cohort", reports.back().cohort}});
  }
  const auto rendered = render_report(reports);
  write_text(out_dir / "cohort.json", nlohmann::json{{"rows", cohorts}}.dump(2) + "\n");
  write_text(out_dir / "evals.jsonl", render_jsonl(evals));
  write_text(out_dir / "grid.csv", rendered.csv);
  write_text(out_dir / "grid.json", rendered.json);
  write_text(out_dir / "report.md", rendered.markdown);
  return reports;
}

}  // namespace stylesplit
