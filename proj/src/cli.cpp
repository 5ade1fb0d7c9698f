#include "stylist/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "stylist/dataset.hpp"
#include "stylist/error.hpp"
#include "stylist/pipeline.hpp"
#include "stylist/probes.hpp"
#include "stylist/ranking.hpp"
#include "stylist/rng.hpp"
#include "stylist/selection.hpp"
#include "stylist/synthgen.hpp"
#include "stylist/text_io.hpp"

namespace stylist::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::vector<std::pair<std::string, std::string>> read_config(const fs::path& path) {
  const std::string contents = text::read_file(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  for (std::string_view line : text::split(contents, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(path.string() + ": line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = text::trim(line.substr(0, eq));
    auto value = text::trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw Error(path.string() + ": line " + std::to_string(line_no) + ": empty key");
    out.emplace_back(std::string(key), std::string(value));
  }
  return out;
}

namespace {

constexpr const char* kDefaultGrid = "5,10,15,20,25,30,35,40,45,50,55,60,65,70,75,80,85,90,95,100";

/// Every tunable the subcommands accept. Parsed strings are turned into
/// validated specs before any computation starts.
struct RunConfig {
  std::string dataset;
  std::string ranking;
  std::string mask;
  std::string out;
  std::string curve_out;
  std::string scores_out;
  std::string pca_sweep_out;

  std::string ranker = "stylist";
  std::string distance = "wasserstein";
  std::string aggregation = "mean";
  std::size_t bins = kDefaultBins;
  double eps = kDefaultKlEps;
  std::size_t components = 0;  // 0 = reach 95% explained variance

  std::string detector = "knn";
  std::size_t k = 0;  // 0 = default for the detector kind
  std::string grid = kDefaultGrid;
  std::string criterion = "id_val";
  std::uint64_t seed = 0;
  bool rebalance = false;

  int keep_pct = 100;
  std::string mode = "auto";
  std::string fractions = kDefaultGrid;

  SynthConfig synth;
  std::string envs_id = "farm,mountain,rock,forest,field";
  std::string envs_ood = "beach,desert";
  std::string majority_envs = "farm,mountain";
  std::string levels = "0.4,0.75,0.9,0.95";
};

std::string names(const std::string& key) {
  std::string dashed = key;
  std::replace(dashed.begin(), dashed.end(), '_', '-');
  return dashed == key ? "--" + key : "--" + key + ",--" + dashed;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : text::split(s, ',')) {
    part = text::trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& field) {
  std::vector<int> out;
  for (const auto& p : split_list(s)) out.push_back(static_cast<int>(text::parse_int(p, field)));
  if (out.empty()) throw Error(field + ": empty list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& field) {
  std::vector<double> out;
  for (const auto& p : split_list(s)) out.push_back(text::parse_double(p, field));
  if (out.empty()) throw Error(field + ": empty list");
  return out;
}

void add_ranker_options(CLI::App* app, RunConfig& c) {
  app->add_option(names("ranker"), c.ranker, "Feature ranker")
      ->check(CLI::IsMember({"stylist", "env_infogain", "env_fisher", "mad", "dispersion", "variance", "pca_loadings"}))
      ->capture_default_str();
  app->add_option(names("distance"), c.distance, "Stylist per-feature distance")
      ->check(CLI::IsMember({"wasserstein", "sym_kl"}))
      ->capture_default_str();
  app->add_option(names("agg") + "," + names("aggregation"), c.aggregation, "Stylist aggregation over env pairs")
      ->check(CLI::IsMember({"mean", "median", "median_ranking", "weighted_mean_ranking"}))
      ->capture_default_str();
  app->add_option(names("bins"), c.bins, "Histogram bins per feature")->capture_default_str();
  app->add_option(names("eps"), c.eps, "Symmetric-KL smoothing")->capture_default_str();
  app->add_option(names("components"), c.components, "PCA components for pca_loadings (0 = 95% variance)")
      ->capture_default_str();
}

void add_eval_options(CLI::App* app, RunConfig& c, bool with_seed = true) {
  app->add_option(names("detector"), c.detector, "Novelty detector")
      ->check(CLI::IsMember({"knn", "knn_norm", "lof"}))
      ->capture_default_str();
  app->add_option(names("k"), c.k, "Neighbours (0 = 10 for knn variants, 20 for lof)")->capture_default_str();
  app->add_option(names("grid"), c.grid, "Keep percentages, comma separated")->capture_default_str();
  app->add_option(names("criterion"), c.criterion, "Split used to choose the keep percentage")
      ->check(CLI::IsMember({"id_val", "ood_oracle"}))
      ->capture_default_str();
  if (with_seed) app->add_option(names("seed"), c.seed, "Run seed")->capture_default_str();
  app->add_flag(names("rebalance"), c.rebalance, "Class-balance train environments before ranking");
}

void add_synth_options(CLI::App* app, RunConfig& c) {
  SynthConfig& s = c.synth;
  app->add_option(names("n_content_feats"), s.n_content_feats)->capture_default_str();
  app->add_option(names("n_style_feats"), s.n_style_feats)->capture_default_str();
  app->add_option(names("envs_id"), c.envs_id, "ID environments, comma separated")->capture_default_str();
  app->add_option(names("envs_ood"), c.envs_ood, "OOD environments, comma separated")->capture_default_str();
  app->add_option(names("majority_envs"), c.majority_envs, "ID environments holding the spurious majority")
      ->capture_default_str();
  app->add_option(names("spuriousness"), s.spuriousness, "Train probability mass of the majority environments")
      ->capture_default_str();
  app->add_option(names("n_train"), s.n_train)->capture_default_str();
  app->add_option(names("n_val"), s.n_val)->capture_default_str();
  app->add_option(names("n_test_id"), s.n_test_id)->capture_default_str();
  app->add_option(names("n_test_ood"), s.n_test_ood)->capture_default_str();
  app->add_option(names("content_sep"), s.content_sep, "Normal/novel gap per content feature (sigma units)")
      ->capture_default_str();
  app->add_option(names("style_sep"), s.style_sep, "Std-dev of environment style centers")->capture_default_str();
  app->add_option(names("noise_sigma"), s.noise_sigma)->capture_default_str();
  app->add_flag(names("entangled"), s.entangled, "Mix all factors with a random orthogonal matrix");
  app->add_option(names("seed"), s.seed, "Generator seed")->capture_default_str();
}

RankerSpec ranker_spec(const RunConfig& c) {
  RankerSpec r;
  r.kind = parse_ranker(c.ranker);
  r.distance = parse_distance(c.distance);
  r.aggregation = parse_aggregation(c.aggregation);
  if (c.bins < 2) throw Error("bins: must be >= 2");
  r.bins = c.bins;
  if (!(c.eps > 0.0)) throw Error("eps: must be positive");
  r.eps = c.eps;
  if (c.components > 0) r.components = c.components;
  return r;
}

PipelineConfig pipeline_config(const RunConfig& c) {
  PipelineConfig p;
  p.ranker = ranker_spec(c);
  p.grid = SelectionGrid(parse_int_list(c.grid, "grid"));
  p.detector = DetectorSpec::with_default_k(parse_detector(c.detector));
  if (c.k > 0) p.detector.k = c.k;
  p.criterion = parse_criterion(c.criterion);
  p.seed = c.seed;
  p.rebalance = c.rebalance;
  return p;
}

SynthConfig synth_config(const RunConfig& c) {
  SynthConfig s = c.synth;
  s.envs_id = split_list(c.envs_id);
  s.envs_ood = split_list(c.envs_ood);
  s.majority_envs = split_list(c.majority_envs);
  s.validate();
  return s;
}

ordered_json to_json(const SynthConfig& s) {
  return ordered_json{{"n_content_feats", s.n_content_feats},
                      {"n_style_feats", s.n_style_feats},
                      {"envs_id", s.envs_id},
                      {"envs_ood", s.envs_ood},
                      {"majority_envs", s.majority_envs},
                      {"spuriousness", s.spuriousness},
                      {"n_train", s.n_train},
                      {"n_val", s.n_val},
                      {"n_test_id", s.n_test_id},
                      {"n_test_ood", s.n_test_ood},
                      {"content_sep", s.content_sep},
                      {"style_sep", s.style_sep},
                      {"noise_sigma", s.noise_sigma},
                      {"entangled", s.entangled},
                      {"seed", s.seed}};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_output(const fs::path& path, const std::string& contents) {
  ensure_parent(path);
  text::write_file(path, contents);
}

fs::path sibling(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  return p.parent_path() / (p.stem().string() + suffix);
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  const SynthConfig cfg = synth_config(c);
  const SynthOutput data = generate(cfg);
  const fs::path dir(c.out);
  fs::create_directories(dir);
  const std::string dataset_text = format_dataset(data.dataset);
  const std::string mask_text = format_mask(data.style_mask);
  text::write_file(dir / "dataset.csv", dataset_text);
  text::write_file(dir / "mask.csv", mask_text);
  const std::uint64_t hash = fnv1a64(mask_text, fnv1a64(dataset_text));
  ordered_json manifest{{"config", to_json(cfg)},
                        {"files", {{"dataset", "dataset.csv"}, {"mask", "mask.csv"}}},
                        {"mask_approximate", data.mask_approximate},
                        {"n_samples", data.dataset.n_samples()},
                        {"n_features", data.dataset.n_features()},
                        {"content_hash", "fnv1a64:" + hex64(hash)}};
  text::write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  out << "wrote " << (dir / "dataset.csv").string() << " (" << data.dataset.n_samples() << " samples, "
      << data.dataset.n_features() << " features), content_hash fnv1a64:" << hex64(hash) << "\n";
  return 0;
}

int cmd_rank(const RunConfig& c, std::ostream& out) {
  const RankerSpec spec = ranker_spec(c);
  const Dataset d = load_dataset(c.dataset);
  const Ranking r = rank_features(d, spec);
  write_output(c.out, format_ranking(r));
  out << "ranked " << r.size() << " features with " << r.method << " -> " << c.out << "\n";
  return 0;
}

int cmd_select(const RunConfig& c, std::ostream& out) {
  const Ranking r = load_ranking(c.ranking);
  const auto kept = select_features(r, c.keep_pct, r.size());
  std::string text = "feature_index\n";
  for (std::size_t i : kept) text += std::to_string(i) + "\n";
  write_output(c.out, text);
  if (!c.dataset.empty()) {
    const Dataset d = load_dataset(c.dataset);
    const fs::path subset = sibling(c.out, ".dataset.csv");
    save_dataset(subset_features(d, kept), subset);
    out << "wrote " << subset.string() << "\n";
  }
  out << "kept " << kept.size() << " of " << r.size() << " features -> " << c.out << "\n";
  return 0;
}

int cmd_eval(const RunConfig& c, std::ostream& out) {
  const PipelineConfig cfg = pipeline_config(c);
  Dataset d = load_dataset(c.dataset);
  if (cfg.rebalance) d = rebalance_classes(d, cfg.seed);
  const Ranking ranking = c.ranking.empty() ? rank_features(d, cfg.ranker) : load_ranking(c.ranking);
  if (ranking.size() != d.n_features()) {
    throw Error("ranking: covers " + std::to_string(ranking.size()) + " features, dataset has " +
                std::to_string(d.n_features()));
  }
  const EvalReport report = run_pipeline(d, ranking, cfg);
  write_output(c.out, to_json(report));
  const fs::path curve_path = c.curve_out.empty() ? sibling(c.out, ".curve.csv") : fs::path(c.curve_out);
  write_output(curve_path, format_curve(report.curve));

  if (!c.scores_out.empty()) {
    const auto train = d.rows(Split::train);
    const auto test = d.rows(Split::test_ood);
    const auto kept = select_features(ranking, report.chosen_keep_pct, d.n_features());
    const auto model = FittedDetector::fit(cfg.detector, d.gather(train, kept));
    write_output(c.scores_out, format_scores(d, test, model.score(d.gather(test, kept))));
  }
  if (!c.pca_sweep_out.empty()) {
    std::vector<std::size_t> all(d.n_features());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto chosen = select_features(ranking, report.chosen_keep_pct, d.n_features());
    const Curve pca_all = pca_projection_sweep(d, all, cfg.grid, cfg.detector, Split::test_ood);
    const Curve pca_chosen = pca_projection_sweep(d, chosen, cfg.grid, cfg.detector, Split::test_ood);
    std::string text = "keep_pct,selection_auc,pca_auc,selection_pca_auc\n";
    for (std::size_t i = 0; i < report.curve.size(); ++i) {
      text += std::to_string(report.curve[i].keep_pct) + "," + text::format_double(report.curve[i].mean_auc) + "," +
              text::format_double(pca_all[i].mean_auc) + "," + text::format_double(pca_chosen[i].mean_auc) + "\n";
    }
    write_output(c.pca_sweep_out, text);
  }
  out << "chosen keep_pct " << report.chosen_keep_pct << ": OOD AUC " << report.mean_auc << " (baseline "
      << report.baseline_auc << ", delta " << report.delta << ") -> " << c.out << "\n";
  return 0;
}

int cmd_probe(const RunConfig& c, std::ostream& out) {
  const auto fractions = parse_int_list(c.fractions, "fractions");
  for (int f : fractions) {
    if (f <= 0 || f > 100) throw Error("fractions: " + std::to_string(f) + " outside (0, 100]");
  }
  if (c.mode != "auto" && c.mode != "identify" && c.mode != "probe" && c.mode != "both") {
    throw Error("mode: unknown value '" + c.mode + "'");
  }
  const bool identify = c.mode == "identify" || c.mode == "both" || (c.mode == "auto" && !c.mask.empty());
  const bool probe = c.mode == "probe" || c.mode == "both" || c.mode == "auto";
  if (identify && c.mask.empty()) throw Error("mask: --mode " + c.mode + " requires a style mask file");

  const Dataset d = load_dataset(c.dataset);
  const Ranking r = load_ranking(c.ranking);
  if (r.size() != d.n_features()) throw Error("ranking: feature count does not match the dataset");
  std::vector<bool> mask;
  if (identify) {
    mask = parse_mask(text::read_file(c.mask), c.mask);
    if (mask.size() != d.n_features()) throw Error("mask: feature count does not match the dataset");
  }

  ordered_json rows = ordered_json::array();
  for (int f : fractions) {
    const double frac = f / 100.0;
    const auto top = top_ranked(r, frac);
    ordered_json row{{"fraction_pct", f}, {"n_features", top.size()}};
    if (identify) row["identification_accuracy"] = style_identification_accuracy(r, mask, frac);
    if (probe) row["probe_accuracy"] = probe_env_accuracy(d, top);
    rows.push_back(row);
  }
  ordered_json report{{"ranker", r.method}, {"rows", rows}};
  write_output(c.out, report.dump(2) + "\n");
  out << "probed " << fractions.size() << " fractions -> " << c.out << "\n";
  return 0;
}

int cmd_sweep_spuriousness(const RunConfig& c, std::ostream& out) {
  const SynthConfig base = synth_config(c);
  const PipelineConfig cfg = pipeline_config(c);
  const auto levels = parse_double_list(c.levels, "levels");
  {
    SynthConfig probe = base;
    for (double s : levels) {
      probe.spuriousness = s;
      probe.validate();
    }
  }
  ordered_json rows = ordered_json::array();
  std::string csv = "spuriousness,baseline_auc,mean_auc,delta,chosen_keep_pct\n";
  for (const SynthOutput& data : spuriousness_suite(base, levels)) {
    const EvalReport report = run_pipeline(data.dataset, cfg);
    ordered_json curve = ordered_json::array();
    for (const auto& p : report.curve) curve.push_back({{"keep_pct", p.keep_pct}, {"mean_auc", p.mean_auc}});
    const double s = rows.size() < levels.size() ? levels[rows.size()] : 0.0;
    rows.push_back(ordered_json{{"spuriousness", s},
                                {"baseline_auc", report.baseline_auc},
                                {"mean_auc", report.mean_auc},
                                {"delta", report.delta},
                                {"chosen_keep_pct", report.chosen_keep_pct},
                                {"curve", curve}});
    csv += text::format_double(s) + "," + text::format_double(report.baseline_auc) + "," +
           text::format_double(report.mean_auc) + "," + text::format_double(report.delta) + "," +
           std::to_string(report.chosen_keep_pct) + "\n";
  }
  ordered_json report{{"config", to_json(base)},
                      {"ranker", cfg.ranker.tag()},
                      {"detector", std::string(to_string(cfg.detector.kind))},
                      {"k", cfg.detector.k},
                      {"criterion", std::string(to_string(cfg.criterion))},
                      {"levels", rows}};
  write_output(c.out, report.dump(2) + "\n");
  write_output(c.curve_out.empty() ? sibling(c.out, ".csv") : fs::path(c.curve_out), csv);
  out << "evaluated " << levels.size() << " spuriousness levels -> " << c.out << "\n";
  return 0;
}

// Splices `key = value` pairs from --config in front of the explicit flags so
// that flags given on the command line take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.size() < 2) return args;
  std::vector<std::string> rest;
  std::vector<std::string> injected;
  for (std::size_t i = 2; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    for (const auto& [key, value] : read_config(path)) injected.push_back("--" + key + "=" + value);
  }
  std::vector<std::string> out{args[0], args[1]};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  RunConfig c;
  CLI::App app{"Environment-biased feature ranking and robust novelty detection"};
  app.name(args.empty() ? "stylist" : fs::path(args[0]).filename().string());
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  const std::string config_help = "Line-based 'key = value' file; flags override it";

  auto* synth = app.add_subcommand("synth", "Generate a synthetic spuriousness-controlled benchmark");
  synth->add_option("--config", config_help);
  synth->add_option(names("out"), c.out, "Output directory")->required();
  add_synth_options(synth, c);

  auto* rank = app.add_subcommand("rank", "Rank features by environment bias");
  rank->add_option("--config", config_help);
  rank->add_option(names("dataset"), c.dataset, "Feature file")->required();
  rank->add_option(names("out"), c.out, "Ranking output file")->required();
  add_ranker_options(rank, c);

  auto* select = app.add_subcommand("select", "Keep the least-biased features of a ranking");
  select->add_option("--config", config_help);
  select->add_option(names("ranking"), c.ranking, "Ranking file")->required();
  select->add_option(names("keep_pct"), c.keep_pct, "Percentage of features kept")->capture_default_str();
  select->add_option(names("dataset"), c.dataset, "Optional feature file to subset");
  select->add_option(names("out"), c.out, "Kept-index output file")->required();

  auto* eval = app.add_subcommand("eval", "Sweep keep percentages and report novelty-detection ROC-AUC");
  eval->add_option("--config", config_help);
  eval->add_option(names("dataset"), c.dataset, "Feature file")->required();
  eval->add_option(names("ranking"), c.ranking, "Ranking file (default: rank with the ranker flags)");
  eval->add_option(names("out"), c.out, "JSON report")->required();
  eval->add_option(names("curve_out"), c.curve_out, "Sweep curve (default: <out>.curve.csv)");
  eval->add_option(names("scores_out"), c.scores_out, "OOD test scores at the chosen keep percentage");
  eval->add_option(names("pca_sweep_out"), c.pca_sweep_out, "Selection vs PCA projection comparison curve");
  add_ranker_options(eval, c);
  add_eval_options(eval, c);

  auto* probe = app.add_subcommand("probe", "Style identification and environment-probe accuracy");
  probe->add_option("--config", config_help);
  probe->add_option(names("dataset"), c.dataset, "Feature file")->required();
  probe->add_option(names("ranking"), c.ranking, "Ranking file")->required();
  probe->add_option(names("mask"), c.mask, "Style mask file (feature_index,is_style)");
  probe->add_option(names("mode"), c.mode, "auto, identify, probe or both")
      ->check(CLI::IsMember({"auto", "identify", "probe", "both"}))
      ->capture_default_str();
  probe->add_option(names("fractions"), c.fractions, "Top-ranked percentages, comma separated")
      ->capture_default_str();
  probe->add_option(names("out"), c.out, "JSON output")->required();

  auto* suite = app.add_subcommand("sweep-spuriousness", "Generate one benchmark per spuriousness level and evaluate");
  suite->add_option("--config", config_help);
  suite->add_option(names("levels"), c.levels, "Spuriousness levels, comma separated")->capture_default_str();
  suite->add_option(names("out"), c.out, "JSON output")->required();
  suite->add_option(names("curve_out"), c.curve_out, "Per-level summary CSV (default: <out>.csv)");
  add_synth_options(suite, c);
  add_ranker_options(suite, c);
  add_eval_options(suite, c, false);  // --seed comes from the synth options

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (synth->parsed()) return cmd_synth(c, out);
    if (rank->parsed()) return cmd_rank(c, out);
    if (select->parsed()) return cmd_select(c, out);
    if (eval->parsed()) return cmd_eval(c, out);
    if (probe->parsed()) return cmd_probe(c, out);
    if (suite->parsed()) {
      c.seed = c.synth.seed;
      return cmd_sweep_spuriousness(c, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace stylist::cli
