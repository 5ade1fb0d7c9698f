#include "stylist/pipeline.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "stylist/error.hpp"
#include "stylist/metrics.hpp"
#include "stylist/text_io.hpp"

namespace stylist {

namespace {

const CurvePoint& point_at(const Curve& curve, int keep_pct) {
  for (const auto& p : curve) {
    if (p.keep_pct == keep_pct) return p;
  }
  throw Error("curve has no point at keep_pct=" + std::to_string(keep_pct));
}

}  // namespace

EvalReport assemble_report(const Dataset& dataset, const Ranking& ranking, const PipelineConfig& config,
                           const Curve& ood_curve, const Curve& criterion_curve) {
  EvalReport r;
  const bool own = ranking.method.empty() || ranking.method == config.ranker.tag();
  r.ranker = own ? std::string(to_string(config.ranker.kind)) : ranking.method;
  if (own && config.ranker.kind == RankerKind::stylist) {
    r.distance = std::string(to_string(config.ranker.distance));
    r.aggregation = std::string(to_string(config.ranker.aggregation));
  }
  r.detector = std::string(to_string(config.detector.kind));
  r.k = config.detector.k;
  r.criterion = std::string(to_string(config.criterion));
  r.seed = config.seed;
  r.curve = ood_curve;
  r.criterion_curve = criterion_curve;
  r.chosen_keep_pct = argmax_keep_pct(criterion_curve);

  const CurvePoint& chosen = point_at(ood_curve, r.chosen_keep_pct);
  r.per_env_auc = chosen.per_env;
  r.mean_auc = chosen.mean_auc;
  const bool has_full = std::any_of(ood_curve.begin(), ood_curve.end(), [](const auto& p) { return p.keep_pct == 100; });
  if (has_full) {
    r.baseline_auc = point_at(ood_curve, 100).mean_auc;
  } else {
    const Curve full = sweep(dataset, ranking, SelectionGrid({100}), config.detector, Split::test_ood);
    r.baseline_auc = full.front().mean_auc;
  }
  r.delta = r.mean_auc - r.baseline_auc;

  std::set<std::string> excluded;
  for (const Curve* c : {&ood_curve, &criterion_curve}) {
    for (const auto& p : *c) excluded.insert(p.excluded.begin(), p.excluded.end());
  }
  r.excluded_envs.assign(excluded.begin(), excluded.end());
  return r;
}

EvalReport run_pipeline(const Dataset& dataset, const Ranking& ranking, const PipelineConfig& config) {
  const Split split = criterion_split(config.criterion);
  require_both_labels(dataset, split);
  const Curve ood = sweep(dataset, ranking, config.grid, config.detector, Split::test_ood);
  const Curve crit =
      split == Split::test_ood ? ood : sweep(dataset, ranking, config.grid, config.detector, split);
  return assemble_report(dataset, ranking, config, ood, crit);
}

EvalReport run_pipeline(const Dataset& dataset, const PipelineConfig& config) {
  if (config.rebalance) {
    const Dataset balanced = rebalance_classes(dataset, config.seed);
    return run_pipeline(balanced, rank_features(balanced, config.ranker), config);
  }
  return run_pipeline(dataset, rank_features(dataset, config.ranker), config);
}

std::string to_json(const EvalReport& r) {
  using nlohmann::ordered_json;
  auto curve_json = [](const Curve& c) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : c) arr.push_back(ordered_json{{"keep_pct", p.keep_pct}, {"mean_auc", p.mean_auc}});
    return arr;
  };
  ordered_json method{{"ranker", r.ranker}};
  method["distance"] = r.distance ? ordered_json(*r.distance) : ordered_json(nullptr);
  method["aggregation"] = r.aggregation ? ordered_json(*r.aggregation) : ordered_json(nullptr);
  method["detector"] = r.detector;
  method["k"] = r.k;
  method["criterion"] = r.criterion;
  method["keep_pct"] = r.chosen_keep_pct;
  method["seed"] = r.seed;

  ordered_json j;
  j["method"] = method;
  ordered_json per_env = ordered_json::object();
  for (const auto& [env, auc] : r.per_env_auc) per_env[env] = auc;
  j["per_env_auc"] = per_env;
  j["mean_auc"] = r.mean_auc;
  j["baseline_auc"] = r.baseline_auc;
  j["delta"] = r.delta;
  j["chosen_keep_pct"] = r.chosen_keep_pct;
  j["curve"] = curve_json(r.curve);
  j["criterion_curve"] = curve_json(r.criterion_curve);
  j["seed"] = r.seed;
  j["excluded_envs"] = r.excluded_envs;
  return j.dump(2) + "\n";
}

Curve pca_projection_sweep(const Dataset& dataset, std::span<const std::size_t> kept, const SelectionGrid& grid,
                           const DetectorSpec& detector, Split split) {
  const auto train = dataset.rows(Split::train);
  if (train.size() < 2) throw Error("pca_projection_sweep: need at least 2 train samples");
  std::vector<std::size_t> eval_rows;
  std::vector<SampleMeta> eval_meta;
  for (std::size_t r : dataset.rows(split)) {
    if (dataset.meta(r).label == Label::unknown) continue;
    eval_rows.push_back(r);
    eval_meta.push_back(dataset.meta(r));
  }
  if (eval_rows.empty()) throw Error("pca_projection_sweep: split has no labeled rows");

  const Eigen::MatrixXd x = dataset.gather(train, kept);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("pca_projection_sweep: eigendecomposition failed");
  const Eigen::Index d = cov.rows();
  const Eigen::MatrixXd basis = solver.eigenvectors().rowwise().reverse();  // descending eigenvalues

  const Eigen::MatrixXd q = dataset.gather(eval_rows, kept);
  Curve curve;
  for (int pct : grid.keep_percents()) {
    const Eigen::Index m = static_cast<Eigen::Index>(kept_count(static_cast<std::size_t>(d), pct));
    const FeatureMatrix train_proj = centered * basis.leftCols(m);
    const FeatureMatrix query_proj = (q.rowwise() - mean) * basis.leftCols(m);
    const auto model = FittedDetector::fit(detector, train_proj);
    const auto scores = model.score(query_proj);
    const EnvAuc auc = mean_env_auc(scores, eval_meta);
    curve.push_back(CurvePoint{pct, auc.mean, auc.per_env, auc.excluded});
  }
  return curve;
}

std::string format_scores(const Dataset& dataset, std::span<const std::size_t> rows, std::span<const double> scores) {
  if (rows.size() != scores.size()) throw Error("format_scores: rows and scores differ in length");
  std::string out = "sample_id,env,label,score\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& m = dataset.meta(rows[i]);
    out += m.sample_id + "," + m.env + "," + std::string(to_string(m.label)) + "," + text::format_double(scores[i]) +
           "\n";
  }
  return out;
}

}  // namespace stylist
