#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stylist/dataset.hpp"
#include "stylist/detectors.hpp"
#include "stylist/ranking.hpp"
#include "stylist/selection.hpp"

namespace stylist {

struct PipelineConfig {
  RankerSpec ranker;
  SelectionGrid grid;
  DetectorSpec detector;
  Criterion criterion = Criterion::id_val;
  std::uint64_t seed = 0;
  /// Class-balanced resampling of the train split before ranking.
  bool rebalance = false;
};

struct EvalReport {
  std::string ranker;
  std::optional<std::string> distance;
  std::optional<std::string> aggregation;
  std::string detector;
  std::size_t k = 0;
  std::string criterion;
  std::uint64_t seed = 0;

  int chosen_keep_pct = 100;
  /// OOD test AUC at the chosen keep percentage.
  std::map<std::string, double> per_env_auc;
  double mean_auc = 0.0;
  /// OOD test AUC with every feature kept.
  double baseline_auc = 0.0;
  double delta = 0.0;
  /// OOD test sweep; identical whichever criterion picks the operating point.
  Curve curve;
  /// Sweep on the split the criterion selects from.
  Curve criterion_curve;
  std::vector<std::string> excluded_envs;
};

/// Step 1 (ranking on train) then Step 2 (select, fit, score, AUC) over the grid.
EvalReport run_pipeline(const Dataset& dataset, const PipelineConfig& config);

/// Same as run_pipeline with a precomputed ranking; config.ranker is ignored
/// apart from being echoed when `ranking.method` is empty.
EvalReport run_pipeline(const Dataset& dataset, const Ranking& ranking, const PipelineConfig& config);

/// Assembles a report from already computed curves. Used when several
/// criteria share one sweep.
EvalReport assemble_report(const Dataset& dataset, const Ranking& ranking, const PipelineConfig& config,
                           const Curve& ood_curve, const Curve& criterion_curve);

std::string to_json(const EvalReport& report);

/// Novelty detection after projecting the kept features onto their leading
/// train principal components; x-axis is the percentage of components kept.
Curve pca_projection_sweep(const Dataset& dataset, std::span<const std::size_t> kept, const SelectionGrid& grid,
                           const DetectorSpec& detector, Split split);

/// `sample_id,env,label,score` rows.
std::string format_scores(const Dataset& dataset, std::span<const std::size_t> rows, std::span<const double> scores);

}  // namespace stylist
