#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "stylist/dataset.hpp"
#include "stylist/detectors.hpp"
#include "stylist/ranking.hpp"

namespace stylist {

/// Ascending, unique keep percentages in (0, 100].
class SelectionGrid {
 public:
  SelectionGrid();  // 5, 10, ..., 100
  explicit SelectionGrid(std::vector<int> keep_percents);

  const std::vector<int>& keep_percents() const { return keep_percents_; }

 private:
  std::vector<int> keep_percents_;
};

enum class Criterion { id_val, ood_oracle };
std::string_view to_string(Criterion c);
Criterion parse_criterion(std::string_view s);
Split criterion_split(Criterion c);

/// Number of kept features: max(1, round-half-up(n * pct / 100)).
std::size_t kept_count(std::size_t n_features, int keep_pct);

/// The least-biased features (tail of ranking.order), ascending by index.
std::vector<std::size_t> select_features(const Ranking& ranking, int keep_pct, std::size_t n_features);

struct CurvePoint {
  int keep_pct = 100;
  double mean_auc = 0.0;
  std::map<std::string, double> per_env;
  std::vector<std::string> excluded;
};
using Curve = std::vector<CurvePoint>;

/// Fits the detector on train rows restricted to each grid point's features
/// and evaluates mean per-environment ROC-AUC on `split`.
Curve sweep(const Dataset& dataset, const Ranking& ranking, const SelectionGrid& grid, const DetectorSpec& detector,
            Split split);

/// Grid point with the highest mean AUC; ties go to the larger keep_pct.
int argmax_keep_pct(const Curve& curve);

/// Throws unless every environment of `split` has both normal and novel rows.
void require_both_labels(const Dataset& dataset, Split split);

struct PercentChoice {
  int keep_pct = 100;
  Curve curve;
};

PercentChoice choose_percent(const Dataset& dataset, const Ranking& ranking, const SelectionGrid& grid,
                             const DetectorSpec& detector, Criterion criterion);

/// `keep_pct,auc_mean,auc_<env>...` with one row per grid point.
std::string format_curve(const Curve& curve);

}  // namespace stylist
