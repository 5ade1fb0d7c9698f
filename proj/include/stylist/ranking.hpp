#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stylist/dataset.hpp"
#include "stylist/distribution.hpp"

namespace stylist {

enum class Distance { wasserstein, sym_kl };
enum class Aggregation { mean, median, median_ranking, weighted_mean_ranking };
enum class RankerKind { stylist, env_infogain, env_fisher, mad, dispersion, variance, pca_loadings };

std::string_view to_string(Distance d);
std::string_view to_string(Aggregation a);
std::string_view to_string(RankerKind k);
Distance parse_distance(std::string_view s);
Aggregation parse_aggregation(std::string_view s);
RankerKind parse_ranker(std::string_view s);

/// Per-feature distances for every unordered pair of train environments.
/// Pairs are ordered lexicographically by environment name.
struct PairDistanceTable {
  std::vector<std::pair<std::string, std::string>> pairs;
  Eigen::MatrixXd dist;  // n_pairs x n_features
};

/// Per-feature scores plus the drop order. Higher score means the feature is
/// removed earlier; order[0] is the first feature to drop.
struct Ranking {
  std::vector<double> scores;
  std::vector<std::size_t> order;
  std::string method;

  /// Sorts by score descending, ties by ascending feature index.
  static Ranking from_scores(std::vector<double> scores, std::string method);
  std::size_t size() const { return scores.size(); }
  bool operator==(const Ranking&) const = default;
};

inline constexpr double kFisherSentinel = 1e18;

PairDistanceTable pairwise_distances(const Dataset& dataset, const BinningScheme& binning, Distance distance,
                                     double eps = kDefaultKlEps);
Ranking stylist_scores(const PairDistanceTable& table, Aggregation aggregation);

Ranking env_infogain_scores(const Dataset& dataset, const BinningScheme& binning);
Ranking env_fisher_scores(const Dataset& dataset);

// Informativeness rankers. The raw_* helpers return the statistic itself; the
// rankers negate it so the least informative feature is dropped first.
std::vector<double> raw_mad(const Dataset& dataset);
std::vector<double> raw_dispersion(const Dataset& dataset);
std::vector<double> raw_variance(const Dataset& dataset);
std::vector<double> raw_pca_contribution(const Dataset& dataset, std::optional<std::size_t> components);
/// Smallest component count reaching `threshold` cumulative explained variance.
std::size_t components_for_variance(const Dataset& dataset, double threshold = 0.95);

Ranking mad_scores(const Dataset& dataset);
Ranking dispersion_scores(const Dataset& dataset);
Ranking variance_scores(const Dataset& dataset);
Ranking pca_loading_scores(const Dataset& dataset, std::optional<std::size_t> components = std::nullopt);

struct RankerSpec {
  RankerKind kind = RankerKind::stylist;
  Distance distance = Distance::wasserstein;
  Aggregation aggregation = Aggregation::mean;
  std::size_t bins = kDefaultBins;
  double eps = kDefaultKlEps;
  std::optional<std::size_t> components;

  std::string tag() const;
};

Ranking rank_features(const Dataset& dataset, const RankerSpec& spec);

/// `feature_index,score,drop_rank` rows sorted by drop_rank.
std::string format_ranking(const Ranking& ranking);
Ranking parse_ranking(std::string_view text, std::string_view origin = "<memory>");
void save_ranking(const Ranking& ranking, const std::filesystem::path& path);
Ranking load_ranking(const std::filesystem::path& path);

}  // namespace stylist
