#pragma once

#include <string_view>
#include <vector>

#include "stylist/dataset.hpp"

namespace stylist {

enum class DetectorKind { knn, knn_norm, lof };

std::string_view to_string(DetectorKind k);
DetectorKind parse_detector(std::string_view s);

struct DetectorSpec {
  DetectorKind kind = DetectorKind::knn;
  std::size_t k = 10;

  /// k = 10 for the kNN variants, 20 for LOF.
  static DetectorSpec with_default_k(DetectorKind kind);
};

/// Pairwise distances are floored here before LOF reachability computation.
inline constexpr double kLofDistanceFloor = 1e-12;

/// Exact brute-force novelty model over a fixed reference set. Higher scores
/// mean more novel.
class FittedDetector {
 public:
  static FittedDetector fit(const DetectorSpec& spec, const FeatureMatrix& train);

  /// knn / knn_norm: distance to the k-th nearest reference row.
  /// lof: local outlier factor of each query against the reference set.
  std::vector<double> score(const FeatureMatrix& queries) const;

  /// LOF of each reference row, excluding itself from its neighbourhood.
  std::vector<double> reference_outlier_factors() const;

  const DetectorSpec& spec() const { return spec_; }
  const FeatureMatrix& reference() const { return reference_; }
  const std::vector<double>& k_distance() const { return k_distance_; }
  const std::vector<double>& lrd() const { return lrd_; }

 private:
  FittedDetector() = default;

  DetectorSpec spec_;
  FeatureMatrix reference_;
  std::vector<double> k_distance_;
  std::vector<double> lrd_;
  std::vector<std::vector<std::size_t>> reference_neighbours_;
};

/// Normalizes each row to unit L2 norm; throws on a zero-norm row.
FeatureMatrix normalize_rows(const FeatureMatrix& m);

}  // namespace stylist
