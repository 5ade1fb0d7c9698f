#pragma once

#include <span>
#include <string>
#include <vector>

#include "stylist/dataset.hpp"

namespace stylist {

/// Uniform bin edges for one feature: edge k = lo + k * width, k = 0..bins.
struct FeatureEdges {
  double lo = 0.0;
  double width = 1.0;
  std::size_t bins = 0;

  double edge(std::size_t k) const { return lo + static_cast<double>(k) * width; }
  double hi() const { return edge(bins); }
  std::size_t bin_of(double v) const;
  bool operator==(const FeatureEdges&) const = default;
};

/// Per-feature edges shared by every environment, spanning the pooled train
/// range of each feature.
class BinningScheme {
 public:
  BinningScheme(std::vector<FeatureEdges> edges, std::size_t bins);

  std::size_t bins() const { return bins_; }
  std::size_t n_features() const { return edges_.size(); }
  const FeatureEdges& feature(std::size_t i) const { return edges_.at(i); }

 private:
  std::vector<FeatureEdges> edges_;
  std::size_t bins_;
};

inline constexpr std::size_t kDefaultBins = 100;
inline constexpr double kDefaultKlEps = 1e-6;

BinningScheme make_binning(const Dataset& dataset, std::size_t bins = kDefaultBins);

struct Histogram {
  std::size_t feature = 0;
  std::string env;
  FeatureEdges edges;
  std::vector<double> mass;
  std::size_t support_count = 0;
};

Histogram build_histogram(std::span<const double> values, const FeatureEdges& edges, std::size_t feature = 0,
                          std::string env = {});

/// W1 between two histograms on the same edges: width * sum |CDF_a - CDF_b|.
double wasserstein1_hist(const Histogram& a, const Histogram& b);

/// Exact W1 between two empirical distributions given as sorted samples.
double wasserstein1_exact(std::span<const double> a, std::span<const double> b);

/// KL(p||q) + KL(q||p) in nats after eps-smoothing both mass vectors.
double symmetric_kl(const Histogram& a, const Histogram& b, double eps = kDefaultKlEps);

}  // namespace stylist
