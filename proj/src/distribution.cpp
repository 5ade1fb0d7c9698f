#include "stylist/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stylist/error.hpp"

namespace stylist {

std::size_t FeatureEdges::bin_of(double v) const {
  const double pos = std::floor((v - lo) / width);
  if (!(pos > 0.0)) return 0;
  if (pos >= static_cast<double>(bins - 1)) return bins - 1;
  return static_cast<std::size_t>(pos);
}

BinningScheme::BinningScheme(std::vector<FeatureEdges> edges, std::size_t bins)
    : edges_(std::move(edges)), bins_(bins) {
  if (bins_ < 2) throw Error("binning: bins must be >= 2, got " + std::to_string(bins_));
  for (const auto& e : edges_) {
    if (e.bins != bins_ || !(e.width > 0.0)) throw Error("binning: inconsistent feature edges");
  }
}

BinningScheme make_binning(const Dataset& dataset, std::size_t bins) {
  if (bins < 2) throw Error("binning: bins must be >= 2, got " + std::to_string(bins));
  const auto train = dataset.rows(Split::train);
  if (train.empty()) throw Error("binning: empty train split");
  std::vector<FeatureEdges> edges;
  edges.reserve(dataset.n_features());
  const auto& v = dataset.values();
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r : train) {
      const double x = v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    FeatureEdges e;
    e.bins = bins;
    if (hi > lo) {
      e.lo = lo;
      e.width = (hi - lo) / static_cast<double>(bins);
    } else {
      e.lo = lo - 0.5;
      e.width = 1.0 / static_cast<double>(bins);
    }
    edges.push_back(e);
  }
  return BinningScheme(std::move(edges), bins);
}

Histogram build_histogram(std::span<const double> values, const FeatureEdges& edges, std::size_t feature,
                          std::string env) {
  if (values.empty()) throw Error("histogram: no values for feature " + std::to_string(feature));
  if (edges.bins < 1) throw Error("histogram: edges have no bins");
  Histogram h;
  h.feature = feature;
  h.env = std::move(env);
  h.edges = edges;
  h.support_count = values.size();
  std::vector<std::size_t> counts(edges.bins, 0);
  for (double v : values) ++counts[edges.bin_of(v)];
  h.mass.resize(edges.bins);
  const double total = static_cast<double>(values.size());
  for (std::size_t k = 0; k < edges.bins; ++k) h.mass[k] = static_cast<double>(counts[k]) / total;
  return h;
}

namespace {

void require_same_binning(const Histogram& a, const Histogram& b, const char* op) {
  if (!(a.edges == b.edges) || a.feature != b.feature || a.mass.size() != b.mass.size()) {
    throw Error(std::string(op) + ": histograms use different binning");
  }
}

}  // namespace

double wasserstein1_hist(const Histogram& a, const Histogram& b) {
  require_same_binning(a, b, "wasserstein1_hist");
  double cdf_a = 0.0;
  double cdf_b = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < a.mass.size(); ++k) {
    cdf_a += a.mass[k];
    cdf_b += b.mass[k];
    sum += std::abs(cdf_a - cdf_b);
  }
  return a.edges.width * sum;
}

double wasserstein1_exact(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("wasserstein1_exact: empty sample");
  // Quantile functions are step functions with breakpoints i/n and j/m; walk the
  // merged breakpoints comparing i*m against j*n in integers.
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const double total = static_cast<double>(n) * static_cast<double>(m);
  std::size_t i = 0;
  std::size_t j = 0;
  unsigned long long prev = 0;  // current position t * n * m
  double sum = 0.0;
  while (i < n && j < m) {
    const unsigned long long next_a = static_cast<unsigned long long>(i + 1) * m;
    const unsigned long long next_b = static_cast<unsigned long long>(j + 1) * n;
    const unsigned long long next = std::min(next_a, next_b);
    sum += static_cast<double>(next - prev) * std::abs(a[i] - b[j]);
    prev = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  return sum / total;
}

double symmetric_kl(const Histogram& a, const Histogram& b, double eps) {
  if (!(eps > 0.0)) throw Error("symmetric_kl: eps must be positive");
  require_same_binning(a, b, "symmetric_kl");
  const double norm = 1.0 + static_cast<double>(a.mass.size()) * eps;
  double sum = 0.0;
  for (std::size_t k = 0; k < a.mass.size(); ++k) {
    const double p = (a.mass[k] + eps) / norm;
    const double q = (b.mass[k] + eps) / norm;
    sum += (p - q) * std::log(p / q);
  }
  return std::max(0.0, sum);
}

}  // namespace stylist
