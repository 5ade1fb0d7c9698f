#include "stylist/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stylist/error.hpp"

namespace stylist {

std::string_view to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::knn: return "knn";
    case DetectorKind::knn_norm: return "knn_norm";
    case DetectorKind::lof: return "lof";
  }
  return "?";
}

DetectorKind parse_detector(std::string_view s) {
  if (s == "knn") return DetectorKind::knn;
  if (s == "knn_norm") return DetectorKind::knn_norm;
  if (s == "lof") return DetectorKind::lof;
  throw Error("detector: unknown value '" + std::string(s) + "'");
}

DetectorSpec DetectorSpec::with_default_k(DetectorKind kind) {
  return DetectorSpec{kind, kind == DetectorKind::lof ? std::size_t{20} : std::size_t{10}};
}

FeatureMatrix normalize_rows(const FeatureMatrix& m) {
  FeatureMatrix out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    double ss = 0.0;
    for (Eigen::Index c = 0; c < out.cols(); ++c) ss += out(r, c) * out(r, c);
    const double norm = std::sqrt(ss);
    if (!(norm > 0.0)) throw Error("knn_norm: row " + std::to_string(r) + " has zero norm");
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) /= norm;
  }
  return out;
}

namespace {

double euclidean(const FeatureMatrix& a, Eigen::Index ra, const FeatureMatrix& b, Eigen::Index rb) {
  const double* pa = a.data() + ra * a.cols();
  const double* pb = b.data() + rb * b.cols();
  double ss = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double d = pa[c] - pb[c];
    ss += d * d;
  }
  return std::sqrt(ss);
}

// Indices of the k nearest entries of `dist` (ties by lower index), nearest first.
std::vector<std::size_t> nearest(const std::vector<double>& dist, std::size_t k) {
  std::vector<std::size_t> idx(dist.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), closer);
  idx.resize(k);
  return idx;
}

}  // namespace

FittedDetector FittedDetector::fit(const DetectorSpec& spec, const FeatureMatrix& train) {
  if (train.cols() == 0) throw Error("detector fit: zero-feature matrix");
  if (spec.k < 1) throw Error("detector fit: k must be >= 1");
  if (spec.k >= static_cast<std::size_t>(train.rows())) {
    throw Error("detector fit: k=" + std::to_string(spec.k) + " requires more than k train rows, got " +
                std::to_string(train.rows()));
  }
  FittedDetector d;
  d.spec_ = spec;
  d.reference_ = spec.kind == DetectorKind::knn_norm ? normalize_rows(train) : train;
  if (spec.kind != DetectorKind::lof) return d;

  const std::size_t n = static_cast<std::size_t>(train.rows());
  std::vector<std::vector<double>> neighbour_dist(n);
  d.reference_neighbours_.resize(n);
  d.k_distance_.resize(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // The self-distance is +inf so a row is never its own neighbour.
      row[j] = i == j ? std::numeric_limits<double>::infinity()
                      : std::max(kLofDistanceFloor, euclidean(d.reference_, static_cast<Eigen::Index>(i),
                                                              d.reference_, static_cast<Eigen::Index>(j)));
    }
    d.reference_neighbours_[i] = nearest(row, spec.k);
    for (std::size_t o : d.reference_neighbours_[i]) neighbour_dist[i].push_back(row[o]);
    d.k_distance_[i] = neighbour_dist[i].back();
  }
  d.lrd_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach = 0.0;
    for (std::size_t t = 0; t < spec.k; ++t) {
      reach += std::max(d.k_distance_[d.reference_neighbours_[i][t]], neighbour_dist[i][t]);
    }
    d.lrd_[i] = static_cast<double>(spec.k) / reach;
  }
  return d;
}

std::vector<double> FittedDetector::score(const FeatureMatrix& queries) const {
  if (queries.cols() != reference_.cols()) {
    throw Error("detector score: query has " + std::to_string(queries.cols()) + " features, model expects " +
                std::to_string(reference_.cols()));
  }
  const FeatureMatrix q = spec_.kind == DetectorKind::knn_norm ? normalize_rows(queries) : queries;
  const std::size_t n_ref = static_cast<std::size_t>(reference_.rows());
  const std::size_t k = spec_.k;
  std::vector<double> out(static_cast<std::size_t>(q.rows()));
  std::vector<double> dist(n_ref);

  for (Eigen::Index r = 0; r < q.rows(); ++r) {
    for (std::size_t j = 0; j < n_ref; ++j) dist[j] = euclidean(q, r, reference_, static_cast<Eigen::Index>(j));
    if (spec_.kind != DetectorKind::lof) {
      std::vector<double> tmp = dist;
      std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(k - 1), tmp.end());
      out[static_cast<std::size_t>(r)] = tmp[k - 1];
      continue;
    }
    for (double& v : dist) v = std::max(kLofDistanceFloor, v);
    const auto nbrs = nearest(dist, k);
    double reach = 0.0;
    double lrd_sum = 0.0;
    for (std::size_t o : nbrs) {
      reach += std::max(k_distance_[o], dist[o]);
      lrd_sum += lrd_[o];
    }
    const double lrd_q = static_cast<double>(k) / reach;
    out[static_cast<std::size_t>(r)] = (lrd_sum / static_cast<double>(k)) / lrd_q;
  }
  return out;
}

std::vector<double> FittedDetector::reference_outlier_factors() const {
  if (spec_.kind != DetectorKind::lof) throw Error("reference_outlier_factors: detector is not lof");
  std::vector<double> out(lrd_.size());
  for (std::size_t i = 0; i < lrd_.size(); ++i) {
    double s = 0.0;
    for (std::size_t o : reference_neighbours_[i]) s += lrd_[o];
    out[i] = (s / static_cast<double>(spec_.k)) / lrd_[i];
  }
  return out;
}

}  // namespace stylist
