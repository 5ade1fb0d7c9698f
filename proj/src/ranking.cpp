#include "stylist/ranking.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "stylist/error.hpp"
#include "stylist/text_io.hpp"

namespace stylist {

std::string_view to_string(Distance d) {
  return d == Distance::wasserstein ? "wasserstein" : "sym_kl";
}

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::mean: return "mean";
    case Aggregation::median: return "median";
    case Aggregation::median_ranking: return "median_ranking";
    case Aggregation::weighted_mean_ranking: return "weighted_mean_ranking";
  }
  return "?";
}

std::string_view to_string(RankerKind k) {
  switch (k) {
    case RankerKind::stylist: return "stylist";
    case RankerKind::env_infogain: return "env_infogain";
    case RankerKind::env_fisher: return "env_fisher";
    case RankerKind::mad: return "mad";
    case RankerKind::dispersion: return "dispersion";
    case RankerKind::variance: return "variance";
    case RankerKind::pca_loadings: return "pca_loadings";
  }
  return "?";
}

Distance parse_distance(std::string_view s) {
  if (s == "wasserstein") return Distance::wasserstein;
  if (s == "sym_kl") return Distance::sym_kl;
  throw Error("distance: unknown value '" + std::string(s) + "'");
}

Aggregation parse_aggregation(std::string_view s) {
  for (auto a : {Aggregation::mean, Aggregation::median, Aggregation::median_ranking,
                 Aggregation::weighted_mean_ranking}) {
    if (s == to_string(a)) return a;
  }
  throw Error("aggregation: unknown value '" + std::string(s) + "'");
}

RankerKind parse_ranker(std::string_view s) {
  for (auto k : {RankerKind::stylist, RankerKind::env_infogain, RankerKind::env_fisher, RankerKind::mad,
                 RankerKind::dispersion, RankerKind::variance, RankerKind::pca_loadings}) {
    if (s == to_string(k)) return k;
  }
  throw Error("ranker: unknown value '" + std::string(s) + "'");
}

Ranking Ranking::from_scores(std::vector<double> scores, std::string method) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw Error("ranking: NaN score for feature " + std::to_string(i));
  }
  Ranking r;
  r.order.resize(scores.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  r.scores = std::move(scores);
  r.method = std::move(method);
  return r;
}

namespace {

struct EnvRows {
  std::vector<std::string> names;
  std::vector<std::vector<std::size_t>> rows;
};

EnvRows train_env_rows(const Dataset& dataset) {
  EnvRows out;
  out.names = dataset.envs(Split::train);
  std::map<std::string, std::size_t> index;
  for (std::size_t e = 0; e < out.names.size(); ++e) index[out.names[e]] = e;
  out.rows.resize(out.names.size());
  for (std::size_t r : dataset.rows(Split::train)) out.rows[index[dataset.meta(r).env]].push_back(r);
  return out;
}

std::vector<double> column(const Dataset& dataset, std::span<const std::size_t> rows, std::size_t j) {
  std::vector<double> out;
  out.reserve(rows.size());
  const auto& v = dataset.values();
  for (std::size_t r : rows) out.push_back(v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
  return out;
}

// Sorted column so that reductions do not depend on row order.
std::vector<double> sorted_column(const Dataset& dataset, std::span<const std::size_t> rows, std::size_t j) {
  auto c = column(dataset, rows, j);
  std::sort(c.begin(), c.end());
  return c;
}

double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::vector<std::size_t> require_train(const Dataset& dataset, const char* op) {
  auto rows = dataset.rows(Split::train);
  if (rows.empty()) throw Error(std::string(op) + ": empty train split");
  return rows;
}

std::vector<double> negated(std::vector<double> v) {
  for (double& x : v) x = -x;
  return v;
}

}  // namespace

PairDistanceTable pairwise_distances(const Dataset& dataset, const BinningScheme& binning, Distance distance,
                                     double eps) {
  if (binning.n_features() != dataset.n_features()) throw Error("pairwise_distances: binning/feature mismatch");
  const EnvRows envs = train_env_rows(dataset);
  if (envs.names.size() < 2) throw Error("pairwise_distances: need at least 2 train environments");
  for (std::size_t e = 0; e < envs.names.size(); ++e) {
    if (envs.rows[e].empty()) throw Error("pairwise_distances: train environment '" + envs.names[e] + "' is empty");
  }

  PairDistanceTable table;
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (std::size_t a = 0; a < envs.names.size(); ++a) {
    for (std::size_t b = a + 1; b < envs.names.size(); ++b) {
      table.pairs.emplace_back(envs.names[a], envs.names[b]);
      idx.emplace_back(a, b);
    }
  }
  table.dist.resize(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(dataset.n_features()));

  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    std::vector<Histogram> hists;
    hists.reserve(envs.names.size());
    for (std::size_t e = 0; e < envs.names.size(); ++e) {
      hists.push_back(build_histogram(column(dataset, envs.rows[e], j), binning.feature(j), j, envs.names[e]));
    }
    for (std::size_t p = 0; p < idx.size(); ++p) {
      const auto& ha = hists[idx[p].first];
      const auto& hb = hists[idx[p].second];
      table.dist(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) =
          distance == Distance::wasserstein ? wasserstein1_hist(ha, hb) : symmetric_kl(ha, hb, eps);
    }
  }
  return table;
}

Ranking stylist_scores(const PairDistanceTable& table, Aggregation aggregation) {
  const Eigen::Index n_pairs = table.dist.rows();
  const Eigen::Index n_feat = table.dist.cols();
  if (n_pairs == 0 || n_feat == 0) throw Error("stylist_scores: empty distance table");
  std::string method = "stylist/" + std::string(to_string(aggregation));
  std::vector<double> scores(static_cast<std::size_t>(n_feat), 0.0);

  if (aggregation == Aggregation::mean || aggregation == Aggregation::median) {
    for (Eigen::Index i = 0; i < n_feat; ++i) {
      std::vector<double> col(static_cast<std::size_t>(n_pairs));
      for (Eigen::Index p = 0; p < n_pairs; ++p) col[static_cast<std::size_t>(p)] = table.dist(p, i);
      scores[static_cast<std::size_t>(i)] = aggregation == Aggregation::mean ? mean_of(col) : median_of(col);
    }
    return Ranking::from_scores(std::move(scores), std::move(method));
  }

  // 1-based rank of each feature within each pair, largest distance first.
  // Tied distances share their average rank.
  Eigen::MatrixXd ranks(n_pairs, n_feat);
  for (Eigen::Index p = 0; p < n_pairs; ++p) {
    std::vector<double> row(table.dist.row(p).begin(), table.dist.row(p).end());
    const Ranking per_pair = Ranking::from_scores(row, {});
    const auto& order = per_pair.order;
    for (std::size_t pos = 0; pos < order.size();) {
      std::size_t end = pos + 1;
      while (end < order.size() && row[order[end]] == row[order[pos]]) ++end;
      const double mid = 0.5 * static_cast<double>(pos + 1 + end);
      for (std::size_t t = pos; t < end; ++t) ranks(p, static_cast<Eigen::Index>(order[t])) = mid;
      pos = end;
    }
  }

  if (aggregation == Aggregation::median_ranking) {
    for (Eigen::Index i = 0; i < n_feat; ++i) {
      std::vector<double> col(ranks.col(i).begin(), ranks.col(i).end());
      scores[static_cast<std::size_t>(i)] = -median_of(std::move(col));
    }
    return Ranking::from_scores(std::move(scores), std::move(method));
  }

  std::vector<double> weights(static_cast<std::size_t>(n_pairs));
  double total = 0.0;
  for (Eigen::Index p = 0; p < n_pairs; ++p) {
    // Sorted summation keeps the weight independent of feature order.
    std::vector<double> row(table.dist.row(p).begin(), table.dist.row(p).end());
    std::sort(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += v;
    weights[static_cast<std::size_t>(p)] = s;
    total += s;
  }
  for (double& w : weights) w = total > 0.0 ? w / total : 1.0 / static_cast<double>(n_pairs);
  for (Eigen::Index i = 0; i < n_feat; ++i) {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n_pairs; ++p) s += weights[static_cast<std::size_t>(p)] * ranks(p, i);
    scores[static_cast<std::size_t>(i)] = -s;
  }
  return Ranking::from_scores(std::move(scores), std::move(method));
}

Ranking env_infogain_scores(const Dataset& dataset, const BinningScheme& binning) {
  require_train(dataset, "env_infogain_scores");
  if (binning.n_features() != dataset.n_features()) throw Error("env_infogain_scores: binning/feature mismatch");
  const EnvRows envs = train_env_rows(dataset);
  if (envs.names.size() < 2) throw Error("env_infogain_scores: need at least 2 train environments");
  const std::size_t n_bins = binning.bins();
  const std::size_t n_env = envs.names.size();
  std::vector<double> env_count(n_env);
  double total = 0.0;
  for (std::size_t e = 0; e < n_env; ++e) {
    env_count[e] = static_cast<double>(envs.rows[e].size());
    total += env_count[e];
  }

  const auto& v = dataset.values();
  std::vector<double> scores(dataset.n_features(), 0.0);
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    const FeatureEdges& edges = binning.feature(j);
    std::vector<double> joint(n_bins * n_env, 0.0);
    std::vector<double> bin_count(n_bins, 0.0);
    for (std::size_t e = 0; e < n_env; ++e) {
      for (std::size_t r : envs.rows[e]) {
        const std::size_t b = edges.bin_of(v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
        joint[b * n_env + e] += 1.0;
        bin_count[b] += 1.0;
      }
    }
    double mi = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      for (std::size_t e = 0; e < n_env; ++e) {
        const double c = joint[b * n_env + e];
        if (c == 0.0) continue;
        mi += (c / total) * std::log(c * total / (bin_count[b] * env_count[e]));
      }
    }
    scores[j] = std::max(0.0, mi);
  }
  return Ranking::from_scores(std::move(scores), "env_infogain");
}

Ranking env_fisher_scores(const Dataset& dataset) {
  require_train(dataset, "env_fisher_scores");
  const EnvRows envs = train_env_rows(dataset);
  if (envs.names.size() < 2) throw Error("env_fisher_scores: need at least 2 train environments");
  for (std::size_t e = 0; e < envs.names.size(); ++e) {
    if (envs.rows[e].size() < 2) {
      throw Error("env_fisher_scores: train environment '" + envs.names[e] + "' has fewer than 2 samples");
    }
  }
  const auto train = dataset.rows(Split::train);
  std::vector<double> scores(dataset.n_features(), 0.0);
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    const double mu = mean_of(sorted_column(dataset, train, j));
    double between = 0.0;
    double within = 0.0;
    for (std::size_t e = 0; e < envs.names.size(); ++e) {
      const auto xs = sorted_column(dataset, envs.rows[e], j);
      const double n_e = static_cast<double>(xs.size());
      const double mu_e = mean_of(xs);
      double ss = 0.0;
      for (double x : xs) ss += (x - mu_e) * (x - mu_e);
      between += n_e * (mu_e - mu) * (mu_e - mu);
      within += ss;  // n_e * population variance
    }
    if (within > 0.0) {
      scores[j] = between / within;
    } else {
      scores[j] = between > 0.0 ? kFisherSentinel : 0.0;
    }
  }
  return Ranking::from_scores(std::move(scores), "env_fisher");
}

std::vector<double> raw_mad(const Dataset& dataset) {
  const auto train = require_train(dataset, "mad_scores");
  std::vector<double> out(dataset.n_features());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto xs = sorted_column(dataset, train, j);
    const double mu = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += std::abs(x - mu);
    out[j] = s / static_cast<double>(xs.size());
  }
  return out;
}

std::vector<double> raw_dispersion(const Dataset& dataset) {
  const auto train = require_train(dataset, "dispersion_scores");
  std::vector<double> out(dataset.n_features());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto xs = sorted_column(dataset, train, j);
    const double shift = 1.0 - xs.front();
    double sum = 0.0;
    double log_sum = 0.0;
    for (double x : xs) {
      sum += x + shift;
      log_sum += std::log(x + shift);
    }
    const double n = static_cast<double>(xs.size());
    out[j] = (sum / n) / std::exp(log_sum / n);
  }
  return out;
}

std::vector<double> raw_variance(const Dataset& dataset) {
  const auto train = require_train(dataset, "variance_scores");
  std::vector<double> out(dataset.n_features());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const auto xs = sorted_column(dataset, train, j);
    const double mu = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - mu) * (x - mu);
    out[j] = s / static_cast<double>(xs.size());
  }
  return out;
}

namespace {

struct Eigenpairs {
  Eigen::VectorXd values;   // descending, clamped at 0
  Eigen::MatrixXd vectors;  // columns match values
};

Eigenpairs train_covariance_eigen(const Dataset& dataset) {
  const auto train = dataset.rows(Split::train);
  if (train.size() < 2) throw Error("pca_loading_scores: need at least 2 train samples");
  Eigen::MatrixXd x = dataset.gather(train);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(x.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("pca_loading_scores: eigendecomposition failed");
  const Eigen::Index n = cov.rows();
  Eigenpairs out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    out.values(c) = std::max(0.0, solver.eigenvalues()(n - 1 - c));
    out.vectors.col(c) = solver.eigenvectors().col(n - 1 - c);
  }
  return out;
}

std::size_t components_reaching(const Eigen::VectorXd& values, double threshold) {
  const double total = values.sum();
  if (!(total > 0.0)) return 1;
  double cum = 0.0;
  for (Eigen::Index c = 0; c < values.size(); ++c) {
    cum += values(c);
    if (cum >= threshold * total) return static_cast<std::size_t>(c + 1);
  }
  return static_cast<std::size_t>(values.size());
}

}  // namespace

std::size_t components_for_variance(const Dataset& dataset, double threshold) {
  return components_reaching(train_covariance_eigen(dataset).values, threshold);
}

std::vector<double> raw_pca_contribution(const Dataset& dataset, std::optional<std::size_t> components) {
  const Eigenpairs eig = train_covariance_eigen(dataset);
  const std::size_t m = components.value_or(components_reaching(eig.values, 0.95));
  if (m < 1 || m > dataset.n_features()) {
    throw Error("pca_loading_scores: components must be in [1, " + std::to_string(dataset.n_features()) + "], got " +
                std::to_string(m));
  }
  const Eigen::Index mm = static_cast<Eigen::Index>(m);
  const double denom = eig.values.head(mm).sum();
  std::vector<double> out(dataset.n_features(), 0.0);
  if (!(denom > 0.0)) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < mm; ++c) {
      const double v = eig.vectors(static_cast<Eigen::Index>(i), c);
      s += eig.values(c) * v * v;
    }
    out[i] = s / denom;
  }
  return out;
}

Ranking mad_scores(const Dataset& dataset) { return Ranking::from_scores(negated(raw_mad(dataset)), "mad"); }

Ranking dispersion_scores(const Dataset& dataset) {
  return Ranking::from_scores(negated(raw_dispersion(dataset)), "dispersion");
}

Ranking variance_scores(const Dataset& dataset) {
  return Ranking::from_scores(negated(raw_variance(dataset)), "variance");
}

Ranking pca_loading_scores(const Dataset& dataset, std::optional<std::size_t> components) {
  return Ranking::from_scores(negated(raw_pca_contribution(dataset, components)), "pca_loadings");
}

std::string RankerSpec::tag() const {
  std::string t(to_string(kind));
  if (kind == RankerKind::stylist) {
    t += "/" + std::string(to_string(distance)) + "/" + std::string(to_string(aggregation));
  }
  return t;
}

Ranking rank_features(const Dataset& dataset, const RankerSpec& spec) {
  Ranking r = [&] {
    switch (spec.kind) {
      case RankerKind::stylist:
        return stylist_scores(pairwise_distances(dataset, make_binning(dataset, spec.bins), spec.distance, spec.eps),
                              spec.aggregation);
      case RankerKind::env_infogain: return env_infogain_scores(dataset, make_binning(dataset, spec.bins));
      case RankerKind::env_fisher: return env_fisher_scores(dataset);
      case RankerKind::mad: return mad_scores(dataset);
      case RankerKind::dispersion: return dispersion_scores(dataset);
      case RankerKind::variance: return variance_scores(dataset);
      case RankerKind::pca_loadings: return pca_loading_scores(dataset, spec.components);
    }
    throw Error("rank_features: unknown ranker");
  }();
  r.method = spec.tag();
  return r;
}

std::string format_ranking(const Ranking& ranking) {
  std::string out = "feature_index,score,drop_rank\n";
  for (std::size_t pos = 0; pos < ranking.order.size(); ++pos) {
    const std::size_t i = ranking.order[pos];
    out += std::to_string(i) + "," + text::format_double(ranking.scores[i]) + "," + std::to_string(pos) + "\n";
  }
  return out;
}

Ranking parse_ranking(std::string_view contents, std::string_view origin) {
  const std::string where(origin);
  auto lines = text::split(contents, '\n');
  while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty() || text::trim(lines[0]) != "feature_index,score,drop_rank") {
    throw Error(where + ": expected header 'feature_index,score,drop_rank'");
  }
  const std::size_t n = lines.size() - 1;
  if (n == 0) throw Error(where + ": ranking has no rows");
  Ranking r;
  r.scores.assign(n, 0.0);
  r.order.assign(n, n);
  std::vector<bool> seen(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::string tag = where + ": row " + std::to_string(k + 1);
    const auto f = text::split(text::trim(lines[k + 1]));
    if (f.size() != 3) throw Error(tag + ": expected 3 columns");
    const long long idx = text::parse_int(f[0], tag + " feature_index");
    const double score = text::parse_double(f[1], tag + " score");
    const long long rank = text::parse_int(f[2], tag + " drop_rank");
    if (idx < 0 || static_cast<std::size_t>(idx) >= n || seen[static_cast<std::size_t>(idx)]) {
      throw Error(tag + ": feature_index out of range or repeated");
    }
    if (rank < 0 || static_cast<std::size_t>(rank) >= n || r.order[static_cast<std::size_t>(rank)] != n) {
      throw Error(tag + ": drop_rank out of range or repeated");
    }
    seen[static_cast<std::size_t>(idx)] = true;
    r.scores[static_cast<std::size_t>(idx)] = score;
    r.order[static_cast<std::size_t>(rank)] = static_cast<std::size_t>(idx);
  }
  r.method = "file:" + std::filesystem::path(where).stem().string();
  return r;
}

void save_ranking(const Ranking& ranking, const std::filesystem::path& path) {
  text::write_file(path, format_ranking(ranking));
}

Ranking load_ranking(const std::filesystem::path& path) {
  return parse_ranking(text::read_file(path), path.string());
}

}  // namespace stylist
