#include "stylist/probes.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "stylist/error.hpp"

namespace stylist {

std::vector<std::size_t> top_ranked(const Ranking& ranking, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) throw Error("top_fraction must be in (0, 1]");
  const double n = static_cast<double>(ranking.order.size());
  // The epsilon keeps products such as 0.3 * 10 from rounding up past 3.
  const std::size_t count = std::min(ranking.order.size(), static_cast<std::size_t>(std::ceil(fraction * n - 1e-9)));
  return {ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, count))};
}

double style_identification_accuracy(const Ranking& ranking, const std::vector<bool>& style_mask,
                                     double top_fraction) {
  if (style_mask.size() != ranking.order.size()) {
    throw Error("style_identification_accuracy: mask has " + std::to_string(style_mask.size()) +
                " entries for " + std::to_string(ranking.order.size()) + " features");
  }
  const auto top = top_ranked(ranking, top_fraction);
  std::size_t hits = 0;
  for (std::size_t i : top) hits += style_mask[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(top.size());
}

double probe_env_accuracy(const Dataset& dataset, std::span<const std::size_t> kept, const ProbeOptions& options) {
  if (kept.empty()) throw Error("probe_env_accuracy: no features kept");
  const auto envs = dataset.envs(Split::train);
  if (envs.size() < 2) throw Error("probe_env_accuracy: need at least 2 train environments");
  std::map<std::string, Eigen::Index> env_index;
  for (std::size_t e = 0; e < envs.size(); ++e) env_index[envs[e]] = static_cast<Eigen::Index>(e);

  const auto train = dataset.rows(Split::train);
  const auto test = dataset.rows(Split::test_id);
  if (test.empty()) throw Error("probe_env_accuracy: empty test_id split");

  Eigen::MatrixXd x = dataset.gather(train, kept);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::RowVectorXd sd = ((x.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
  for (Eigen::Index c = 0; c < sd.size(); ++c) {
    if (!(sd(c) > 0.0)) sd(c) = 1.0;
  }
  x = (x.rowwise() - mean).array().rowwise() / sd.array();

  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Index n_env = static_cast<Eigen::Index>(envs.size());
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, n_env);
  for (Eigen::Index i = 0; i < n; ++i) onehot(i, env_index.at(dataset.meta(train[static_cast<std::size_t>(i)]).env)) = 1.0;

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, n_env);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(n_env);
  auto softmax = [](Eigen::MatrixXd logits) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const double mx = logits.row(i).maxCoeff();
      logits.row(i) = (logits.row(i).array() - mx).exp();
      logits.row(i) /= logits.row(i).sum();
    }
    return logits;
  };
  for (int it = 0; it < options.iterations; ++it) {
    const Eigen::MatrixXd p = softmax((x * w).rowwise() + b);
    const Eigen::MatrixXd err = (p - onehot) / static_cast<double>(n);
    w -= options.step * (x.transpose() * err + options.l2 * w);
    b -= options.step * err.colwise().sum();
  }

  Eigen::MatrixXd xt = dataset.gather(test, kept);
  xt = (xt.rowwise() - mean).array().rowwise() / sd.array();
  const Eigen::MatrixXd logits = (xt * w).rowwise() + b;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index pred = 0;
    logits.row(i).maxCoeff(&pred);
    auto it = env_index.find(dataset.meta(test[static_cast<std::size_t>(i)]).env);
    if (it != env_index.end() && it->second == pred) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace stylist
