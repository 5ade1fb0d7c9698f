#include "stylist/metrics.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "stylist/error.hpp"

namespace stylist {

double roc_auc(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw Error("roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double n_pos = 0.0;
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    // Ranks i+1..j+1 share their average.
    const double mid = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t t = i; t <= j; ++t) {
      if (positive[idx[t]]) {
        rank_sum += mid;
        n_pos += 1.0;
      }
    }
    i = j + 1;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw Error("roc_auc: both classes must be present");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

EnvAuc mean_env_auc(std::span<const double> scores, std::span<const SampleMeta> meta) {
  if (scores.size() != meta.size()) throw Error("mean_env_auc: scores and metadata differ in length");
  struct Group {
    std::vector<double> scores;
    std::vector<bool> positive;
  };
  std::map<std::string, Group> groups;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    if (meta[i].label == Label::unknown) continue;
    Group& g = groups[meta[i].env];
    g.scores.push_back(scores[i]);
    g.positive.push_back(meta[i].label == Label::novel);
  }

  EnvAuc out;
  double sum = 0.0;
  for (const auto& [env, g] : groups) {
    const auto n_pos = std::count(g.positive.begin(), g.positive.end(), true);
    if (n_pos == 0 || n_pos == static_cast<std::ptrdiff_t>(g.positive.size())) {
      std::cerr << "warning: environment '" << env << "' lacks one class; excluded from ROC-AUC\n";
      out.excluded.push_back(env);
      continue;
    }
    const double auc = roc_auc(g.scores, g.positive);
    out.per_env[env] = auc;
    sum += auc;
  }
  if (out.per_env.empty()) throw Error("mean_env_auc: no environment contains both classes");
  out.mean = sum / static_cast<double>(out.per_env.size());
  return out;
}

}  // namespace stylist
