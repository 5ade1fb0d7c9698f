#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "stylist/dataset.hpp"

namespace stylist {

/// Mid-rank ROC-AUC; `positive[i]` marks novel samples, which should score higher.
double roc_auc(std::span<const double> scores, const std::vector<bool>& positive);

struct EnvAuc {
  std::map<std::string, double> per_env;
  double mean = 0.0;
  /// Environments skipped because one class was absent.
  std::vector<std::string> excluded;
};

/// ROC-AUC inside each environment, then the unweighted mean over
/// environments. `scores[i]` belongs to `meta[i]`; unknown labels are skipped.
EnvAuc mean_env_auc(std::span<const double> scores, std::span<const SampleMeta> meta);

}  // namespace stylist
