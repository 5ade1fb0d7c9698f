#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "stylist/dataset.hpp"

namespace stylist {

/// Gaussian style/content factor model with controllable spuriousness between
/// the normal class and a subset of the training environments.
struct SynthConfig {
  std::size_t n_content_feats = 32;
  std::size_t n_style_feats = 32;
  std::vector<std::string> envs_id{"farm", "mountain", "rock", "forest", "field"};
  std::vector<std::string> envs_ood{"beach", "desert"};
  std::vector<std::string> majority_envs{"farm", "mountain"};
  /// Total train probability mass of the majority environments.
  double spuriousness = 0.95;
  std::size_t n_train = 3000;
  std::size_t n_val = 500;
  std::size_t n_test_id = 500;
  std::size_t n_test_ood = 500;
  /// Normal/novel content gap, in noise_sigma units per content feature.
  double content_sep = 1.5;
  /// Standard deviation of the per-environment style centers.
  double style_sep = 2.5;
  double noise_sigma = 1.0;
  bool entangled = false;
  std::uint64_t seed = 0;

  /// Level at which every ID environment gets the same train share.
  double balanced_level() const;
  /// Throws Error naming the first invalid field.
  void validate() const;
  std::size_t n_features() const { return n_content_feats + n_style_feats; }
};

struct SynthOutput {
  Dataset dataset;
  /// true for features that carry style. Layout is content first, then style.
  std::vector<bool> style_mask;
  /// Set in entangled mode, where the mask names pre-mixing factors only.
  bool mask_approximate = false;
  /// Orthogonal mixing matrix (identity when disentangled).
  Eigen::MatrixXd mixing;
};

/// Train-time probability of each ID environment (in envs_id order).
std::vector<double> train_env_probabilities(const SynthConfig& config);

SynthOutput generate(const SynthConfig& config);

/// One dataset per spuriousness level. Centers, mixing and every non-train
/// split are shared; only the train environment assignment changes.
std::vector<SynthOutput> spuriousness_suite(const SynthConfig& base, const std::vector<double>& levels);

/// `feature_index,is_style` rows with 0/1 flags.
std::string format_mask(const std::vector<bool>& mask);
std::vector<bool> parse_mask(std::string_view text, std::string_view origin = "<memory>");

}  // namespace stylist
