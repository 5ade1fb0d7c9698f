#pragma once

#include <span>
#include <vector>

#include "stylist/dataset.hpp"
#include "stylist/ranking.hpp"

namespace stylist {

/// Share of style features among the first ceil(top_fraction * n) features of
/// the drop order.
double style_identification_accuracy(const Ranking& ranking, const std::vector<bool>& style_mask,
                                     double top_fraction);

struct ProbeOptions {
  int iterations = 500;
  double step = 0.1;
  double l2 = 1e-4;
};

/// Trains a linear softmax classifier of the train environment label on the
/// kept features (standardized with train statistics) and returns its
/// environment accuracy on the test_id split.
double probe_env_accuracy(const Dataset& dataset, std::span<const std::size_t> kept, const ProbeOptions& options = {});

/// The first ceil(fraction * n) entries of the drop order (most biased first).
std::vector<std::size_t> top_ranked(const Ranking& ranking, double fraction);

}  // namespace stylist
