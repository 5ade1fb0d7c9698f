#include <gtest/gtest.h>

#include "stylist/error.hpp"
#include "stylist/ranking.hpp"
#include "stylist/synthgen.hpp"

using namespace stylist;

namespace {

SynthConfig small() {
  SynthConfig c;
  c.n_content_feats = 6;
  c.n_style_feats = 4;
  c.n_train = 400;
  c.n_val = 100;
  c.n_test_id = 100;
  c.n_test_ood = 100;
  return c;
}

std::map<std::string, std::size_t> train_counts(const Dataset& d) {
  std::map<std::string, std::size_t> out;
  for (std::size_t r : d.rows(Split::train)) ++out[d.meta()[r].env];
  return out;
}

}  // namespace

TEST(Synthgen, DeterministicAndSeedSensitive) {
  const SynthOutput a = generate(small()), b = generate(small());
  EXPECT_EQ(a.dataset, b.dataset);
  SynthConfig c = small();
  c.seed = 1;
  EXPECT_FALSE(generate(c).dataset == a.dataset);
}

TEST(Synthgen, MaskLayout) {
  SynthConfig c = small();
  c.n_content_feats = 32;
  c.n_style_feats = 32;
  const SynthOutput out = generate(c);
  ASSERT_EQ(out.style_mask.size(), 64u);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(out.style_mask[i], i >= 32);
  EXPECT_FALSE(out.mask_approximate);
  EXPECT_EQ(parse_mask(format_mask(out.style_mask)), out.style_mask);
}

TEST(Synthgen, SplitSizesAndLabels) {
  const Dataset d = generate(small()).dataset;
  EXPECT_EQ(d.rows(Split::train).size(), 400u);
  EXPECT_EQ(d.rows(Split::val_id).size(), 100u);
  EXPECT_EQ(d.rows(Split::test_ood).size(), 100u);
  EXPECT_EQ(d.envs(Split::test_ood), (std::vector<std::string>{"beach", "desert"}));
  for (Split sp : {Split::val_id, Split::test_id, Split::test_ood}) {
    std::map<std::string, std::pair<int, int>> per_env;
    for (std::size_t r : d.rows(sp)) {
      const auto& m = d.meta()[r];
      (m.label == Label::novel ? per_env[m.env].first : per_env[m.env].second)++;
    }
    for (const auto& [env, c] : per_env) {
      EXPECT_GT(c.first, 0) << env;
      EXPECT_LE(std::abs(c.first - c.second), 1) << env;
    }
  }
}

TEST(Synthgen, TrainShareWithinBinomialBounds) {
  SynthConfig c;
  c.n_content_feats = 2;
  c.n_style_feats = 2;
  const auto p = train_env_probabilities(c);
  EXPECT_NEAR(p[0], 0.475, 1e-15);
  EXPECT_NEAR(p[2], 0.05 / 3, 1e-15);
  const auto counts = train_counts(generate(c).dataset);
  for (std::size_t e = 0; e < c.envs_id.size(); ++e) {
    const double mean = 3000 * p[e], sd = std::sqrt(3000 * p[e] * (1 - p[e]));
    const auto it = counts.find(c.envs_id[e]);
    const double got = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    EXPECT_LE(std::abs(got - mean), 3 * sd) << c.envs_id[e];
  }
}

TEST(Synthgen, Validation) {
  auto expect_field = [](SynthConfig c, const std::string& field) {
    try {
      c.validate();
      ADD_FAILURE() << "no error for " << field;
    } catch (const Error& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  SynthConfig c = small();
  c.spuriousness = 1.2;
  expect_field(c, "spuriousness");
  c = small();
  c.spuriousness = 0.3;
  expect_field(c, "spuriousness");
  c = small();
  c.noise_sigma = 0;
  expect_field(c, "noise_sigma");
  c = small();
  c.majority_envs = {"beach"};
  expect_field(c, "majority_envs");
  c = small();
  c.envs_id = {"farm"};
  c.majority_envs = {"farm"};
  expect_field(c, "envs_id");
  c = small();
  c.envs_ood = {};
  expect_field(c, "envs_ood");
  EXPECT_NO_THROW(small().validate());
}

TEST(Synthgen, EntangledMixingIsOrthogonal) {
  SynthConfig c = small();
  c.entangled = true;
  const SynthOutput out = generate(c);
  EXPECT_TRUE(out.mask_approximate);
  const Eigen::MatrixXd mtm = out.mixing.transpose() * out.mixing;
  EXPECT_LE((mtm - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-9);
  // Distances are preserved relative to the disentangled draw with the same seed.
  const SynthOutput plain = generate(small());
  const auto& x = plain.dataset.values();
  const auto& y = out.dataset.values();
  EXPECT_NEAR((x.row(0) - x.row(1)).norm(), (y.row(0) - y.row(1)).norm(), 1e-9);
}

TEST(Synthgen, SpuriousnessSuiteSharesTestRows) {
  SynthConfig c = small();
  const auto suite = spuriousness_suite(c, {0.4, 0.75, 0.95});
  ASSERT_EQ(suite.size(), 3u);
  const auto& base = suite[0].dataset;
  const auto ood = base.rows(Split::test_ood);
  for (const auto& s : suite) {
    const auto& d = s.dataset;
    EXPECT_EQ(d.gather(d.rows(Split::test_ood)), base.gather(ood));
    EXPECT_EQ(d.gather(d.rows(Split::val_id)), base.gather(base.rows(Split::val_id)));
  }
  double prev = 1.0;
  for (double s : {0.4, 0.75, 0.95}) {
    c.spuriousness = s;
    const double minority = train_env_probabilities(c)[4];
    EXPECT_LT(minority, prev);
    prev = minority;
  }
  c.spuriousness = c.balanced_level();
  for (double p : train_env_probabilities(c)) EXPECT_NEAR(p, 0.2, 1e-15);
}

TEST(Synthgen, StyleFeaturesOutrankContentWhenDisentangled) {
  SynthConfig c;
  c.n_content_feats = 8;
  c.n_style_feats = 8;
  c.style_sep = 3.0;
  c.spuriousness = c.balanced_level();
  c.n_train = 10000;
  const SynthOutput out = generate(c);
  const Ranking r = rank_features(out.dataset, RankerSpec{});
  double min_style = 1e300, max_content = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    if (out.style_mask[i]) min_style = std::min(min_style, r.scores[i]);
    else max_content = std::max(max_content, r.scores[i]);
  }
  EXPECT_GT(min_style, max_content);
}
