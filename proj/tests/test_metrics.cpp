#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "stylist/error.hpp"
#include "stylist/metrics.hpp"

using namespace stylist;

TEST(RocAuc, Examples) {
  EXPECT_EQ(roc_auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, {true, true, false, false}), 1.0);
  EXPECT_EQ(roc_auc(std::vector<double>{1, 1, 1, 1}, {true, false, true, false}), 0.5);
  EXPECT_EQ(roc_auc(std::vector<double>{0.9, 0.4, 0.6, 0.2}, {true, false, false, true}), 0.5);
  EXPECT_THROW(roc_auc(std::vector<double>{1, 2}, {true, true}), Error);
  EXPECT_THROW(roc_auc(std::vector<double>{1, 2}, {true}), Error);
}

TEST(RocAuc, MatchesPairCountingWithTies) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> level(0, 6);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 40;
    std::vector<double> s(n);
    std::vector<bool> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = level(rng) * 0.25;
      y[i] = coin(rng);
    }
    y[0] = true;
    y[1] = false;
    const double a = roc_auc(s, y);
    EXPECT_NEAR(a, oracle::auc_pairs(s, y), 1e-12);
    std::vector<double> neg(n), mono(n);
    for (std::size_t i = 0; i < n; ++i) {
      neg[i] = -s[i];
      mono[i] = std::exp(3 * s[i]) + 1;
    }
    EXPECT_NEAR(roc_auc(neg, y), 1.0 - a, 1e-12);
    EXPECT_EQ(roc_auc(mono, y), a);
  }
}

namespace {

SampleMeta m(std::string env, Label label) {
  static int id = 0;
  return {"m" + std::to_string(id++), std::move(env), Split::test_ood, label, std::nullopt};
}

}  // namespace

TEST(MeanEnvAuc, UnweightedMeanAndExclusion) {
  std::vector<double> scores;
  std::vector<SampleMeta> meta;
  // env a: perfect, 20 samples
  for (int i = 0; i < 10; ++i) {
    scores.push_back(1.0 + i);
    meta.push_back(m("a", Label::novel));
    scores.push_back(-1.0 - i);
    meta.push_back(m("a", Label::normal));
  }
  // env b: all tied, 2 samples
  scores.insert(scores.end(), {0.0, 0.0});
  meta.push_back(m("b", Label::novel));
  meta.push_back(m("b", Label::normal));
  // env c: only normals; unknown rows are skipped
  scores.insert(scores.end(), {5.0, 9.0});
  meta.push_back(m("c", Label::normal));
  meta.push_back(m("a", Label::unknown));
  const EnvAuc r = mean_env_auc(scores, meta);
  EXPECT_EQ(r.per_env.size(), 2u);
  EXPECT_EQ(r.per_env.at("a"), 1.0);
  EXPECT_EQ(r.per_env.at("b"), 0.5);
  EXPECT_EQ(r.mean, 0.75);
  EXPECT_EQ(r.excluded, (std::vector<std::string>{"c"}));

  std::vector<std::size_t> perm(scores.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
  std::vector<double> s2;
  std::vector<SampleMeta> m2;
  for (auto i : perm) {
    s2.push_back(scores[i]);
    m2.push_back(meta[i]);
  }
  const EnvAuc r2 = mean_env_auc(s2, m2);
  EXPECT_EQ(r2.per_env, r.per_env);
  EXPECT_EQ(r2.mean, r.mean);

  const std::vector<SampleMeta> lonely{m("z", Label::normal)};
  EXPECT_THROW(mean_env_auc(std::vector<double>{1.0}, lonely), Error);
}

TEST(MeanEnvAuc, SingleEnvironment) {
  const std::vector<SampleMeta> meta{m("x", Label::novel), m("x", Label::normal), m("x", Label::normal)};
  const std::vector<double> s{0.5, 0.7, 0.1};
  const EnvAuc r = mean_env_auc(s, meta);
  EXPECT_EQ(r.mean, r.per_env.at("x"));
  EXPECT_EQ(r.mean, 0.5);
}
