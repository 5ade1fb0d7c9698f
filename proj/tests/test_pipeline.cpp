#include <gtest/gtest.h>

#include <numeric>

#include "stylist/pipeline.hpp"
#include "stylist/synthgen.hpp"

using namespace stylist;

namespace {

SynthConfig small() {
  SynthConfig c;
  c.n_content_feats = 8;
  c.n_style_feats = 8;
  c.n_train = 600;
  c.n_val = 200;
  c.n_test_id = 100;
  c.n_test_ood = 200;
  return c;
}

}  // namespace

TEST(Pipeline, SingletonGridHasZeroDelta) {
  const Dataset d = generate(small()).dataset;
  PipelineConfig cfg;
  cfg.grid = SelectionGrid({100});
  const EvalReport r = run_pipeline(d, cfg);
  EXPECT_EQ(r.chosen_keep_pct, 100);
  EXPECT_EQ(r.delta, 0.0);
  EXPECT_EQ(r.mean_auc, r.baseline_auc);
}

TEST(Pipeline, DeltaIsExactDifferenceAndDeterministic) {
  const Dataset d = generate(small()).dataset;
  PipelineConfig cfg;
  cfg.grid = SelectionGrid({25, 50, 75, 100});
  const EvalReport a = run_pipeline(d, cfg);
  EXPECT_EQ(a.delta, a.mean_auc - a.baseline_auc);
  EXPECT_EQ(a.curve.back().mean_auc, a.baseline_auc);
  for (const auto& p : a.curve) {
    EXPECT_GE(p.mean_auc, 0.0);
    EXPECT_LE(p.mean_auc, 1.0);
  }
  EXPECT_EQ(to_json(a), to_json(run_pipeline(d, cfg)));
  EXPECT_EQ(a.ranker, "stylist");
  EXPECT_EQ(a.distance, "wasserstein");
}

TEST(Pipeline, CriteriaShareTheOodCurve) {
  const Dataset d = generate(small()).dataset;
  PipelineConfig cfg;
  cfg.grid = SelectionGrid({25, 50, 75, 100});
  const EvalReport v = run_pipeline(d, cfg);
  cfg.criterion = Criterion::ood_oracle;
  const EvalReport o = run_pipeline(d, cfg);
  ASSERT_EQ(v.curve.size(), o.curve.size());
  for (std::size_t i = 0; i < v.curve.size(); ++i) EXPECT_EQ(v.curve[i].mean_auc, o.curve[i].mean_auc);
  EXPECT_GE(o.mean_auc, v.mean_auc);
}

TEST(Pipeline, BaselineWithoutFullGridPoint) {
  const Dataset d = generate(small()).dataset;
  PipelineConfig cfg;
  cfg.grid = SelectionGrid({100});
  const double base = run_pipeline(d, cfg).baseline_auc;
  cfg.grid = SelectionGrid({50});
  const EvalReport r = run_pipeline(d, cfg);
  EXPECT_EQ(r.baseline_auc, base);
  EXPECT_EQ(r.chosen_keep_pct, 50);
}

TEST(Pipeline, JsonKeys) {
  const Dataset d = generate(small()).dataset;
  PipelineConfig cfg;
  cfg.grid = SelectionGrid({50, 100});
  const std::string j = to_json(run_pipeline(d, cfg));
  for (const char* key : {"\"method\"", "\"per_env_auc\"", "\"mean_auc\"", "\"baseline_auc\"", "\"delta\"",
                          "\"chosen_keep_pct\"", "\"curve\"", "\"seed\"", "\"excluded_envs\""})
    EXPECT_NE(j.find(key), std::string::npos) << key;
}

TEST(Pipeline, PcaProjectionSweepFullMatchesSelection) {
  const Dataset d = generate(small()).dataset;
  std::vector<std::size_t> all(d.n_features());
  std::iota(all.begin(), all.end(), 0);
  const DetectorSpec det{DetectorKind::knn, 10};
  const Curve pca = pca_projection_sweep(d, all, SelectionGrid({50, 100}), det, Split::test_ood);
  ASSERT_EQ(pca.size(), 2u);
  // All components is a rotation of the centered data: kNN distances are preserved.
  PipelineConfig cfg;
  cfg.grid = SelectionGrid({100});
  EXPECT_NEAR(pca[1].mean_auc, run_pipeline(d, cfg).baseline_auc, 1e-6);
}

TEST(Pipeline, FormatScores) {
  const Dataset d = generate(small()).dataset;
  const auto rows = d.rows(Split::test_ood);
  std::vector<double> s(rows.size(), 0.5);
  const std::string text = format_scores(d, rows, s);
  EXPECT_EQ(text.rfind("sample_id,env,label,score\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), rows.size() + 1);
}
