#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "stylist/distribution.hpp"
#include "stylist/error.hpp"

using namespace stylist;

namespace {

FeatureEdges edges(double lo, double hi, std::size_t bins) {
  return FeatureEdges{lo, (hi - lo) / static_cast<double>(bins), bins};
}

Histogram hist(std::vector<double> mass, FeatureEdges e) {
  Histogram h;
  h.edges = e;
  h.mass = std::move(mass);
  h.support_count = 1;
  return h;
}

}  // namespace

TEST(Binning, UniformPartitionOfTrainRange) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> envs;
  for (int i = 0; i <= 10; ++i) {
    rows.push_back({static_cast<double>(i), 3.0});
    envs.push_back(i % 2 ? "a" : "b");
  }
  const auto scheme = make_binning(fixture::train_only(rows, envs), 10);
  const auto& f0 = scheme.feature(0);
  for (std::size_t k = 0; k <= 10; ++k) EXPECT_DOUBLE_EQ(f0.edge(k), static_cast<double>(k));
  const auto& f1 = scheme.feature(1);  // constant feature
  EXPECT_DOUBLE_EQ(f1.edge(0), 2.5);
  EXPECT_DOUBLE_EQ(f1.hi(), 3.5);
  EXPECT_EQ(f1.bins, 10u);
  EXPECT_THROW(make_binning(fixture::train_only(rows, envs), 1), Error);
}

TEST(Binning, EdgesIgnoreNonTrainRows) {
  const Dataset d = fixture::make({{0.0}, {1.0}, {100.0}}, {"a", "b", "c"},
                                  {Split::train, Split::train, Split::test_ood},
                                  {Label::normal, Label::normal, Label::novel});
  EXPECT_DOUBLE_EQ(make_binning(d, 4).feature(0).hi(), 1.0);
}

TEST(Histogram, BinAssignmentAndClamping) {
  const auto e2 = edges(0, 2, 2);
  EXPECT_EQ(build_histogram(std::vector<double>{0.5, 0.5, 1.5, 1.5}, e2).mass, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(build_histogram(std::vector<double>{5.0}, e2).mass, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(build_histogram(std::vector<double>{-5.0}, e2).mass, (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(build_histogram(std::vector<double>{2.0}, e2).mass, (std::vector<double>{0.0, 1.0}));  // hi edge
  const auto h = build_histogram(std::vector<double>{0.0, 0.0, 0.0}, edges(0, 5, 5));
  EXPECT_EQ(h.mass, (std::vector<double>{1, 0, 0, 0, 0}));
  EXPECT_EQ(h.support_count, 3u);
  EXPECT_THROW(build_histogram(std::vector<double>{}, e2), Error);
}

TEST(Wasserstein, HistogramExamples) {
  const auto e2 = edges(0, 2, 2);
  EXPECT_DOUBLE_EQ(wasserstein1_hist(hist({1, 0}, e2), hist({0, 1}, e2)), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein1_hist(hist({0.3, 0.7}, e2), hist({0.3, 0.7}, e2)), 0.0);
  const auto e4 = edges(0, 4, 4);
  EXPECT_DOUBLE_EQ(wasserstein1_hist(hist({0.5, 0.5, 0, 0}, e4), hist({0, 0, 0.5, 0.5}, e4)), 2.0);
  // Both agree with the exact-sample oracle on bin centers.
  EXPECT_DOUBLE_EQ(wasserstein1_exact(std::vector<double>{0.5}, std::vector<double>{1.5}), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein1_exact(std::vector<double>{0.5, 1.5}, std::vector<double>{2.5, 3.5}), 2.0);
  EXPECT_THROW(wasserstein1_hist(hist({1, 0}, e2), hist({0, 1}, edges(0, 3, 2))), Error);
}

TEST(Wasserstein, ExactExamples) {
  EXPECT_EQ(wasserstein1_exact(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_EQ(wasserstein1_exact(std::vector<double>{0, 2}, std::vector<double>{1, 3}), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein1_exact(std::vector<double>{0}, std::vector<double>{0, 4}), 2.0);
  EXPECT_NEAR(oracle::wasserstein_quadrature({0}, {0, 4}, 1000000), 2.0, 1e-9);
  EXPECT_THROW(wasserstein1_exact(std::vector<double>{}, std::vector<double>{1}), Error);
}

TEST(Wasserstein, ExactMatchesQuadratureOnUnequalSizes) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> a(3 + t), b(7 + 2 * t);
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = normal(rng) + 0.5;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    // Every breakpoint is a multiple of 1/(n*m); a quadrature grid that is a
    // multiple of n*m integrates the step function exactly.
    const std::size_t steps = a.size() * b.size() * 64;
    EXPECT_NEAR(wasserstein1_exact(a, b), oracle::wasserstein_quadrature(a, b, steps), 1e-12);
  }
}

TEST(Wasserstein, SymmetricAndShiftInvariant) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a(200), b(300);
    for (auto& x : a) x = normal(rng);
    for (auto& x : b) x = 1.5 * normal(rng) + 0.3;
    const auto e = edges(-6, 6, 64);
    const auto ha = build_histogram(a, e), hb = build_histogram(b, e);
    EXPECT_EQ(wasserstein1_hist(ha, hb), wasserstein1_hist(hb, ha));
    EXPECT_GE(wasserstein1_hist(ha, hb), 0.0);
    // Shift both samples and the edges by the same constant.
    const double c = 0.25 * t;
    for (auto& x : a) x += c;
    for (auto& x : b) x += c;
    const FeatureEdges shifted{e.lo + c, e.width, e.bins};
    EXPECT_NEAR(wasserstein1_hist(build_histogram(a, shifted), build_histogram(b, shifted)),
                wasserstein1_hist(ha, hb), 1e-12);
  }
}

TEST(SymmetricKl, ClosedFormValue) {
  const auto e2 = edges(0, 2, 2);
  const double eps = 1e-12;
  const long double norm = 1.0L + 2.0L * eps;
  const long double p[2] = {(0.5L + eps) / norm, (0.5L + eps) / norm};
  const long double q[2] = {(0.9L + eps) / norm, (0.1L + eps) / norm};
  long double expected = 0.0L;
  for (int k = 0; k < 2; ++k) expected += p[k] * std::log(p[k] / q[k]) + q[k] * std::log(q[k] / p[k]);
  const double got = symmetric_kl(hist({0.5, 0.5}, e2), hist({0.9, 0.1}, e2), eps);
  EXPECT_NEAR(got, static_cast<double>(expected), 1e-12);
  EXPECT_NEAR(got, 0.878890, 5e-6);
  EXPECT_EQ(got, symmetric_kl(hist({0.9, 0.1}, e2), hist({0.5, 0.5}, e2), eps));
  EXPECT_EQ(symmetric_kl(hist({0.2, 0.8}, e2), hist({0.2, 0.8}, e2)), 0.0);
  EXPECT_THROW(symmetric_kl(hist({1, 0}, e2), hist({0, 1}, e2), 0.0), Error);
  EXPECT_TRUE(std::isfinite(symmetric_kl(hist({1, 0}, e2), hist({0, 1}, e2))));
}
