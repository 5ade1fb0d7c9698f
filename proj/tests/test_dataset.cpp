#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "stylist/dataset.hpp"
#include "stylist/error.hpp"
#include "stylist/text_io.hpp"

using namespace stylist;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "stylist_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

const char* kSixRows =
    "sample_id,env,split,label,f0,f1\n"
    "a1,a,train,normal,0.5,1\n"
    "b1,b,train,normal,1.5,-2e-3\n"
    "c1,c,train,normal,2,3\n"
    "a2,a,val_id,novel,0,0\n"
    "b2,b,val_id,normal,1,1\n"
    "c2,c,test_ood,novel,4.25,1E2\n";

}  // namespace

TEST(Dataset, ParsesHandWrittenFixture) {
  const Dataset d = parse_dataset(kSixRows);
  ASSERT_EQ(d.n_samples(), 6u);
  ASSERT_EQ(d.n_features(), 2u);
  EXPECT_EQ(d.envs(Split::train), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(d.meta(0), (SampleMeta{"a1", "a", Split::train, Label::normal, std::nullopt}));
  EXPECT_EQ(d.meta(3), (SampleMeta{"a2", "a", Split::val_id, Label::novel, std::nullopt}));
  EXPECT_EQ(d.meta(5), (SampleMeta{"c2", "c", Split::test_ood, Label::novel, std::nullopt}));
  EXPECT_DOUBLE_EQ(d.values()(1, 1), -0.002);
  EXPECT_DOUBLE_EQ(d.values()(5, 1), 100.0);
  EXPECT_EQ(d.rows(Split::val_id), (std::vector<std::size_t>{3, 4}));
}

TEST(Dataset, ShortRowIsReportedByRowNumber) {
  std::string text = "sample_id,env,split,label";
  for (int j = 0; j < 512; ++j) text += ",f" + std::to_string(j);
  text += "\n";
  for (int r = 1; r <= 8; ++r) {
    text += "s" + std::to_string(r) + (r % 2 ? ",a" : ",b") + ",train,normal";
    const int cols = r == 7 ? 511 : 512;
    for (int j = 0; j < cols; ++j) text += ",0.1";
    text += "\n";
  }
  try {
    parse_dataset(text);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 7"), std::string::npos) << e.what();
  }
}

TEST(Dataset, RejectsInvalidContent) {
  const std::string head = "sample_id,env,split,label,f0\n";
  EXPECT_THROW(parse_dataset(head + "x,a,train,normal,1\nx,b,train,normal,2\n"), Error);     // duplicate id
  EXPECT_THROW(parse_dataset(head + "x,a,train,novel,1\ny,b,train,normal,2\n"), Error);      // novel train row
  EXPECT_THROW(parse_dataset(head + "x,a,train,normal,1\ny,a,train,normal,2\n"), Error);     // one train env
  EXPECT_THROW(parse_dataset(head + "x,a,train,normal,nan\ny,b,train,normal,2\n"), Error);   // non-finite
  EXPECT_THROW(parse_dataset(head + "x,a,train,normal,inf\ny,b,train,normal,2\n"), Error);
  EXPECT_THROW(parse_dataset(head + "x,a,train,normal,abc\ny,b,train,normal,2\n"), Error);
  EXPECT_THROW(parse_dataset(head + "x,a,train,normal,1\ny,b,val_id,unknown,2\nz,c,train,normal,1\n"), Error);
  EXPECT_THROW(parse_dataset(head + "x,a,training,normal,1\ny,b,train,normal,2\n"), Error);
  EXPECT_THROW(parse_dataset("sample_id,env,split,label\nx,a,train,normal\n"), Error);  // no features
  EXPECT_NO_THROW(parse_dataset(head + "x,a,train,normal,1\ny,b,train,normal,2\nz,c,test_ood,unknown,3\n"));
  EXPECT_THROW(load_dataset("/nonexistent/file.csv"), Error);
}

TEST(Dataset, NonFiniteErrorNamesRowAndColumn) {
  try {
    parse_dataset("sample_id,env,split,label,f0,f1\nx,a,train,normal,1,2\ny,b,train,normal,3,nan\n");
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("f1"), std::string::npos) << msg;
  }
}

TEST(Dataset, SaveLoadRoundTripIsExact) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 1e3);
  FeatureMatrix m(20, 5);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng) * std::pow(10.0, static_cast<double>(j) - 2.0);
  std::vector<SampleMeta> meta;
  for (int i = 0; i < 20; ++i) {
    const Split s = i < 10 ? Split::train : (i < 15 ? Split::val_id : Split::test_ood);
    const Label l = s == Split::train ? Label::normal : (i % 2 ? Label::novel : Label::normal);
    meta.push_back({"id" + std::to_string(i), "e" + std::to_string(i % 3), s, l, "c" + std::to_string(i % 2)});
  }
  const Dataset d(m, meta);
  const auto path = temp_path("roundtrip.csv");
  save_dataset(d, path);
  const Dataset back = load_dataset(path);
  EXPECT_TRUE(back == d);
  EXPECT_TRUE(back.has_class_column());
  save_dataset(back, temp_path("roundtrip2.csv"));
  EXPECT_EQ(text::read_file(path), text::read_file(temp_path("roundtrip2.csv")));
}

TEST(Dataset, OneRowPerLine) {
  const Dataset d = fixture::train_only({{1.0}, {2.0}}, {"a", "b"});
  const std::string text = format_dataset(d);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(text, "sample_id,env,split,label,f0\ns0,a,train,normal,1\ns1,b,train,normal,2\n");
}

TEST(Dataset, ZeroFeaturesRejected) {
  std::vector<SampleMeta> meta{{"a", "x", Split::train, Label::normal, {}}, {"b", "y", Split::train, Label::normal, {}}};
  EXPECT_THROW(Dataset(FeatureMatrix(2, 0), meta), Error);
}

TEST(SubsetFeatures, SelectsColumnsInGivenOrder) {
  const Dataset d = fixture::train_only({{0, 1, 2, 3}, {4, 5, 6, 7}}, {"a", "b"});
  const std::vector<std::size_t> kept{2, 0};
  const Dataset s = subset_features(d, kept);
  ASSERT_EQ(s.n_features(), 2u);
  for (Eigen::Index i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < kept.size(); ++j) {
      EXPECT_EQ(s.values()(i, static_cast<Eigen::Index>(j)), d.values()(i, static_cast<Eigen::Index>(kept[j])));
    }
  }
  EXPECT_EQ(s.meta(), d.meta());

  const std::vector<std::size_t> all{0, 1, 2, 3};
  EXPECT_TRUE(subset_features(d, all) == d);
  EXPECT_THROW(subset_features(d, std::vector<std::size_t>{}), Error);
  EXPECT_THROW(subset_features(d, std::vector<std::size_t>{4}), Error);
  EXPECT_THROW(subset_features(d, std::vector<std::size_t>{1, 1}), Error);
}

namespace {

Dataset class_fixture(int a_count, int b_count) {
  std::vector<std::vector<double>> rows;
  std::vector<SampleMeta> meta;
  FeatureMatrix m(2 * (a_count + b_count) + 2, 1);
  int idx = 0;
  for (const std::string env : {"e1", "e2"}) {
    for (int i = 0; i < a_count + b_count; ++i) {
      m(idx, 0) = idx;
      meta.push_back({"id" + std::to_string(idx), env, Split::train, Label::normal, i < a_count ? "A" : "B"});
      ++idx;
    }
  }
  for (int i = 0; i < 2; ++i) {
    m(idx, 0) = idx;
    meta.push_back({"t" + std::to_string(i), "e1", Split::test_ood, i ? Label::novel : Label::normal, "A"});
    ++idx;
  }
  return Dataset(m, meta);
}

std::map<std::pair<std::string, std::string>, int> counts(const Dataset& d) {
  std::map<std::pair<std::string, std::string>, int> c;
  for (std::size_t r : d.rows(Split::train)) ++c[{d.meta(r).env, *d.meta(r).cls}];
  return c;
}

}  // namespace

TEST(RebalanceClasses, BalancedIsUnchanged) {
  const Dataset d = class_fixture(10, 10);
  EXPECT_TRUE(rebalance_classes(d, 3) == d);
}

TEST(RebalanceClasses, DownSamplesToMinimum) {
  const Dataset d = class_fixture(100, 20);
  const Dataset r = rebalance_classes(d, 3);
  for (const auto& [key, n] : counts(r)) EXPECT_EQ(n, 20) << key.first << "/" << key.second;
  EXPECT_EQ(r.rows(Split::test_ood).size(), 2u);
  // Never increases any count and keeps non-train rows verbatim.
  const auto before = counts(d);
  for (const auto& [key, n] : counts(r)) EXPECT_LE(n, before.at(key));
  const auto test_rows = r.rows(Split::test_ood);
  EXPECT_EQ(r.meta(test_rows[0]), d.meta(d.rows(Split::test_ood)[0]));
}

TEST(RebalanceClasses, DeterministicUnderSeed) {
  const Dataset d = class_fixture(100, 20);
  auto ids = [](const Dataset& x) {
    std::vector<std::string> out;
    for (const auto& m : x.meta()) out.push_back(m.sample_id);
    return out;
  };
  EXPECT_EQ(ids(rebalance_classes(d, 11)), ids(rebalance_classes(d, 11)));
  EXPECT_NE(ids(rebalance_classes(d, 11)), ids(rebalance_classes(d, 12)));
}

TEST(RebalanceClasses, EmptyClassInEnvironmentIsAnError) {
  FeatureMatrix m(3, 1);
  m << 1, 2, 3;
  std::vector<SampleMeta> meta{{"a", "e1", Split::train, Label::normal, "A"},
                               {"b", "e1", Split::train, Label::normal, "B"},
                               {"c", "e2", Split::train, Label::normal, "A"}};
  EXPECT_THROW(rebalance_classes(Dataset(m, meta), 0), Error);
}

TEST(RebalanceClasses, NoClassColumnIsNoOp) {
  const Dataset d = fixture::train_only({{1}, {2}, {3}}, {"a", "b", "b"});
  EXPECT_TRUE(rebalance_classes(d, 0) == d);
}
