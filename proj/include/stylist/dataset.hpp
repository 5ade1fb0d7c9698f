#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stylist {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Split { train, val_id, test_id, test_ood };
enum class Label { normal, novel, unknown };

std::string_view to_string(Split s);
std::string_view to_string(Label l);
Split parse_split(std::string_view s);
Label parse_label(std::string_view s);

struct SampleMeta {
  std::string sample_id;
  std::string env;
  Split split = Split::train;
  Label label = Label::normal;
  /// Optional subgroup used only by rebalance_classes.
  std::optional<std::string> cls;

  bool operator==(const SampleMeta&) const = default;
};

/// Feature matrix plus aligned per-sample metadata. Immutable once built; the
/// constructor enforces every structural invariant.
class Dataset {
 public:
  Dataset(FeatureMatrix values, std::vector<SampleMeta> meta);

  std::size_t n_samples() const { return meta_.size(); }
  std::size_t n_features() const { return static_cast<std::size_t>(values_.cols()); }
  const FeatureMatrix& values() const { return values_; }
  const std::vector<SampleMeta>& meta() const { return meta_; }
  const SampleMeta& meta(std::size_t row) const { return meta_[row]; }
  bool has_class_column() const { return has_class_; }

  /// Row indices belonging to a split, in file order.
  std::vector<std::size_t> rows(Split split) const;
  /// Sorted distinct environment names among the rows of a split.
  std::vector<std::string> envs(Split split) const;

  /// Gathers the given rows and columns into a dense matrix.
  FeatureMatrix gather(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const;
  FeatureMatrix gather(std::span<const std::size_t> rows) const;

  bool operator==(const Dataset& other) const;

 private:
  FeatureMatrix values_;
  std::vector<SampleMeta> meta_;
  bool has_class_ = false;
};

Dataset load_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::string_view text, std::string_view origin = "<memory>");
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
std::string format_dataset(const Dataset& dataset);

/// Columns selected in the given order; metadata unchanged.
Dataset subset_features(const Dataset& dataset, std::span<const std::size_t> kept);

/// Down-samples each train environment so every class has the minimum class
/// count of that environment. A no-op (with a warning) without a class column.
Dataset rebalance_classes(const Dataset& dataset, std::uint64_t seed);

}  // namespace stylist
