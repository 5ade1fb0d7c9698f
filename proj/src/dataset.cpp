#include "stylist/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "stylist/error.hpp"
#include "stylist/rng.hpp"
#include "stylist/text_io.hpp"

namespace stylist {

std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val_id: return "val_id";
    case Split::test_id: return "test_id";
    case Split::test_ood: return "test_ood";
  }
  return "?";
}

std::string_view to_string(Label l) {
  switch (l) {
    case Label::normal: return "normal";
    case Label::novel: return "novel";
    case Label::unknown: return "unknown";
  }
  return "?";
}

Split parse_split(std::string_view s) {
  s = text::trim(s);
  if (s == "train") return Split::train;
  if (s == "val_id") return Split::val_id;
  if (s == "test_id") return Split::test_id;
  if (s == "test_ood") return Split::test_ood;
  throw Error("split: unknown value '" + std::string(s) + "'");
}

Label parse_label(std::string_view s) {
  s = text::trim(s);
  if (s == "normal") return Label::normal;
  if (s == "novel") return Label::novel;
  if (s == "unknown") return Label::unknown;
  throw Error("label: unknown value '" + std::string(s) + "'");
}

Dataset::Dataset(FeatureMatrix values, std::vector<SampleMeta> meta)
    : values_(std::move(values)), meta_(std::move(meta)) {
  if (static_cast<std::size_t>(values_.rows()) != meta_.size()) {
    throw Error("dataset: metadata has " + std::to_string(meta_.size()) + " rows but matrix has " +
                std::to_string(values_.rows()));
  }
  if (values_.cols() == 0) throw Error("dataset: zero features");
  if (meta_.empty()) throw Error("dataset: zero samples");

  has_class_ = meta_.front().cls.has_value();
  std::unordered_set<std::string> ids;
  std::set<std::string> train_envs;
  for (std::size_t i = 0; i < meta_.size(); ++i) {
    const SampleMeta& m = meta_[i];
    if (!ids.insert(m.sample_id).second) {
      throw Error("dataset: duplicate sample_id '" + m.sample_id + "' at row " + std::to_string(i + 1));
    }
    if (m.cls.has_value() != has_class_) {
      throw Error("dataset: class column present for some rows only (row " + std::to_string(i + 1) + ")");
    }
    if (m.split == Split::train) {
      if (m.label != Label::normal) {
        throw Error("dataset: train row " + std::to_string(i + 1) + " ('" + m.sample_id +
                    "') must be labeled normal");
      }
      train_envs.insert(m.env);
    } else if (m.label == Label::unknown && m.split == Split::val_id) {
      throw Error("dataset: label unknown is only allowed for test splits (row " + std::to_string(i + 1) + ")");
    }
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
      if (!std::isfinite(values_(static_cast<Eigen::Index>(i), j))) {
        throw Error("dataset: non-finite value at row " + std::to_string(i + 1) + ", column f" +
                    std::to_string(j));
      }
    }
  }
  if (train_envs.size() < 2) {
    throw Error("dataset: need at least 2 train environments, found " + std::to_string(train_envs.size()));
  }
}

std::vector<std::size_t> Dataset::rows(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < meta_.size(); ++i) {
    if (meta_[i].split == split) out.push_back(i);
  }
  return out;
}

std::vector<std::string> Dataset::envs(Split split) const {
  std::set<std::string> s;
  for (const auto& m : meta_) {
    if (m.split == split) s.insert(m.env);
  }
  return {s.begin(), s.end()};
}

FeatureMatrix Dataset::gather(std::span<const std::size_t> rows, std::span<const std::size_t> cols) const {
  for (std::size_t c : cols) {
    if (c >= n_features()) throw Error("feature index " + std::to_string(c) + " out of range");
  }
  for (std::size_t r : rows) {
    if (r >= n_samples()) throw Error("row index " + std::to_string(r) + " out of range");
  }
  FeatureMatrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          values_(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c]));
    }
  }
  return out;
}

FeatureMatrix Dataset::gather(std::span<const std::size_t> rows) const {
  for (std::size_t r : rows) {
    if (r >= n_samples()) throw Error("row index " + std::to_string(r) + " out of range");
  }
  FeatureMatrix out(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

bool Dataset::operator==(const Dataset& other) const {
  return meta_ == other.meta_ && values_.rows() == other.values_.rows() &&
         values_.cols() == other.values_.cols() && values_ == other.values_;
}

Dataset parse_dataset(std::string_view text, std::string_view origin) {
  const std::string where(origin);
  std::vector<std::string_view> lines = text::split(text, '\n');
  while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(where + ": empty file");

  const auto header = text::split(text::trim(lines[0]));
  static constexpr std::string_view kFixed[] = {"sample_id", "env", "split", "label"};
  if (header.size() < 4) throw Error(where + ": header must start with sample_id,env,split,label");
  for (std::size_t i = 0; i < 4; ++i) {
    if (text::trim(header[i]) != kFixed[i]) {
      throw Error(where + ": header column " + std::to_string(i + 1) + " must be '" + std::string(kFixed[i]) + "'");
    }
  }
  std::size_t first_feature = 4;
  const bool has_class = header.size() > 4 && text::trim(header[4]) == "class";
  if (has_class) first_feature = 5;
  const std::size_t n_features = header.size() - first_feature;
  if (n_features == 0) throw Error(where + ": header declares no feature columns");
  for (std::size_t j = 0; j < n_features; ++j) {
    if (text::trim(header[first_feature + j]) != "f" + std::to_string(j)) {
      throw Error(where + ": header feature column " + std::to_string(j) + " must be named f" + std::to_string(j));
    }
  }

  const std::size_t n_rows = lines.size() - 1;
  FeatureMatrix values(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_features));
  std::vector<SampleMeta> meta;
  meta.reserve(n_rows);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const std::string row_tag = where + ": row " + std::to_string(r + 1) + " (line " + std::to_string(r + 2) + ")";
    const auto fields = text::split(text::trim(lines[r + 1]));
    if (fields.size() != header.size()) {
      throw Error(row_tag + ": expected " + std::to_string(header.size()) + " columns (" +
                  std::to_string(n_features) + " features), found " + std::to_string(fields.size()));
    }
    SampleMeta m;
    m.sample_id = std::string(text::trim(fields[0]));
    m.env = std::string(text::trim(fields[1]));
    try {
      m.split = parse_split(fields[2]);
      m.label = parse_label(fields[3]);
    } catch (const Error& e) {
      throw Error(row_tag + ": " + e.what());
    }
    if (has_class) m.cls = std::string(text::trim(fields[4]));
    for (std::size_t j = 0; j < n_features; ++j) {
      const std::string col = row_tag + ", column f" + std::to_string(j);
      const double v = text::parse_double(fields[first_feature + j], col);
      if (!std::isfinite(v)) throw Error(col + ": non-finite value");
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
    }
    meta.push_back(std::move(m));
  }
  try {
    return Dataset(std::move(values), std::move(meta));
  } catch (const Error& e) {
    throw Error(where + ": " + e.what());
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(text::read_file(path), path.string());
}

std::string format_dataset(const Dataset& dataset) {
  if (dataset.n_features() == 0) throw Error("dataset: cannot save zero features");
  std::string out = "sample_id,env,split,label";
  if (dataset.has_class_column()) out += ",class";
  for (std::size_t j = 0; j < dataset.n_features(); ++j) out += ",f" + std::to_string(j);
  out += '\n';
  const auto& v = dataset.values();
  for (std::size_t i = 0; i < dataset.n_samples(); ++i) {
    const SampleMeta& m = dataset.meta(i);
    out += m.sample_id;
    out += ',';
    out += m.env;
    out += ',';
    out += to_string(m.split);
    out += ',';
    out += to_string(m.label);
    if (m.cls) {
      out += ',';
      out += *m.cls;
    }
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      out += ',';
      out += text::format_double(v(static_cast<Eigen::Index>(i), j));
    }
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  text::write_file(path, format_dataset(dataset));
}

Dataset subset_features(const Dataset& dataset, std::span<const std::size_t> kept) {
  if (kept.empty()) throw Error("subset_features: kept set is empty");
  std::vector<bool> seen(dataset.n_features(), false);
  for (std::size_t idx : kept) {
    if (idx >= dataset.n_features()) {
      throw Error("subset_features: index " + std::to_string(idx) + " out of range for " +
                  std::to_string(dataset.n_features()) + " features");
    }
    if (seen[idx]) throw Error("subset_features: duplicate index " + std::to_string(idx));
    seen[idx] = true;
  }
  std::vector<std::size_t> all(dataset.n_samples());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return Dataset(dataset.gather(all, kept), dataset.meta());
}

Dataset rebalance_classes(const Dataset& dataset, std::uint64_t seed) {
  if (!dataset.has_class_column()) {
    std::cerr << "warning: rebalance_classes: no class column, dataset left unchanged\n";
    return dataset;
  }
  std::set<std::string> classes;
  std::map<std::string, std::map<std::string, std::vector<std::size_t>>> by_env;
  for (std::size_t i : dataset.rows(Split::train)) {
    const SampleMeta& m = dataset.meta(i);
    classes.insert(*m.cls);
    by_env[m.env][*m.cls].push_back(i);
  }

  Rng rng = substream(seed, "rebalance_classes");
  std::vector<bool> keep(dataset.n_samples(), true);
  for (auto& [env, groups] : by_env) {
    std::size_t min_count = std::numeric_limits<std::size_t>::max();
    for (const auto& c : classes) {
      auto it = groups.find(c);
      if (it == groups.end()) {
        throw Error("rebalance_classes: train environment '" + env + "' has no samples of class '" + c + "'");
      }
      min_count = std::min(min_count, it->second.size());
    }
    for (auto& [cls, members] : groups) {
      if (members.size() == min_count) continue;
      std::vector<std::size_t> shuffled = members;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (std::size_t k = min_count; k < shuffled.size(); ++k) keep[shuffled[k]] = false;
    }
  }

  std::vector<std::size_t> rows;
  std::vector<SampleMeta> meta;
  for (std::size_t i = 0; i < dataset.n_samples(); ++i) {
    if (!keep[i]) continue;
    rows.push_back(i);
    meta.push_back(dataset.meta(i));
  }
  return Dataset(dataset.gather(rows), std::move(meta));
}

}  // namespace stylist
