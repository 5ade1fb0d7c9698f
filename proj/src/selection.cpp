#include "stylist/selection.hpp"

#include <algorithm>
#include <set>

#include "stylist/error.hpp"
#include "stylist/metrics.hpp"
#include "stylist/text_io.hpp"

namespace stylist {

SelectionGrid::SelectionGrid() {
  for (int p = 5; p <= 100; p += 5) keep_percents_.push_back(p);
}

SelectionGrid::SelectionGrid(std::vector<int> keep_percents) : keep_percents_(std::move(keep_percents)) {
  if (keep_percents_.empty()) throw Error("grid: no keep percentages");
  std::sort(keep_percents_.begin(), keep_percents_.end());
  for (std::size_t i = 0; i < keep_percents_.size(); ++i) {
    const int p = keep_percents_[i];
    if (p <= 0 || p > 100) throw Error("grid: keep percentage " + std::to_string(p) + " outside (0, 100]");
    if (i > 0 && keep_percents_[i - 1] == p) throw Error("grid: duplicate keep percentage " + std::to_string(p));
  }
}

std::string_view to_string(Criterion c) { return c == Criterion::id_val ? "id_val" : "ood_oracle"; }

Criterion parse_criterion(std::string_view s) {
  if (s == "id_val") return Criterion::id_val;
  if (s == "ood_oracle") return Criterion::ood_oracle;
  throw Error("criterion: unknown value '" + std::string(s) + "'");
}

Split criterion_split(Criterion c) { return c == Criterion::id_val ? Split::val_id : Split::test_ood; }

std::size_t kept_count(std::size_t n_features, int keep_pct) {
  if (keep_pct <= 0 || keep_pct > 100) {
    throw Error("keep_pct: " + std::to_string(keep_pct) + " outside (0, 100]");
  }
  const std::size_t k = (n_features * static_cast<std::size_t>(keep_pct) + 50) / 100;
  return std::max<std::size_t>(1, k);
}

std::vector<std::size_t> select_features(const Ranking& ranking, int keep_pct, std::size_t n_features) {
  if (ranking.order.size() != n_features) {
    throw Error("select_features: ranking covers " + std::to_string(ranking.order.size()) + " features, expected " +
                std::to_string(n_features));
  }
  const std::size_t k = kept_count(n_features, keep_pct);
  std::vector<std::size_t> kept(ranking.order.end() - static_cast<std::ptrdiff_t>(k), ranking.order.end());
  std::sort(kept.begin(), kept.end());
  return kept;
}

void require_both_labels(const Dataset& dataset, Split split) {
  std::map<std::string, std::pair<bool, bool>> seen;
  for (std::size_t r : dataset.rows(split)) {
    const auto& m = dataset.meta(r);
    auto& s = seen[m.env];
    if (m.label == Label::normal) s.first = true;
    if (m.label == Label::novel) s.second = true;
  }
  if (seen.empty()) throw Error("split " + std::string(to_string(split)) + " is empty");
  for (const auto& [env, s] : seen) {
    if (!s.first || !s.second) {
      throw Error("split " + std::string(to_string(split)) + ": environment '" + env + "' is missing the " +
                  (s.first ? "novel" : "normal") + " class");
    }
  }
}

Curve sweep(const Dataset& dataset, const Ranking& ranking, const SelectionGrid& grid, const DetectorSpec& detector,
            Split split) {
  const auto train = dataset.rows(Split::train);
  std::vector<std::size_t> eval_rows;
  std::vector<SampleMeta> eval_meta;
  for (std::size_t r : dataset.rows(split)) {
    if (dataset.meta(r).label == Label::unknown) continue;
    eval_rows.push_back(r);
    eval_meta.push_back(dataset.meta(r));
  }
  if (eval_rows.empty()) throw Error("sweep: split " + std::string(to_string(split)) + " has no labeled rows");

  Curve curve;
  for (int pct : grid.keep_percents()) {
    const auto kept = select_features(ranking, pct, dataset.n_features());
    const auto model = FittedDetector::fit(detector, dataset.gather(train, kept));
    const auto scores = model.score(dataset.gather(eval_rows, kept));
    const EnvAuc auc = mean_env_auc(scores, eval_meta);
    curve.push_back(CurvePoint{pct, auc.mean, auc.per_env, auc.excluded});
  }
  return curve;
}

int argmax_keep_pct(const Curve& curve) {
  if (curve.empty()) throw Error("argmax_keep_pct: empty curve");
  const CurvePoint* best = &curve.front();
  for (const auto& p : curve) {
    if (p.mean_auc > best->mean_auc || (p.mean_auc == best->mean_auc && p.keep_pct > best->keep_pct)) best = &p;
  }
  return best->keep_pct;
}

PercentChoice choose_percent(const Dataset& dataset, const Ranking& ranking, const SelectionGrid& grid,
                             const DetectorSpec& detector, Criterion criterion) {
  const Split split = criterion_split(criterion);
  require_both_labels(dataset, split);
  PercentChoice out;
  out.curve = sweep(dataset, ranking, grid, detector, split);
  out.keep_pct = argmax_keep_pct(out.curve);
  return out;
}

std::string format_curve(const Curve& curve) {
  std::set<std::string> envs;
  for (const auto& p : curve) {
    for (const auto& [env, auc] : p.per_env) envs.insert(env);
  }
  std::string out = "keep_pct,auc_mean";
  for (const auto& e : envs) out += ",auc_" + e;
  out += '\n';
  for (const auto& p : curve) {
    out += std::to_string(p.keep_pct) + "," + text::format_double(p.mean_auc);
    for (const auto& e : envs) {
      auto it = p.per_env.find(e);
      out += ",";
      if (it != p.per_env.end()) out += text::format_double(it->second);
    }
    out += '\n';
  }
  return out;
}

}  // namespace stylist
