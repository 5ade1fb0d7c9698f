#include "stylist/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "stylist/error.hpp"
#include "stylist/rng.hpp"
#include "stylist/text_io.hpp"

namespace stylist {

double SynthConfig::balanced_level() const {
  return static_cast<double>(majority_envs.size()) / static_cast<double>(envs_id.size());
}

void SynthConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) { throw Error(field + ": " + why); };
  if (n_content_feats == 0) fail("n_content_feats", "must be >= 1");
  if (n_style_feats == 0) fail("n_style_feats", "must be >= 1");
  if (envs_id.size() < 2) fail("envs_id", "need at least 2 ID environments");
  if (envs_ood.empty()) fail("envs_ood", "need at least 1 OOD environment");
  std::set<std::string> names;
  for (const auto* list : {&envs_id, &envs_ood}) {
    for (const auto& e : *list) {
      if (e.empty() || e.find(',') != std::string::npos) fail("envs", "invalid environment name '" + e + "'");
      if (!names.insert(e).second) fail("envs", "duplicate environment name '" + e + "'");
    }
  }
  if (majority_envs.empty()) fail("majority_envs", "must not be empty");
  std::set<std::string> maj(majority_envs.begin(), majority_envs.end());
  if (maj.size() != majority_envs.size()) fail("majority_envs", "duplicate entries");
  for (const auto& e : majority_envs) {
    if (std::find(envs_id.begin(), envs_id.end(), e) == envs_id.end()) {
      fail("majority_envs", "'" + e + "' is not an ID environment");
    }
  }
  if (majority_envs.size() >= envs_id.size()) fail("majority_envs", "must be a proper subset of envs_id");
  const double lo = balanced_level();
  if (!(spuriousness >= lo - 1e-12) || !(spuriousness < 1.0)) {
    fail("spuriousness", "must be in [" + text::format_double(lo) + ", 1), got " + text::format_double(spuriousness));
  }
  if (n_train < envs_id.size()) fail("n_train", "must be at least the number of ID environments");
  if (n_val < 2 * envs_id.size()) fail("n_val", "must cover both classes in every ID environment");
  if (n_test_id < 2 * envs_id.size()) fail("n_test_id", "must cover both classes in every ID environment");
  if (n_test_ood < 2 * envs_ood.size()) fail("n_test_ood", "must cover both classes in every OOD environment");
  if (!(content_sep >= 0.0) || !std::isfinite(content_sep)) fail("content_sep", "must be finite and >= 0");
  if (!(style_sep >= 0.0) || !std::isfinite(style_sep)) fail("style_sep", "must be finite and >= 0");
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) fail("noise_sigma", "must be finite and > 0");
}

std::vector<double> train_env_probabilities(const SynthConfig& config) {
  const double n_maj = static_cast<double>(config.majority_envs.size());
  const double n_min = static_cast<double>(config.envs_id.size() - config.majority_envs.size());
  std::vector<double> p;
  for (const auto& e : config.envs_id) {
    const bool major =
        std::find(config.majority_envs.begin(), config.majority_envs.end(), e) != config.majority_envs.end();
    p.push_back(major ? config.spuriousness / n_maj : (1.0 - config.spuriousness) / n_min);
  }
  return p;
}

namespace {

struct Centers {
  Eigen::VectorXd content_novel;           // content_normal is the origin
  std::vector<Eigen::VectorXd> style_id;   // per envs_id
  std::vector<Eigen::VectorXd> style_ood;  // per envs_ood
};

Centers draw_centers(const SynthConfig& c) {
  Rng rng = substream(c.seed, "synthgen/centers");
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> style(0.0, 1.0);
  Centers out;
  // Sign vector of norm sqrt(n_content), scaled to the requested gap.
  out.content_novel.resize(static_cast<Eigen::Index>(c.n_content_feats));
  for (Eigen::Index i = 0; i < out.content_novel.size(); ++i) {
    out.content_novel(i) = (coin(rng) ? 1.0 : -1.0) * c.content_sep * c.noise_sigma;
  }
  auto draw_style = [&] {
    Eigen::VectorXd v(static_cast<Eigen::Index>(c.n_style_feats));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = c.style_sep * style(rng);
    return v;
  };
  for (std::size_t e = 0; e < c.envs_id.size(); ++e) out.style_id.push_back(draw_style());
  for (std::size_t e = 0; e < c.envs_ood.size(); ++e) out.style_ood.push_back(draw_style());
  return out;
}

Eigen::MatrixXd draw_mixing(const SynthConfig& c) {
  const Eigen::Index d = static_cast<Eigen::Index>(c.n_features());
  if (!c.entangled) return Eigen::MatrixXd::Identity(d, d);
  Rng rng = substream(c.seed, "synthgen/mixing");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Sign fix makes the draw Haar-distributed.
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

struct Rows {
  std::vector<Eigen::VectorXd> x;
  std::vector<SampleMeta> meta;
};

void emit(Rows& rows, const SynthConfig& c, const Centers& centers, const Eigen::MatrixXd& mixing, Rng& noise,
          Split split, std::size_t index, const std::string& env, const Eigen::VectorXd& style_center, Label label) {
  std::normal_distribution<double> normal(0.0, c.noise_sigma);
  const Eigen::Index nc = static_cast<Eigen::Index>(c.n_content_feats);
  const Eigen::Index ns = static_cast<Eigen::Index>(c.n_style_feats);
  Eigen::VectorXd f(nc + ns);
  for (Eigen::Index i = 0; i < nc; ++i) {
    f(i) = (label == Label::novel ? centers.content_novel(i) : 0.0) + normal(noise);
  }
  for (Eigen::Index i = 0; i < ns; ++i) f(nc + i) = style_center(i) + normal(noise);
  if (c.entangled) f = mixing * f;
  rows.x.push_back(std::move(f));

  char id[64];
  std::snprintf(id, sizeof(id), "%s-%06zu", std::string(to_string(split)).c_str(), index);
  rows.meta.push_back(SampleMeta{id, env, split, label, std::nullopt});
}

// Balanced (environment, label) strata visited round-robin.
void emit_eval_split(Rows& rows, const SynthConfig& c, const Centers& centers, const Eigen::MatrixXd& mixing,
                     Split split, std::size_t n, const std::vector<std::string>& envs,
                     const std::vector<Eigen::VectorXd>& style) {
  Rng noise = substream(c.seed, "synthgen/" + std::string(to_string(split)));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t stratum = i % (2 * envs.size());
    const std::size_t e = stratum / 2;
    const Label label = stratum % 2 == 0 ? Label::normal : Label::novel;
    emit(rows, c, centers, mixing, noise, split, i, envs[e], style[e], label);
  }
}

}  // namespace

SynthOutput generate(const SynthConfig& config) {
  config.validate();
  const Centers centers = draw_centers(config);
  const Eigen::MatrixXd mixing = draw_mixing(config);

  Rows rows;
  {
    Rng assign = substream(config.seed, "synthgen/train_assign");
    Rng noise = substream(config.seed, "synthgen/train_noise");
    const auto probs = train_env_probabilities(config);
    std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
    for (std::size_t i = 0; i < config.n_train; ++i) {
      const std::size_t e = pick(assign);
      emit(rows, config, centers, mixing, noise, Split::train, i, config.envs_id[e], centers.style_id[e],
           Label::normal);
    }
  }
  emit_eval_split(rows, config, centers, mixing, Split::val_id, config.n_val, config.envs_id, centers.style_id);
  emit_eval_split(rows, config, centers, mixing, Split::test_id, config.n_test_id, config.envs_id, centers.style_id);
  emit_eval_split(rows, config, centers, mixing, Split::test_ood, config.n_test_ood, config.envs_ood,
                  centers.style_ood);

  FeatureMatrix values(static_cast<Eigen::Index>(rows.x.size()), static_cast<Eigen::Index>(config.n_features()));
  for (std::size_t r = 0; r < rows.x.size(); ++r) values.row(static_cast<Eigen::Index>(r)) = rows.x[r].transpose();

  std::vector<bool> mask(config.n_features(), false);
  std::fill(mask.begin() + static_cast<std::ptrdiff_t>(config.n_content_feats), mask.end(), true);
  return SynthOutput{Dataset(std::move(values), std::move(rows.meta)), std::move(mask), config.entangled, mixing};
}

std::vector<SynthOutput> spuriousness_suite(const SynthConfig& base, const std::vector<double>& levels) {
  if (levels.empty()) throw Error("spuriousness_suite: no levels");
  std::vector<SynthOutput> out;
  for (double s : levels) {
    SynthConfig c = base;
    c.spuriousness = s;
    out.push_back(generate(c));
  }
  return out;
}

std::string format_mask(const std::vector<bool>& mask) {
  std::string out = "feature_index,is_style\n";
  for (std::size_t i = 0; i < mask.size(); ++i) out += std::to_string(i) + (mask[i] ? ",1\n" : ",0\n");
  return out;
}

std::vector<bool> parse_mask(std::string_view contents, std::string_view origin) {
  const std::string where(origin);
  auto lines = text::split(contents, '\n');
  while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty() || text::trim(lines[0]) != "feature_index,is_style") {
    throw Error(where + ": expected header 'feature_index,is_style'");
  }
  std::vector<bool> mask(lines.size() - 1, false);
  std::vector<bool> seen(mask.size(), false);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::string tag = where + ": row " + std::to_string(k);
    const auto f = text::split(text::trim(lines[k]));
    if (f.size() != 2) throw Error(tag + ": expected 2 columns");
    const long long idx = text::parse_int(f[0], tag + " feature_index");
    const long long flag = text::parse_int(f[1], tag + " is_style");
    if (idx < 0 || static_cast<std::size_t>(idx) >= mask.size() || seen[static_cast<std::size_t>(idx)]) {
      throw Error(tag + ": feature_index out of range or repeated");
    }
    if (flag != 0 && flag != 1) throw Error(tag + ": is_style must be 0 or 1");
    seen[static_cast<std::size_t>(idx)] = true;
    mask[static_cast<std::size_t>(idx)] = flag == 1;
  }
  return mask;
}

}  // namespace stylist
