#pragma once

// Gap-acceptance classifiers: a cubic-kernel SVM with Platt-calibrated
// probabilities, and two baselines (regularized logistic regression and a
// per-feature conditional-probability model). All three share a
// z-normalization layer fitted on the training split.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "crosswalk/errors.hpp"
#include "crosswalk/features.hpp"
#include "crosswalk/metrics.hpp"
#include "crosswalk/rng.hpp"
#include "crosswalk/svm.hpp"

namespace crosswalk {

enum class GapModelKind { SvmPoly3, Logistic, CondProb };

inline std::string_view gap_model_kind_name(GapModelKind kind) {
  switch (kind) {
    case GapModelKind::SvmPoly3: return "svm_poly3";
    case GapModelKind::Logistic: return "logistic";
    case GapModelKind::CondProb: return "cond_prob";
  }
  return "?";
}

inline GapModelKind gap_model_kind_from_name(std::string_view name) {
  if (name == "svm_poly3" || name == "svm") return GapModelKind::SvmPoly3;
  if (name == "logistic") return GapModelKind::Logistic;
  if (name == "cond_prob" || name == "condprob") return GapModelKind::CondProb;
  throw ConfigError("unknown gap model kind: " + std::string(name));
}

// Per-feature z-normalization. Constant features pass through centered with
// unit scale so they stay uninformative instead of exploding.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Normalization fit(const std::vector<std::vector<double>>& rows) {
    const std::size_t dim = rows.front().size();
    const double n = static_cast<double>(rows.size());
    Normalization norm;
    norm.mean.assign(dim, 0.0);
    norm.stddev.assign(dim, 0.0);
    for (const auto& row : rows) {
      for (std::size_t d = 0; d < dim; ++d) norm.mean[d] += row[d];
    }
    for (std::size_t d = 0; d < dim; ++d) norm.mean[d] /= n;
    for (const auto& row : rows) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double c = row[d] - norm.mean[d];
        norm.stddev[d] += c * c;
      }
    }
    for (std::size_t d = 0; d < dim; ++d) {
      norm.stddev[d] = std::sqrt(norm.stddev[d] / n);
      if (norm.stddev[d] < 1e-12) norm.stddev[d] = 1.0;
    }
    return norm;
  }

  std::vector<double> apply(std::span<const double> row) const {
    std::vector<double> out(row.size());
    for (std::size_t d = 0; d < row.size(); ++d) out[d] = (row[d] - mean[d]) / stddev[d];
    return out;
  }
};

struct LogisticConfig {
  double l2 = 1e-3;
  int max_iter = 200;
  double tol = 1e-9;
};

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;

  double probability(std::span<const double> x) const {
    double z = bias;
    for (std::size_t d = 0; d < x.size(); ++d) z += weights[d] * x[d];
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }
};

struct CondProbConfig {
  int bins = 10;
  double smoothing = 1.0;
};

// Naive per-feature likelihood model: class-conditional histograms with
// Laplace smoothing, combined under an independence assumption.
struct CondProbModel {
  int bins = 10;
  double prior_accepted = 0.5;
  std::vector<double> lo;  // per-feature bin range
  std::vector<double> hi;
  std::vector<std::vector<double>> p_accepted;  // [feature][bin]
  std::vector<std::vector<double>> p_rejected;

  int bin_of(std::size_t d, double v) const {
    const double width = hi[d] > lo[d] ? hi[d] - lo[d] : 1.0;
    const int b = static_cast<int>((v - lo[d]) / width * bins);
    return std::clamp(b, 0, bins - 1);
  }

  double probability(std::span<const double> x) const {
    double log_a = std::log(prior_accepted);
    double log_r = std::log(1.0 - prior_accepted);
    for (std::size_t d = 0; d < x.size(); ++d) {
      const int b = bin_of(d, x[d]);
      log_a += std::log(p_accepted[d][static_cast<std::size_t>(b)]);
      log_r += std::log(p_rejected[d][static_cast<std::size_t>(b)]);
    }
    const double m = std::max(log_a, log_r);
    const double ea = std::exp(log_a - m);
    const double er = std::exp(log_r - m);
    return ea / (ea + er);
  }
};

struct GapModelHyper {
  SvmConfig svm{};
  LogisticConfig logistic{};
  CondProbConfig cond_prob{};
  int calibration_folds = 5;
};

struct GapModel {
  GapModelKind kind = GapModelKind::SvmPoly3;
  Normalization norm;
  std::vector<int> active_features;  // indices into the full feature vector

  SvmModel svm;
  PlattSigmoid platt;
  LogisticModel logistic;
  CondProbModel cond_prob;

  // Optional start-of-crossing transition fit carried with the model.
  double start_delay_rate = 0.0;  // 0 = not fitted
  double start_speed_mean = 0.0;
  double start_speed_std = 0.0;

  std::vector<double> select(const FeatureVector& f) const {
    const auto full = f.to_array();
    std::vector<double> row;
    row.reserve(active_features.size());
    for (int idx : active_features) row.push_back(full[static_cast<std::size_t>(idx)]);
    return row;
  }

  double predict(const FeatureVector& f) const {
    const std::vector<double> raw = select(f);
    if (kind == GapModelKind::CondProb) return cond_prob.probability(raw);
    const std::vector<double> x = norm.apply(raw);
    if (kind == GapModelKind::SvmPoly3) return platt(svm.decision_value(x));
    return logistic.probability(x);
  }
};

namespace detail {

inline void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_index(i);
    std::swap(idx[i - 1], idx[j]);
  }
}

// Regularized maximum likelihood by Newton iterations (bias unpenalized).
inline LogisticModel fit_logistic(const std::vector<std::vector<double>>& x,
                                  const std::vector<int>& y, const LogisticConfig& cfg) {
  const std::size_t n = x.size();
  const std::size_t dim = x.front().size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim) + 1);

  for (int it = 0; it < cfg.max_iter; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(w.size());
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(w.size(), w.size());
    for (std::size_t i = 0; i < n; ++i) {
      double z = w(static_cast<Eigen::Index>(dim));
      for (std::size_t d = 0; d < dim; ++d) z += w(static_cast<Eigen::Index>(d)) * x[i][d];
      const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                                : std::exp(z) / (1.0 + std::exp(z));
      const double err = (y[i] != 0 ? 1.0 : 0.0) - p;
      const double s = p * (1.0 - p);
      for (std::size_t d = 0; d <= dim; ++d) {
        const double xd = d < dim ? x[i][d] : 1.0;
        grad(static_cast<Eigen::Index>(d)) += err * xd;
        for (std::size_t e = 0; e <= dim; ++e) {
          const double xe = e < dim ? x[i][e] : 1.0;
          hess(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(e)) += s * xd * xe;
        }
      }
    }
    for (std::size_t d = 0; d < dim; ++d) {
      grad(static_cast<Eigen::Index>(d)) -= cfg.l2 * w(static_cast<Eigen::Index>(d));
      hess(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) += cfg.l2;
    }
    hess.diagonal().array() += 1e-9;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    w += step;
    if (grad.norm() < cfg.tol) break;
  }

  LogisticModel model;
  model.weights.assign(w.data(), w.data() + dim);
  model.bias = w(static_cast<Eigen::Index>(dim));
  return model;
}

inline CondProbModel fit_cond_prob(const std::vector<std::vector<double>>& x,
                                   const std::vector<int>& y, const CondProbConfig& cfg) {
  const std::size_t n = x.size();
  const std::size_t dim = x.front().size();
  CondProbModel model;
  model.bins = cfg.bins;
  model.lo.assign(dim, std::numeric_limits<double>::infinity());
  model.hi.assign(dim, -std::numeric_limits<double>::infinity());
  for (const auto& row : x) {
    for (std::size_t d = 0; d < dim; ++d) {
      model.lo[d] = std::min(model.lo[d], row[d]);
      model.hi[d] = std::max(model.hi[d], row[d]);
    }
  }

  double n_acc = 0.0;
  for (int label : y) n_acc += label != 0 ? 1.0 : 0.0;
  model.prior_accepted = n_acc / static_cast<double>(n);

  const std::size_t b = static_cast<std::size_t>(cfg.bins);
  model.p_accepted.assign(dim, std::vector<double>(b, cfg.smoothing));
  model.p_rejected.assign(dim, std::vector<double>(b, cfg.smoothing));
  for (std::size_t i = 0; i < n; ++i) {
    auto& hist = y[i] != 0 ? model.p_accepted : model.p_rejected;
    for (std::size_t d = 0; d < dim; ++d) {
      hist[d][static_cast<std::size_t>(model.bin_of(d, x[i][d]))] += 1.0;
    }
  }
  for (std::size_t d = 0; d < dim; ++d) {
    const double sum_a = std::accumulate(model.p_accepted[d].begin(), model.p_accepted[d].end(), 0.0);
    const double sum_r = std::accumulate(model.p_rejected[d].begin(), model.p_rejected[d].end(), 0.0);
    for (std::size_t k = 0; k < b; ++k) {
      model.p_accepted[d][k] /= sum_a;
      model.p_rejected[d][k] /= sum_r;
    }
  }
  return model;
}

// Out-of-fold decision values for Platt calibration: k-fold retraining on
// the training split so the sigmoid never sees in-sample scores.
inline std::pair<SvmModel, PlattSigmoid> fit_svm_calibrated(
    const std::vector<std::vector<double>>& x, const std::vector<int>& y_pm,
    const std::vector<int>& y01, const SvmConfig& svm_cfg, int folds, std::uint64_t seed) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x0f01d));
  shuffle_indices(order, rng);

  std::vector<int> fold_of(n, 0);
  for (std::size_t r = 0; r < n; ++r) fold_of[order[r]] = static_cast<int>(r % static_cast<std::size_t>(folds));

  std::vector<double> oof(n, 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] != f) {
        train_x.push_back(x[i]);
        train_y.push_back(y_pm[i]);
      }
    }
    const SvmModel fold_model = train_svm(train_x, train_y, svm_cfg);
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == f) oof[i] = fold_model.decision_value(x[i]);
    }
  }

  const PlattSigmoid platt = fit_platt(oof, y01);
  const SvmModel model = train_svm(x, y_pm, svm_cfg);
  return {model, platt};
}

}  // namespace detail

struct TrainResult {
  GapModel model;
  std::vector<GapEvent> train_events;
  std::vector<GapEvent> test_events;
};

// Deterministic label-stratified 80/20 split of the determined events.
inline std::pair<std::vector<GapEvent>, std::vector<GapEvent>> split_events(
    std::span<const GapEvent> events, std::uint64_t split_seed, double train_fraction = 0.8) {
  std::vector<std::size_t> accepted, rejected;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].label == GapLabel::Accepted) accepted.push_back(i);
    else if (events[i].label == GapLabel::Rejected) rejected.push_back(i);
  }
  Rng rng_a(derive_seed(split_seed, 1));
  Rng rng_r(derive_seed(split_seed, 2));
  detail::shuffle_indices(accepted, rng_a);
  detail::shuffle_indices(rejected, rng_r);

  std::pair<std::vector<GapEvent>, std::vector<GapEvent>> out;
  auto distribute = [&](const std::vector<std::size_t>& idx) {
    const std::size_t n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      (r < n_train ? out.first : out.second).push_back(events[idx[r]]);
    }
  };
  distribute(accepted);
  distribute(rejected);
  return out;
}

// Trains the requested model kind with its normalization layer fitted on the
// training split. active_features lists the feature indices kept (all seven
// by default; the ranking path removes one at a time).
inline TrainResult train_gap_model(GapModelKind kind, std::span<const GapEvent> events,
                                   std::uint64_t split_seed, const GapModelHyper& hyper,
                                   std::vector<int> active_features = {}) {
  std::vector<GapEvent> usable;
  for (const auto& e : events) {
    if (e.label != GapLabel::Undetermined) usable.push_back(e);
  }
  if (usable.size() < 50) throw DataError("gap model training needs at least 50 labeled events");

  if (active_features.empty()) {
    active_features.resize(FeatureVector::kCount);
    std::iota(active_features.begin(), active_features.end(), 0);
  }

  TrainResult result;
  std::tie(result.train_events, result.test_events) = split_events(usable, split_seed);

  auto rows_of = [&](const std::vector<GapEvent>& evs) {
    std::vector<std::vector<double>> rows;
    rows.reserve(evs.size());
    for (const auto& e : evs) {
      const auto full = e.features.to_array();
      std::vector<double> row;
      row.reserve(active_features.size());
      for (int idx : active_features) row.push_back(full[static_cast<std::size_t>(idx)]);
      rows.push_back(std::move(row));
    }
    return rows;
  };

  const auto train_rows = rows_of(result.train_events);
  std::vector<int> y01, ypm;
  for (const auto& e : result.train_events) {
    const int label = e.label == GapLabel::Accepted ? 1 : 0;
    y01.push_back(label);
    ypm.push_back(label != 0 ? 1 : -1);
  }
  if (std::count(y01.begin(), y01.end(), 1) == 0 ||
      std::count(y01.begin(), y01.end(), 0) == 0) {
    throw DataError("gap model training split contains a single class");
  }

  GapModel& model = result.model;
  model.kind = kind;
  model.active_features = active_features;
  model.norm = Normalization::fit(train_rows);

  if (kind == GapModelKind::CondProb) {
    model.cond_prob = detail::fit_cond_prob(train_rows, y01, hyper.cond_prob);
    return result;
  }

  std::vector<std::vector<double>> norm_rows;
  norm_rows.reserve(train_rows.size());
  for (const auto& row : train_rows) norm_rows.push_back(model.norm.apply(row));

  if (kind == GapModelKind::Logistic) {
    model.logistic = detail::fit_logistic(norm_rows, y01, hyper.logistic);
  } else {
    std::tie(model.svm, model.platt) = detail::fit_svm_calibrated(
        norm_rows, ypm, y01, hyper.svm, hyper.calibration_folds, split_seed);
  }
  return result;
}

inline double predict_probability(const GapModel& model, const FeatureVector& f) {
  return model.predict(f);
}

// Accuracy/precision/recall/F1 for the accepted class at threshold 0.5.
inline ClassificationReport evaluate_gap_model(const GapModel& model,
                                               std::span<const GapEvent> test) {
  if (test.empty()) throw DataError("gap model evaluation needs a nonempty test set");
  std::vector<int> labels;
  std::vector<double> probs;
  for (const auto& e : test) {
    if (e.label == GapLabel::Undetermined) continue;
    labels.push_back(e.label == GapLabel::Accepted ? 1 : 0);
    probs.push_back(model.predict(e.features));
  }
  if (labels.empty()) throw DataError("gap model evaluation: all events undetermined");
  return classification_metrics(labels, probs);
}

struct FeatureRankRow {
  int feature = 0;
  std::string feature_name;
  ClassificationReport report;
};

// Leave-one-feature-out SVM ranking: retrains once per removed feature and
// sorts ascending by the resulting F1, so the most important feature (the
// largest drop) comes first.
inline std::vector<FeatureRankRow> rank_features(std::span<const GapEvent> events,
                                                 std::uint64_t seed, const GapModelHyper& hyper) {
  std::vector<FeatureRankRow> rows;
  const auto names = FeatureVector::names();
  for (int removed = 0; removed < static_cast<int>(FeatureVector::kCount); ++removed) {
    std::vector<int> active;
    for (int d = 0; d < static_cast<int>(FeatureVector::kCount); ++d) {
      if (d != removed) active.push_back(d);
    }
    const TrainResult result =
        train_gap_model(GapModelKind::SvmPoly3, events, seed, hyper, active);
    FeatureRankRow row;
    row.feature = removed;
    row.feature_name = std::string(names[static_cast<std::size_t>(removed)]);
    row.report = evaluate_gap_model(result.model, result.test_events);
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const FeatureRankRow& a, const FeatureRankRow& b) {
    return a.report.f1 < b.report.f1;
  });
  return rows;
}

}  // namespace crosswalk
