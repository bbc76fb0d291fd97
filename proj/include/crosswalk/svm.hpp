#pragma once

// Soft-margin kernel SVM trained by sequential minimal optimization with
// second-order working-set selection, plus a Platt sigmoid fitted by
// Newton's method for calibrated probabilities.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace crosswalk {

struct SvmConfig {
  double c = 1.0;       // soft-margin penalty
  double gamma = 0.0;   // kernel scale; 0 selects 1 / (dim * mean feature variance)
  double coef0 = 1.0;   // kernel offset
  int degree = 3;       // polynomial degree
  double tol = 1e-3;    // KKT violation tolerance
  long max_iter = 500000;

  void validate() const {
    if (c <= 0) throw std::invalid_argument("svm: c must be > 0");
    if (gamma < 0) throw std::invalid_argument("svm: gamma must be >= 0");
    if (degree < 1) throw std::invalid_argument("svm: degree must be >= 1");
    if (tol <= 0) throw std::invalid_argument("svm: tol must be > 0");
  }
};

inline double poly_kernel(std::span<const double> a, std::span<const double> b, double gamma,
                          double coef0, int degree) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  const double base = gamma * dot + coef0;
  double out = 1.0;
  for (int i = 0; i < degree; ++i) out *= base;
  return out;
}

struct SvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> dual_coef;  // alpha_i * y_i per support vector
  double bias = 0.0;
  double gamma = 0.0;
  double coef0 = 1.0;
  int degree = 3;

  double decision_value(std::span<const double> x) const {
    double sum = bias;
    for (std::size_t i = 0; i < support_vectors.size(); ++i) {
      sum += dual_coef[i] * poly_kernel(support_vectors[i], x, gamma, coef0, degree);
    }
    return sum;
  }
};

// Resolves gamma = 0 to the scale-aware default 1 / (dim * mean variance).
inline double resolve_gamma(const std::vector<std::vector<double>>& x, const SvmConfig& cfg) {
  if (cfg.gamma > 0.0) return cfg.gamma;
  const std::size_t n = x.size();
  const std::size_t dim = x.front().size();
  double var_sum = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0;
    for (const auto& row : x) mean += row[d];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& row : x) var += (row[d] - mean) * (row[d] - mean);
    var_sum += var / static_cast<double>(n);
  }
  const double mean_var = var_sum / static_cast<double>(dim);
  const double denom = static_cast<double>(dim) * (mean_var > 1e-12 ? mean_var : 1.0);
  return 1.0 / denom;
}

// SMO dual solver. Labels must be +1/-1 and the set must contain both.
inline SvmModel train_svm(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                          const SvmConfig& cfg) {
  cfg.validate();
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("svm: bad training set");
  bool has_pos = false, has_neg = false;
  for (int label : y) {
    if (label == 1) has_pos = true;
    else if (label == -1) has_neg = true;
    else throw std::invalid_argument("svm: labels must be +1/-1");
  }
  if (!has_pos || !has_neg) throw std::invalid_argument("svm: training set must contain both classes");

  const double gamma = resolve_gamma(x, cfg);
  const double c = cfg.c;
  constexpr double kTau = 1e-12;

  // Full kernel cache; training sets here are small (a few thousand rows).
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = poly_kernel(x[i], x[j], gamma, cfg.coef0, cfg.degree);
      k[i * n + j] = v;
      k[j * n + i] = v;
    }
  }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  const auto yd = [&](std::size_t i) { return static_cast<double>(y[i]); };

  long iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    // First index: largest KKT violation on the ascent side.
    double g_max = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      const bool in_up = (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0);
      if (!in_up) continue;
      const double v = -yd(t) * grad[t];
      if (v >= g_max) {
        g_max = v;
        i = static_cast<std::ptrdiff_t>(t);
      }
    }

    // Second index: maximal second-order objective decrease; g_min for the
    // stopping test.
    double g_min = std::numeric_limits<double>::infinity();
    double best_obj = 0.0;
    std::ptrdiff_t j = -1;
    if (i >= 0) {
      const std::size_t ui = static_cast<std::size_t>(i);
      const double* ki = &k[ui * n];
      for (std::size_t t = 0; t < n; ++t) {
        const bool in_low = (y[t] == 1 && alpha[t] > 0) || (y[t] == -1 && alpha[t] < c);
        if (!in_low) continue;
        const double v = -yd(t) * grad[t];
        g_min = std::min(g_min, v);
        const double b = g_max - v;
        if (b > 0.0) {
          double a = ki[ui] + k[t * n + t] - 2.0 * ki[t];
          if (a <= 0.0) a = kTau;
          const double obj = -(b * b) / a;
          if (obj <= best_obj) {
            best_obj = obj;
            j = static_cast<std::ptrdiff_t>(t);
          }
        }
      }
    }

    if (i < 0 || j < 0 || g_max - g_min < cfg.tol) break;

    const std::size_t ui = static_cast<std::size_t>(i);
    const std::size_t uj = static_cast<std::size_t>(j);
    const double* ki = &k[ui * n];
    const double* kj = &k[uj * n];
    double a_ij = ki[ui] + kj[uj] - 2.0 * ki[uj];
    if (a_ij <= 0.0) a_ij = kTau;

    const double old_ai = alpha[ui];
    const double old_aj = alpha[uj];

    if (y[ui] != y[uj]) {
      const double delta = (-grad[ui] - grad[uj]) / a_ij;
      const double diff = alpha[ui] - alpha[uj];
      alpha[ui] += delta;
      alpha[uj] += delta;
      if (diff > 0.0 && alpha[uj] < 0.0) {
        alpha[uj] = 0.0;
        alpha[ui] = diff;
      } else if (diff <= 0.0 && alpha[ui] < 0.0) {
        alpha[ui] = 0.0;
        alpha[uj] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[ui] > c) {
          alpha[ui] = c;
          alpha[uj] = c - diff;
        }
      } else {
        if (alpha[uj] > c) {
          alpha[uj] = c;
          alpha[ui] = c + diff;
        }
      }
    } else {
      const double delta = (grad[ui] - grad[uj]) / a_ij;
      const double sum = alpha[ui] + alpha[uj];
      alpha[ui] -= delta;
      alpha[uj] += delta;
      if (sum > c) {
        if (alpha[ui] > c) {
          alpha[ui] = c;
          alpha[uj] = sum - c;
        } else if (alpha[uj] > c) {
          alpha[uj] = c;
          alpha[ui] = sum - c;
        }
      } else {
        if (alpha[uj] < 0.0) {
          alpha[uj] = 0.0;
          alpha[ui] = sum;
        } else if (alpha[ui] < 0.0) {
          alpha[ui] = 0.0;
          alpha[uj] = sum;
        }
      }
    }

    const double dai = alpha[ui] - old_ai;
    const double daj = alpha[uj] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += yd(ui) * yd(t) * ki[t] * dai + yd(uj) * yd(t) * kj[t] * daj;
    }
  }
  if (iter >= cfg.max_iter) {
    throw std::runtime_error("svm: solver did not converge within the iteration cap");
  }

  // Bias from the free support vectors, falling back to the bound midpoint.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = yd(t) * grad[t];
    if (alpha[t] >= c - 1e-12) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 1e-12) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) * 0.5;

  SvmModel model;
  model.gamma = gamma;
  model.coef0 = cfg.coef0;
  model.degree = cfg.degree;
  model.bias = -rho;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 1e-12) {
      model.support_vectors.push_back(x[t]);
      model.dual_coef.push_back(alpha[t] * yd(t));
    }
  }
  return model;
}

// Sigmoid mapping decision values to probabilities: p = 1 / (1 + exp(a*s + b)).
struct PlattSigmoid {
  double a = 0.0;
  double b = 0.0;

  double operator()(double s) const {
    const double z = a * s + b;
    if (z >= 0.0) {
      const double e = std::exp(-z);
      return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
  }
};

// Newton fit with backtracking line search on the regularized target
// likelihood (Platt's method as amended by Lin, Lin and Weng).
inline PlattSigmoid fit_platt(std::span<const double> decision_values, std::span<const int> labels) {
  const std::size_t n = decision_values.size();
  if (n == 0 || labels.size() != n) throw std::invalid_argument("fit_platt: bad inputs");

  double prior1 = 0.0;
  for (int l : labels) prior1 += l != 0 ? 1.0 : 0.0;
  const double prior0 = static_cast<double>(n) - prior1;
  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);

  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] != 0 ? hi_target : lo_target;

  constexpr int kMaxIter = 100;
  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));

  auto objective = [&](double pa, double pb) {
    double fval = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decision_values[i] * pa + pb;
      if (z >= 0.0) fval += target[i] * z + std::log1p(std::exp(-z));
      else fval += (target[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return fval;
  };

  double fval = objective(a, b);
  for (int it = 0; it < kMaxIter; ++it) {
    double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = decision_values[i] * a + b;
      double p, q;
      if (z >= 0.0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += decision_values[i] * decision_values[i] * d2;
      h22 += d2;
      h21 += decision_values[i] * d2;
      const double d1 = target[i] - p;
      g1 += decision_values[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= kMinStep) {
      const double na = a + step * da;
      const double nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < kMinStep) break;
  }

  return PlattSigmoid{a, b};
}

}  // namespace crosswalk
