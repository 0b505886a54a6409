#include <algorithm>
#include <cmath>
#include <numeric>

#include "causeway/classify.hpp"
#include "causeway/io.hpp"

namespace causeway::classify {
namespace {

void check_matrix(const Mat& X, const std::vector<int>& y) {
  if (X.empty() || X.size() != y.size()) throw Error("fit_logistic: empty data or X/y size mismatch");
  const std::size_t d = X[0].size();
  for (const auto& row : X) {
    if (row.size() != d) throw Error("fit_logistic: ragged feature matrix");
    for (double v : row)
      if (!std::isfinite(v)) throw Error("fit_logistic: non-finite feature");
  }
}

// log(sum(exp(z))) with the max factored out
double log_sum_exp(const Vec& z) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double s = 0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

Vec logistic_row_weights(const std::vector<int>& y, std::size_t k, const LogisticOptions& opt) {
  const std::size_t m = y.size();
  std::vector<std::size_t> count(k, 0);
  for (int c : y) ++count[static_cast<std::size_t>(c)];
  Vec class_w(k, 1.0);
  if (opt.class_weight == ClassWeightMode::Balanced) {
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] == 0) throw Error("fit_logistic: class " + std::to_string(c) + " absent");
      class_w[c] = static_cast<double>(m) / (static_cast<double>(k) * static_cast<double>(count[c]));
    }
  } else if (opt.class_weight == ClassWeightMode::Explicit) {
    if (opt.explicit_class_weights.size() != k)
      throw Error("fit_logistic: explicit class weights size mismatch");
    class_w = opt.explicit_class_weights;
  }
  if (!opt.sample_weights.empty() && opt.sample_weights.size() != m)
    throw Error("fit_logistic: sample weights size mismatch");
  Vec row_w(m);
  for (std::size_t i = 0; i < m; ++i)
    row_w[i] = class_w[static_cast<std::size_t>(y[i])] *
               (opt.sample_weights.empty() ? 1.0 : opt.sample_weights[i]);
  return row_w;
}

double logistic_objective(const Mat& X, const std::vector<int>& y, const Vec& row_weights,
                          double C, std::size_t k, const Vec& params) {
  const std::size_t m = X.size(), d = X[0].size();
  double loss = 0;
  Vec z(k);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t c = 0; c < k; ++c) {
      const double* w = params.data() + c * (d + 1);
      double s = w[d];  // bias
      for (std::size_t j = 0; j < d; ++j) s += w[j] * X[i][j];
      z[c] = s;
    }
    loss += row_weights[i] * (log_sum_exp(z) - z[static_cast<std::size_t>(y[i])]);
  }
  double penalty = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double* w = params.data() + c * (d + 1);
    for (std::size_t j = 0; j < d; ++j) penalty += w[j] * w[j];
  }
  return loss + penalty / (2.0 * C);
}

Vec logistic_gradient(const Mat& X, const std::vector<int>& y, const Vec& row_weights,
                      double C, std::size_t k, const Vec& params) {
  const std::size_t m = X.size(), d = X[0].size();
  Vec grad(params.size(), 0.0);
  Vec z(k), p(k);
  for (std::size_t i = 0; i < m; ++i) {
    double zmax = -1e300;
    for (std::size_t c = 0; c < k; ++c) {
      const double* w = params.data() + c * (d + 1);
      double s = w[d];
      for (std::size_t j = 0; j < d; ++j) s += w[j] * X[i][j];
      z[c] = s;
      zmax = std::max(zmax, s);
    }
    double norm = 0;
    for (std::size_t c = 0; c < k; ++c) {
      p[c] = std::exp(z[c] - zmax);
      norm += p[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      const double resid = row_weights[i] * (p[c] / norm -
                           (static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0));
      double* g = grad.data() + c * (d + 1);
      for (std::size_t j = 0; j < d; ++j) g[j] += resid * X[i][j];
      g[d] += resid;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    double* g = grad.data() + c * (d + 1);
    const double* w = params.data() + c * (d + 1);
    for (std::size_t j = 0; j < d; ++j) g[j] += w[j] / C;
  }
  return grad;
}

namespace {

// Contiguous view of the data for the optimizer hot loop.
struct FlatData {
  std::size_t m, d, k;
  Vec x;  // row major m x d
  const std::vector<int>* y;
  const Vec* row_w;
  double C;
};

double flat_objective(const FlatData& f, const Vec& params) {
  double loss = 0;
  Vec z(f.k);
  for (std::size_t i = 0; i < f.m; ++i) {
    const double* xi = f.x.data() + i * f.d;
    for (std::size_t c = 0; c < f.k; ++c) {
      const double* w = params.data() + c * (f.d + 1);
      double s = w[f.d];
      for (std::size_t j = 0; j < f.d; ++j) s += w[j] * xi[j];
      z[c] = s;
    }
    loss += (*f.row_w)[i] * (log_sum_exp(z) - z[static_cast<std::size_t>((*f.y)[i])]);
  }
  double penalty = 0;
  for (std::size_t c = 0; c < f.k; ++c) {
    const double* w = params.data() + c * (f.d + 1);
    for (std::size_t j = 0; j < f.d; ++j) penalty += w[j] * w[j];
  }
  return loss + penalty / (2.0 * f.C);
}

double flat_objective_gradient(const FlatData& f, const Vec& params, Vec& grad) {
  grad.assign(params.size(), 0.0);
  double loss = 0;
  Vec z(f.k), p(f.k);
  for (std::size_t i = 0; i < f.m; ++i) {
    const double* xi = f.x.data() + i * f.d;
    double zmax = -1e300;
    for (std::size_t c = 0; c < f.k; ++c) {
      const double* w = params.data() + c * (f.d + 1);
      double s = w[f.d];
      for (std::size_t j = 0; j < f.d; ++j) s += w[j] * xi[j];
      z[c] = s;
      zmax = std::max(zmax, s);
    }
    double norm = 0;
    for (std::size_t c = 0; c < f.k; ++c) {
      p[c] = std::exp(z[c] - zmax);
      norm += p[c];
    }
    const auto yi = static_cast<std::size_t>((*f.y)[i]);
    loss += (*f.row_w)[i] * (zmax + std::log(norm) - z[yi]);
    for (std::size_t c = 0; c < f.k; ++c) {
      const double resid = (*f.row_w)[i] * (p[c] / norm - (yi == c ? 1.0 : 0.0));
      double* g = grad.data() + c * (f.d + 1);
      for (std::size_t j = 0; j < f.d; ++j) g[j] += resid * xi[j];
      g[f.d] += resid;
    }
  }
  double penalty = 0;
  for (std::size_t c = 0; c < f.k; ++c) {
    double* g = grad.data() + c * (f.d + 1);
    const double* w = params.data() + c * (f.d + 1);
    for (std::size_t j = 0; j < f.d; ++j) {
      g[j] += w[j] / f.C;
      penalty += w[j] * w[j];
    }
  }
  return loss + penalty / (2.0 * f.C);
}

}  // namespace

LinearModel fit_logistic(const Mat& X, const std::vector<int>& y, const LogisticOptions& opt) {
  check_matrix(X, y);
  if (opt.C <= 0) throw Error("fit_logistic: C must be positive");
  int kmax = 0;
  for (int c : y) {
    if (c < 0) throw Error("fit_logistic: negative label");
    kmax = std::max(kmax, c);
  }
  const std::size_t k = static_cast<std::size_t>(kmax) + 1;
  {
    std::vector<bool> seen(k, false);
    for (int c : y) seen[static_cast<std::size_t>(c)] = true;
    std::size_t distinct = 0;
    for (bool s : seen) distinct += s ? 1 : 0;
    if (distinct < 2) throw Error("fit_logistic: need at least two classes");
    if (distinct != k) throw Error("fit_logistic: labels must be contiguous 0..k-1");
  }
  const std::size_t d = X[0].size();
  const Vec row_w = logistic_row_weights(y, k, opt);

  FlatData f{X.size(), d, k, Vec(X.size() * d), &y, &row_w, opt.C};
  for (std::size_t i = 0; i < X.size(); ++i)
    std::copy(X[i].begin(), X[i].end(), f.x.begin() + static_cast<std::ptrdiff_t>(i * d));

  Vec theta(k * (d + 1), 0.0);
  if (!opt.init.empty()) {
    if (opt.init.size() != theta.size()) throw Error("fit_logistic: init size mismatch");
    theta = opt.init;
  }

  Vec grad;
  double loss = flat_objective_gradient(f, theta, grad);
  Vec prev_theta, prev_grad;
  double step = 1.0;
  int iter = 0;
  bool converged = false;

  auto inf_norm = [](const Vec& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  };

  // Barzilai-Borwein steps with a non-monotone (Grippo-style) backtracking
  // line search; a monotone rule rejects most BB steps and stalls.
  constexpr std::size_t kMemory = 10;
  std::vector<double> recent = {loss};

  for (; iter < opt.max_iter; ++iter) {
    if (inf_norm(grad) < opt.grad_tol) {
      converged = true;
      break;
    }
    if (!prev_theta.empty()) {
      double sy = 0, yy = 0;
      for (std::size_t j = 0; j < theta.size(); ++j) {
        const double s = theta[j] - prev_theta[j];
        const double g = grad[j] - prev_grad[j];
        sy += s * g;
        yy += g * g;
      }
      if (sy > 0 && yy > 0 && std::isfinite(sy / yy)) step = std::clamp(sy / yy, 1e-12, 1e8);
    }
    double gg = 0;
    for (double g : grad) gg += g * g;
    const double ref = *std::max_element(recent.begin(), recent.end());

    Vec trial(theta.size());
    double t = step;
    double new_loss = 0;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < theta.size(); ++j) trial[j] = theta[j] - t * grad[j];
      new_loss = flat_objective(f, trial);
      if (new_loss <= ref - 1e-4 * t * gg) break;
      t *= 0.5;
    }
    prev_theta.swap(theta);
    prev_grad.swap(grad);
    theta = std::move(trial);
    loss = flat_objective_gradient(f, theta, grad);
    recent.push_back(loss);
    if (recent.size() > kMemory) recent.erase(recent.begin());
    step = t;
  }

  LinearModel model;
  model.n_classes = k;
  model.n_features = d;
  model.weights.assign(k, Vec(d, 0.0));
  model.bias.assign(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t j = 0; j < d; ++j) model.weights[c][j] = theta[c * (d + 1) + j];
    model.bias[c] = theta[c * (d + 1) + d];
  }
  model.C = opt.C;
  model.class_weights_used.assign(k, 1.0);
  if (opt.class_weight == ClassWeightMode::Balanced || opt.class_weight == ClassWeightMode::Explicit) {
    std::vector<std::size_t> count(k, 0);
    for (int c : y) ++count[static_cast<std::size_t>(c)];
    for (std::size_t c = 0; c < k; ++c)
      model.class_weights_used[c] =
          opt.class_weight == ClassWeightMode::Explicit
              ? opt.explicit_class_weights[c]
              : static_cast<double>(y.size()) / (static_cast<double>(k) * static_cast<double>(count[c]));
  }
  model.converged = converged;
  model.iterations = iter;
  model.final_loss = loss;
  return model;
}

Vec LinearModel::decision(const Vec& x) const {
  if (x.size() != n_features) throw Error("LinearModel: feature dimension mismatch");
  Vec z(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double s = bias[c];
    for (std::size_t j = 0; j < n_features; ++j) s += weights[c][j] * x[j];
    z[c] = s;
  }
  return z;
}

Vec LinearModel::predict_proba(const Vec& x) const {
  if (n_classes == 0) throw Error("LinearModel: untrained model");
  Vec z = decision(x);
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double norm = 0;
  for (double& v : z) {
    v = std::exp(v - m);
    norm += v;
  }
  for (double& v : z) v /= norm;
  return z;
}

}  // namespace causeway::classify
