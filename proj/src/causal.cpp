#include "causeway/causal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "causeway/io.hpp"

namespace causeway::causal {

double cosine_distance(const Vec& x, const Vec& y) {
  if (x.size() != y.size() || x.empty()) throw Error("cosine_distance: dimension mismatch");
  double dot = 0, nx = 0, ny = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx == 0 || ny == 0) throw Error("cosine_distance: zero vector");
  return 1.0 - dot / (std::sqrt(nx) * std::sqrt(ny));
}

namespace {

double squared_euclidean(const Vec& x, const Vec& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

}  // namespace

MatchResult nnm_match(const Mat& treated, const Mat& controls, NnmMetric metric) {
  if (controls.empty()) throw Error("nnm_match: empty control group");
  MatchResult r;
  r.method = metric == NnmMetric::Cosine ? "nnm-cosine" : "nnm-euclidean";
  r.pairs.reserve(treated.size());
  r.distances.reserve(treated.size());
  for (std::size_t i = 0; i < treated.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < controls.size(); ++j) {
      const double d = metric == NnmMetric::Cosine ? cosine_distance(treated[i], controls[j])
                                                   : squared_euclidean(treated[i], controls[j]);
      if (d < best_d) {  // strict: ties keep the lowest control index
        best_d = d;
        best = j;
      }
    }
    r.pairs.emplace_back(i, best);
    r.distances.push_back(best_d);
  }
  return r;
}

MatchResult psm_match(const Vec& treated_scores, const Vec& control_scores) {
  if (control_scores.empty()) throw Error("psm_match: empty control group");
  MatchResult r;
  r.method = "psm";
  r.pairs.reserve(treated_scores.size());
  r.distances.reserve(treated_scores.size());
  for (std::size_t i = 0; i < treated_scores.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < control_scores.size(); ++j) {
      const double diff = treated_scores[i] - control_scores[j];
      const double d = diff * diff;
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    r.pairs.emplace_back(i, best);
    r.distances.push_back(best_d);
  }
  return r;
}

Vec fit_propensity(const Mat& X, const std::vector<int>& treated, const PropensityOptions& opt) {
  if (X.size() != treated.size() || X.empty()) throw Error("fit_propensity: bad input");
  std::size_t n1 = 0;
  for (int t : treated) {
    if (t != 0 && t != 1) throw Error("fit_propensity: treatment flags must be 0/1");
    n1 += static_cast<std::size_t>(t);
  }
  if (n1 == 0 || n1 == treated.size())
    throw Error("fit_propensity: degenerate single-class input");

  Vec e(X.size());
  if (opt.model == PropensityModel::LR) {
    classify::LogisticOptions lo;
    lo.C = opt.C;
    lo.class_weight = classify::ClassWeightMode::Balanced;
    const auto m = classify::fit_logistic(X, treated, lo);
    for (std::size_t i = 0; i < X.size(); ++i) e[i] = m.predict_proba(X[i])[1];
  } else {
    // Balanced class weights for the GBM side as well.
    classify::GbmOptions go = opt.gbm;
    const double w1 = static_cast<double>(treated.size()) / (2.0 * static_cast<double>(n1));
    const double w0 =
        static_cast<double>(treated.size()) / (2.0 * static_cast<double>(treated.size() - n1));
    go.sample_weights.assign(treated.size(), w0);
    for (std::size_t i = 0; i < treated.size(); ++i)
      if (treated[i] == 1) go.sample_weights[i] = w1;
    if (!opt.gbm.sample_weights.empty()) {
      if (opt.gbm.sample_weights.size() != treated.size())
        throw Error("fit_propensity: sample weights size mismatch");
      for (std::size_t i = 0; i < treated.size(); ++i)
        go.sample_weights[i] *= opt.gbm.sample_weights[i];
    }
    const auto m = classify::fit_gbm(X, treated, go);
    for (std::size_t i = 0; i < X.size(); ++i) e[i] = m.predict_proba(X[i])[1];
  }
  for (double& v : e) v = std::clamp(v, 1e-12, 1.0 - 1e-12);
  return e;
}

TrimmedWeights iptw_weights(const Vec& e, const std::vector<int>& treated, double lo, double hi) {
  if (e.size() != treated.size()) throw Error("iptw_weights: size mismatch");
  TrimmedWeights tw;
  tw.weights.assign(e.size(), 0.0);
  tw.kept.assign(e.size(), false);
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] <= 0.0 || e[i] >= 1.0) throw Error("iptw_weights: scores must lie in (0,1)");
    if (e[i] < lo || e[i] > hi) {  // bounds themselves are kept
      ++tw.n_trimmed;
      continue;
    }
    tw.kept[i] = true;
    tw.weights[i] = treated[i] == 1 ? 1.0 / e[i] : 1.0 / (1.0 - e[i]);
  }
  return tw;
}

namespace {

void weighted_moments(const Vec& values, const Vec* weights, double& mean, double& var) {
  double wsum = 0, m = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    wsum += w;
    m += w * values[i];
  }
  mean = m / wsum;
  double v = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = weights ? (*weights)[i] : 1.0;
    const double d = values[i] - mean;
    v += w * d * d;
  }
  var = v / wsum;
}

}  // namespace

double asmd(const Vec& treated_values, const Vec& control_values, const Vec* treated_weights,
            const Vec* control_weights) {
  if (treated_values.size() < 2 || control_values.size() < 2)
    throw Error("asmd: each group needs at least two values");
  if (treated_weights && treated_weights->size() != treated_values.size())
    throw Error("asmd: treated weights size mismatch");
  if (control_weights && control_weights->size() != control_values.size())
    throw Error("asmd: control weights size mismatch");
  double mt, vt, mc, vc;
  weighted_moments(treated_values, treated_weights, mt, vt);
  weighted_moments(control_values, control_weights, mc, vc);
  const double pooled = std::sqrt((vt + vc) / 2.0);
  const double diff = std::fabs(mt - mc);
  if (pooled == 0) return diff == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / pooled;
}

double ate_matched(const MatchResult& match, const Vec& y_treated, const Vec& y_control) {
  if (match.pairs.empty()) throw Error("ate_matched: empty match");
  double sum = 0;
  for (const auto& [ti, ci] : match.pairs) {
    if (ti >= y_treated.size() || ci >= y_control.size())
      throw Error("ate_matched: pair index out of range");
    sum += y_treated[ti] - y_control[ci];
  }
  return sum / static_cast<double>(match.pairs.size());
}

double ate_iptw(const TrimmedWeights& tw, const std::vector<int>& treated, const Vec& y) {
  if (tw.weights.size() != treated.size() || y.size() != treated.size())
    throw Error("ate_iptw: size mismatch");
  double wt = 0, wty = 0, wc = 0, wcy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!tw.kept[i]) continue;
    if (treated[i] == 1) {
      wt += tw.weights[i];
      wty += tw.weights[i] * y[i];
    } else {
      wc += tw.weights[i];
      wcy += tw.weights[i] * y[i];
    }
  }
  if (wt == 0 || wc == 0) throw Error("ate_iptw: a group is empty after trimming");
  return wty / wt - wcy / wc;
}

std::string ci_mode_name(CiMode m) {
  return m == CiMode::PaperLiteral ? "paper_literal" : "standard_error";
}

std::optional<CiMode> ci_mode_from(std::string_view name) {
  if (name == "paper_literal") return CiMode::PaperLiteral;
  if (name == "standard_error") return CiMode::StandardError;
  return std::nullopt;
}

AteSummary summarize_ci(const Vec& per_sim_ates, CiMode mode) {
  if (per_sim_ates.size() < 2) throw Error("summarize_ci: need at least two simulations");
  const double n = static_cast<double>(per_sim_ates.size());
  double mean = 0;
  for (double v : per_sim_ates) mean += v;
  mean /= n;
  double ss = 0;
  for (double v : per_sim_ates) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double denom = mode == CiMode::PaperLiteral ? n : std::sqrt(n);
  const double half = 1.96 * sd / denom;
  AteSummary s;
  s.mean = mean;
  s.sd = sd;
  s.n_sims = per_sim_ates.size();
  s.ci_lo = mean - half;
  s.ci_hi = mean + half;
  return s;
}

}  // namespace causeway::causal
