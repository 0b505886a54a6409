#include "causeway/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "causeway/io.hpp"

namespace causeway::metrics {

double binary_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw Error("binary_auc: size mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0;
  std::size_t n_pos = 0, n_neg = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      } else {
        ++n_neg;
      }
    }
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) throw Error("binary_auc: need both classes");
  const double np = static_cast<double>(n_pos);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

ClassifierEval evaluate_classifier(const std::vector<int>& y_true,
                                   const std::vector<std::vector<double>>& y_prob) {
  if (y_true.empty() || y_true.size() != y_prob.size())
    throw Error("evaluate_classifier: empty input or size mismatch");
  const std::size_t n = y_true.size();
  const std::size_t k = y_prob[0].size();
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (y_prob[i].size() != k) throw Error("evaluate_classifier: ragged probability rows");
    if (y_true[i] < 0 || static_cast<std::size_t>(y_true[i]) >= k)
      throw Error("evaluate_classifier: label out of range");
    ++count[static_cast<std::size_t>(y_true[i])];
  }
  std::size_t present = 0;
  for (auto c : count) present += c > 0 ? 1 : 0;
  if (present < 2) throw Error("evaluate_classifier: need >= 2 classes in y_true");

  ClassifierEval ev;

  // macro F1 over classes present in y_true
  std::vector<std::size_t> tp(k, 0), fp(k, 0), fn(k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pred = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (y_prob[i][c] > y_prob[i][pred]) pred = c;
    const auto truth = static_cast<std::size_t>(y_true[i]);
    if (pred == truth) ++tp[pred];
    else {
      ++fp[pred];
      ++fn[truth];
    }
  }
  double f1_sum = 0;
  for (std::size_t c = 0; c < k; ++c) {
    if (count[c] == 0) continue;
    const double denom = 2.0 * static_cast<double>(tp[c]) + static_cast<double>(fp[c] + fn[c]);
    f1_sum += denom > 0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
  }
  ev.macro_f1 = f1_sum / static_cast<double>(present);

  // weighted one-vs-rest AUC + micro AUC over flattened indicators
  double weighted = 0;
  std::vector<double> flat_scores;
  std::vector<int> flat_labels;
  flat_scores.reserve(n * k);
  flat_labels.reserve(n * k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> sc(n);
    std::vector<int> lb(n);
    for (std::size_t i = 0; i < n; ++i) {
      sc[i] = y_prob[i][c];
      lb[i] = static_cast<std::size_t>(y_true[i]) == c ? 1 : 0;
      flat_scores.push_back(sc[i]);
      flat_labels.push_back(lb[i]);
    }
    if (count[c] == 0) {
      ev.skipped_auc_classes.push_back(static_cast<int>(c));
      continue;
    }
    if (count[c] == n) {
      ev.skipped_auc_classes.push_back(static_cast<int>(c));
      continue;  // no negatives, AUC undefined
    }
    weighted += (static_cast<double>(count[c]) / static_cast<double>(n)) * binary_auc(sc, lb);
  }
  ev.weighted_auc = weighted;
  ev.micro_auc = binary_auc(flat_scores, flat_labels);

  double ce = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::max(y_prob[i][static_cast<std::size_t>(y_true[i])], 1e-15);
    ce -= std::log(p);
  }
  ev.cross_entropy = ce / static_cast<double>(n);
  return ev;
}

namespace {

// Coincidence matrix for nominal alpha: per unit with m >= 2 values each
// ordered cross-annotator pair adds 1/(m-1).
struct Coincidence {
  std::map<int, std::map<int, double>> o;
  std::map<int, double> marginal;
  double n = 0;
};

Coincidence build_coincidence(const std::vector<std::vector<int>>& annotations) {
  Coincidence co;
  for (const auto& unit : annotations) {
    std::map<int, double> cnt;
    double m = 0;
    for (int v : unit) {
      if (v < 0) continue;
      cnt[v] += 1;
      m += 1;
    }
    if (m < 2) continue;
    for (const auto& [c, nc] : cnt) {
      for (const auto& [kk, nk] : cnt) {
        const double pairs = c == kk ? nc * (nk - 1) : nc * nk;
        if (pairs > 0) co.o[c][kk] += pairs / (m - 1);
      }
    }
    co.n += m;
  }
  for (const auto& [c, row] : co.o)
    for (const auto& [kk, v] : row) co.marginal[c] += v;
  return co;
}

}  // namespace

double krippendorff_alpha(const std::vector<std::vector<int>>& annotations) {
  const Coincidence co = build_coincidence(annotations);
  if (co.n < 2) throw Error("krippendorff_alpha: no pairable values");
  double disagree = 0;
  for (const auto& [c, row] : co.o)
    for (const auto& [kk, v] : row)
      if (c != kk) disagree += v;
  const double d_obs = disagree / co.n;
  double expected = 0;
  for (const auto& [c, nc] : co.marginal)
    for (const auto& [kk, nk] : co.marginal)
      if (c != kk) expected += nc * nk;
  const double d_exp = expected / (co.n * (co.n - 1.0));
  if (d_exp == 0) return 1.0;  // a single value class, all agree
  return 1.0 - d_obs / d_exp;
}

double observed_agreement(const std::vector<std::vector<int>>& annotations) {
  double sum = 0;
  std::size_t units = 0;
  for (const auto& unit : annotations) {
    std::vector<int> vals;
    for (int v : unit)
      if (v >= 0) vals.push_back(v);
    if (vals.size() < 2) continue;
    double match = 0, total = 0;
    for (std::size_t a = 0; a < vals.size(); ++a)
      for (std::size_t b = a + 1; b < vals.size(); ++b) {
        total += 1;
        match += vals[a] == vals[b] ? 1 : 0;
      }
    sum += match / total;
    ++units;
  }
  if (units == 0) throw Error("observed_agreement: no unit has >= 2 annotations");
  return 100.0 * sum / static_cast<double>(units);
}

}  // namespace causeway::metrics
