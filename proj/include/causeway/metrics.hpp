#pragma once

#include <vector>

namespace causeway::metrics {

struct ClassifierEval {
  double macro_f1 = 0;
  double weighted_auc = 0;
  double micro_auc = 0;
  double cross_entropy = 0;
  std::vector<int> skipped_auc_classes;  // absent from y_true, AUC undefined
};

/// Binary AUC from scores; ties get rank-average (Mann-Whitney) treatment.
double binary_auc(const std::vector<double>& scores, const std::vector<int>& labels);

/// macro-F1 over classes present in y_true (argmax predictions, ties to the
/// lowest class index); weighted AUC = prevalence-weighted one-vs-rest;
/// micro AUC over the flattened (sample, class) indicator grid; cross
/// entropy = mean -log p(true class), clipped at 1e-15.
ClassifierEval evaluate_classifier(const std::vector<int>& y_true,
                                   const std::vector<std::vector<double>>& y_prob);

/// Krippendorff's alpha for nominal data via the coincidence matrix.
/// annotations[unit][annotator]; -1 marks a missing entry. Units with fewer
/// than two values contribute nothing; throws if no unit is pairable.
double krippendorff_alpha(const std::vector<std::vector<int>>& annotations);

/// Mean over units (with >= 2 annotations) of the pairwise exact-match
/// fraction, as a percentage.
double observed_agreement(const std::vector<std::vector<int>>& annotations);

}  // namespace causeway::metrics
