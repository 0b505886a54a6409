#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "causeway/classify.hpp"
#include "causeway/corpus.hpp"

namespace causeway::weaklabel {

enum class LfVote : std::int8_t { Abstain = 0, Personal = 1, NonPersonal = 2 };

/// MPQA-style clue list: token -> strength (weak=1, strong=2).
class SubjectivityLexicon {
 public:
  static SubjectivityLexicon load_csv(const std::filesystem::path& path);
  void add(const std::string& token, int strength);
  /// Sum of clue strengths over tokens (each occurrence counts).
  int score_tokens(const std::vector<std::string>& tokens) const;
  std::size_t size() const { return strength_.size(); }

 private:
  std::unordered_map<std::string, int> strength_;
};

/// The four labeling functions:
///   LF1: URL present -> NonPersonal, else Personal
///   LF2: first-person pronoun -> Personal, else Abstain
///   LF3: subjectivity < 1 -> NonPersonal, > 4 -> Personal, else Abstain
///   LF4: external score > 0.6 -> Personal, < 0.1 -> NonPersonal, else
///        Abstain (always abstains when the score is absent)
std::vector<LfVote> apply_labeling_functions(std::string_view text,
                                             const SubjectivityLexicon& lexicon,
                                             std::optional<double> external_score);

struct LabelModelOptions {
  int max_iter = 100;
  double ll_tol = 1e-8;
  double init_accuracy = 0.7;
  double acc_lo = 0.01;  // admissible accuracy box; EM clamps, oracle searches it
  double acc_hi = 0.99;
};

struct LabelModel {
  std::vector<double> accuracies;  // per LF, probability of voting the truth
  double prior_personal = 0.5;
  int iterations = 0;
  double log_likelihood = 0;
  std::vector<int> no_signal_lfs;  // all-abstain LFs left at initialization
  bool low_row_warning = false;    // fitted on fewer than 50 rows
  std::vector<double> ll_trace;    // per-EM-iteration log likelihood
};

/// Two-class conditionally-independent label model with independent
/// abstention, fitted by EM. Log likelihood is non-decreasing per step.
LabelModel fit_label_model(const std::vector<std::vector<LfVote>>& votes,
                           const LabelModelOptions& opt = {});

/// Posterior P(Personal | votes); all-abstain rows fall back to the prior.
std::vector<double> infer_weak_labels(const std::vector<std::vector<LfVote>>& votes,
                                      const LabelModel& model);

struct WeightedSample {
  std::vector<std::size_t> indices;
  std::vector<double> weights;  // = confidence of the weak label
};

/// Uniform sample of min(k, eligible) rows among those with
/// max(p, 1-p) > threshold. Throws when nothing is eligible.
WeightedSample select_weighted_training(const std::vector<double>& p_personal, double threshold,
                                        std::size_t k, std::uint64_t seed);

/// Indices of the k source rows with the highest maximum cosine similarity
/// to any target row; ties by lower index; k is clamped with a warning.
std::vector<std::size_t> domain_select(const classify::Mat& source, const classify::Mat& target,
                                       std::size_t k, std::ostream* warn = nullptr);

struct PersonalThresholds {
  double juul = 0.1;
  double cannabis = 0.5;
};

/// Fills p_personal from the discriminative model and marks tweets personal
/// when p >= the dataset threshold.
void classify_personal(const classify::AnyModel& model, std::vector<corpus::Tweet>& tweets,
                       const PersonalThresholds& thresholds);

/// Users keeping strictly more than half of their tweets personal.
std::set<std::string> retained_users(const std::vector<corpus::Tweet>& tweets);

}  // namespace causeway::weaklabel
