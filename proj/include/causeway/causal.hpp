#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "causeway/classify.hpp"

namespace causeway::causal {

using classify::Mat;
using classify::Vec;

/// 1 - x.y / (|x||y|), in [0, 2]. Throws on a zero vector.
double cosine_distance(const Vec& x, const Vec& y);

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (treated idx, control idx)
  Vec distances;
  std::string method;
};

enum class NnmMetric { Cosine, SquaredEuclidean };

/// 1:1 nearest neighbor matching with replacement; ties break to the lowest
/// control index.
MatchResult nnm_match(const Mat& treated, const Mat& controls, NnmMetric metric = NnmMetric::Cosine);

/// Propensity score matching: squared score distance (the ordering equals
/// the |e_i - e_j| ordering).
MatchResult psm_match(const Vec& treated_scores, const Vec& control_scores);

enum class PropensityModel { LR, GBM };

struct PropensityOptions {
  PropensityModel model = PropensityModel::LR;
  double C = 1.0;                  // LR inverse regularization
  classify::GbmOptions gbm;        // GBM hyperparameters
};

/// P(T=1 | X) from a balanced-class-weight classifier; scores in (0,1).
Vec fit_propensity(const Mat& X, const std::vector<int>& treated,
                   const PropensityOptions& opt = {});

struct TrimmedWeights {
  Vec weights;             // T/e + (1-T)/(1-e); 0 where trimmed
  std::vector<bool> kept;  // e within [lo, hi] (inclusive bounds)
  std::size_t n_trimmed = 0;
};

TrimmedWeights iptw_weights(const Vec& e, const std::vector<int>& treated, double lo = 0.05,
                            double hi = 0.95);

/// |mean_t - mean_c| / sqrt((var_t + var_c)/2); weighted moments when
/// weights are given (population-style normalization). Zero pooled variance
/// returns 0 for equal means and +infinity otherwise.
double asmd(const Vec& treated_values, const Vec& control_values, const Vec* treated_weights = nullptr,
            const Vec* control_weights = nullptr);

/// Mean of Y_treated - Y_matched_control over the matched pairs. This
/// averages over treated units only, i.e. an ATT-form estimator.
double ate_matched(const MatchResult& match, const Vec& y_treated, const Vec& y_control);

/// Normalized (Hajek) IPTW estimate:
/// sum(w T y)/sum(w T) - sum(w (1-T) y)/sum(w (1-T)) over kept units.
double ate_iptw(const TrimmedWeights& tw, const std::vector<int>& treated, const Vec& y);

struct AteSummary {
  std::string group;
  int horizon = 0;
  double mean = 0;   // E_s over simulations
  double sd = 0;     // sigma_b, sample standard deviation
  std::size_t n_sims = 0;
  double ci_lo = 0;
  double ci_hi = 0;
};

enum class CiMode { PaperLiteral, StandardError };
std::string ci_mode_name(CiMode m);
std::optional<CiMode> ci_mode_from(std::string_view name);

/// Mean and sample sd over per-simulation estimates; half width
/// 1.96*sd/N_b (paper_literal) or 1.96*sd/sqrt(N_b) (standard_error).
AteSummary summarize_ci(const Vec& per_sim_ates, CiMode mode);

}  // namespace causeway::causal
