#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace causeway::classify {

using Vec = std::vector<double>;
using Mat = std::vector<std::vector<double>>;  // row major, rows = samples

enum class ClassWeightMode { None, Balanced, Explicit };

struct LogisticOptions {
  double C = 1.0;  // inverse regularization strength
  ClassWeightMode class_weight = ClassWeightMode::None;
  Vec explicit_class_weights;
  Vec sample_weights;  // empty = all ones
  int max_iter = 10000;
  double grad_tol = 1e-6;  // infinity norm of the objective gradient
  Vec init;                // optional flat [k*(d+1)] start point, tests only
};

/// Multinomial logistic regression; for two classes the softmax form reduces
/// to a single weight vector (w1 - w0).
struct LinearModel {
  std::size_t n_classes = 0;
  std::size_t n_features = 0;
  Mat weights;  // [classes][features]
  Vec bias;     // [classes]
  double C = 1.0;
  Vec class_weights_used;
  bool converged = false;
  int iterations = 0;
  double final_loss = 0;

  Vec predict_proba(const Vec& x) const;
  Vec decision(const Vec& x) const;  // per-class logits
};

LinearModel fit_logistic(const Mat& X, const std::vector<int>& y,
                         const LogisticOptions& opt = {});

/// Objective/gradient of the fit, exposed so tests can check the analytic
/// gradient against finite differences. Parameters flat: k rows of
/// (d weights, then bias).
double logistic_objective(const Mat& X, const std::vector<int>& y, const Vec& row_weights,
                          double C, std::size_t k, const Vec& params);
Vec logistic_gradient(const Mat& X, const std::vector<int>& y, const Vec& row_weights,
                      double C, std::size_t k, const Vec& params);
Vec logistic_row_weights(const std::vector<int>& y, std::size_t k, const LogisticOptions& opt);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;  // leaf contribution (already learning-rate free)
};

struct RegressionTree {
  std::vector<TreeNode> nodes;
  double predict(const Vec& x) const;
};

struct GbmOptions {
  int rounds = 100;
  int depth = 3;
  double learning_rate = 0.1;
  Vec sample_weights;
  int min_leaf = 1;
};

/// Gradient boosting on logistic loss: each round fits a depth-limited
/// regression tree to the negative gradient (y - p); leaf values take a
/// Newton step sum(w r)/sum(w p(1-p)).
struct BoostedModel {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.1;
  double init_log_odds = 0;
  int depth = 0;
  Vec train_loss;  // mean weighted logloss per round, index 0 = before boosting

  double score(const Vec& x) const;  // log odds
  Vec predict_proba(const Vec& x) const;
};

BoostedModel fit_gbm(const Mat& X, const std::vector<int>& y, const GbmOptions& opt = {});

struct SigmoidMap {
  double a = 1.0;
  double b = 0.0;
};

/// Fits p = sigmoid(a*score + b) by logloss (Newton); scores are logits.
SigmoidMap fit_platt(const Vec& scores, const std::vector<int>& labels);

using AnyModel = std::variant<LinearModel, BoostedModel>;
Vec predict_proba(const AnyModel& model, const Vec& x);

/// Base model plus per-class sigmoid recalibration (one-vs-rest on logits,
/// renormalized; a single map for the binary case so rankings never change).
struct CalibratedModel {
  AnyModel base;
  std::vector<SigmoidMap> maps;
  std::size_t n_classes = 0;

  Vec predict_proba(const Vec& x) const;
};

using TrainFn = std::function<AnyModel(const Mat&, const std::vector<int>&)>;

/// Holds out `holdout_fraction` of the rows (seeded shuffle), trains the base
/// model on the rest and fits the calibration maps on the holdout. Throws if
/// the holdout is missing a class.
CalibratedModel calibrate(const TrainFn& train, const Mat& X, const std::vector<int>& y,
                          double holdout_fraction = 0.2, std::uint64_t seed = 0);

/// Calibration maps from an already-trained model and explicit holdout data.
CalibratedModel calibrate_prefit(AnyModel model, const Mat& X_holdout,
                                 const std::vector<int>& y_holdout);

nlohmann::json to_json(const LinearModel& m);
nlohmann::json to_json(const BoostedModel& m);
nlohmann::json to_json(const CalibratedModel& m);
LinearModel linear_from_json(const nlohmann::json& j);
BoostedModel boosted_from_json(const nlohmann::json& j);
CalibratedModel calibrated_from_json(const nlohmann::json& j);

}  // namespace causeway::classify
