#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "causeway/classify.hpp"
#include "causeway/io.hpp"
#include "causeway/rng.hpp"

namespace causeway::classify {
namespace {

double clipped_logit(double p) {
  const double q = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(q / (1.0 - q));
}

}  // namespace

Vec predict_proba(const AnyModel& model, const Vec& x) {
  return std::visit([&](const auto& m) { return m.predict_proba(x); }, model);
}

SigmoidMap fit_platt(const Vec& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) throw Error("fit_platt: bad input");
  auto loss = [&](double a, double b) {
    double s = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double z = a * scores[i] + b;
      // log(1 + e^z) - y z, overflow safe
      s += z > 0 ? (1.0 - labels[i]) * z + std::log1p(std::exp(-z))
                 : -labels[i] * z + std::log1p(std::exp(z));
    }
    return s;
  };
  double a = 1.0, b = 0.0;
  double cur = loss(a, b);
  for (int it = 0; it < 200; ++it) {
    double ga = 0, gb = 0, haa = 0, hab = 0, hbb = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double z = a * scores[i] + b;
      const double p = 1.0 / (1.0 + std::exp(-z));
      const double r = p - static_cast<double>(labels[i]);
      const double h = std::max(p * (1.0 - p), 1e-12);
      ga += r * scores[i];
      gb += r;
      haa += h * scores[i] * scores[i];
      hab += h * scores[i];
      hbb += h;
    }
    haa += 1e-9;
    hbb += 1e-9;
    const double det = haa * hbb - hab * hab;
    if (std::fabs(det) < 1e-30) break;
    double da = (hbb * ga - hab * gb) / det;
    double db = (haa * gb - hab * ga) / det;
    // Damped Newton: halve until the loss drops (saturated scores make the
    // raw step explode).
    double step = 1.0, next = cur;
    for (int ls = 0; ls < 60; ++ls) {
      next = loss(a - step * da, b - step * db);
      if (next <= cur) break;
      step *= 0.5;
    }
    if (next > cur) break;
    a -= step * da;
    b -= step * db;
    const double moved = std::fabs(step * da) + std::fabs(step * db);
    cur = next;
    if (moved < 1e-12) break;
  }
  return SigmoidMap{a, b};
}

Vec CalibratedModel::predict_proba(const Vec& x) const {
  Vec p = classify::predict_proba(base, x);
  if (n_classes == 2) {
    const double q = 1.0 / (1.0 + std::exp(-(maps[0].a * clipped_logit(p[1]) + maps[0].b)));
    return {1.0 - q, q};
  }
  Vec out(p.size());
  double norm = 0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    out[c] = 1.0 / (1.0 + std::exp(-(maps[c].a * clipped_logit(p[c]) + maps[c].b)));
    norm += out[c];
  }
  if (norm <= 0) throw Error("CalibratedModel: degenerate calibration");
  for (double& v : out) v /= norm;
  return out;
}

CalibratedModel calibrate_prefit(AnyModel model, const Mat& X_holdout,
                                 const std::vector<int>& y_holdout) {
  if (X_holdout.empty() || X_holdout.size() != y_holdout.size())
    throw Error("calibrate: empty holdout or size mismatch");
  Mat probs(X_holdout.size());
  for (std::size_t i = 0; i < X_holdout.size(); ++i)
    probs[i] = predict_proba(model, X_holdout[i]);
  const std::size_t k = probs[0].size();
  std::vector<std::size_t> count(k, 0);
  for (int c : y_holdout) {
    if (c < 0 || static_cast<std::size_t>(c) >= k) throw Error("calibrate: label out of range");
    ++count[static_cast<std::size_t>(c)];
  }
  for (std::size_t c = 0; c < k; ++c)
    if (count[c] == 0)
      throw Error("calibrate: class " + std::to_string(c) + " missing from holdout");

  CalibratedModel cm;
  cm.base = std::move(model);
  cm.n_classes = k;
  if (k == 2) {
    Vec s(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) s[i] = clipped_logit(probs[i][1]);
    cm.maps.push_back(fit_platt(s, y_holdout));
  } else {
    for (std::size_t c = 0; c < k; ++c) {
      Vec s(probs.size());
      std::vector<int> ind(probs.size());
      for (std::size_t i = 0; i < probs.size(); ++i) {
        s[i] = clipped_logit(probs[i][c]);
        ind[i] = static_cast<std::size_t>(y_holdout[i]) == c ? 1 : 0;
      }
      cm.maps.push_back(fit_platt(s, ind));
    }
  }
  return cm;
}

CalibratedModel calibrate(const TrainFn& train, const Mat& X, const std::vector<int>& y,
                          double holdout_fraction, std::uint64_t seed) {
  if (X.size() != y.size() || X.empty()) throw Error("calibrate: bad input");
  if (holdout_fraction <= 0 || holdout_fraction >= 1)
    throw Error("calibrate: holdout fraction must be in (0,1)");
  // Stratified seeded split: the holdout keeps each class's share, so rare
  // classes survive the 20% cut whenever they have at least two rows.
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
  Rng rng(Rng::derive(seed, "calibrate-split"));
  Mat X_tr, X_ho;
  std::vector<int> y_tr, y_ho;
  for (auto& [label, idx] : by_class) {
    for (std::size_t i = idx.size() - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.next_below(i + 1)]);
    std::size_t n_hold = static_cast<std::size_t>(
        std::lround(holdout_fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) n_hold = std::clamp<std::size_t>(n_hold, 1, idx.size() - 1);
    else n_hold = 0;  // a singleton class stays in training; prefit will reject
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (i < n_hold) {
        X_ho.push_back(X[idx[i]]);
        y_ho.push_back(y[idx[i]]);
      } else {
        X_tr.push_back(X[idx[i]]);
        y_tr.push_back(y[idx[i]]);
      }
    }
  }
  if (X_ho.empty() || X_tr.empty()) throw Error("calibrate: split left a side empty");
  AnyModel base = train(X_tr, y_tr);
  return calibrate_prefit(std::move(base), X_ho, y_ho);
}

// ---- serialization ----

nlohmann::json to_json(const LinearModel& m) {
  return {{"format_version", 1}, {"kind", "linear"},     {"n_classes", m.n_classes},
          {"n_features", m.n_features}, {"weights", m.weights}, {"bias", m.bias},
          {"C", m.C},            {"class_weights", m.class_weights_used},
          {"converged", m.converged}, {"iterations", m.iterations}};
}

LinearModel linear_from_json(const nlohmann::json& j) {
  if (j.at("kind") != "linear") throw Error("model json: expected kind=linear");
  LinearModel m;
  m.n_classes = j.at("n_classes").get<std::size_t>();
  m.n_features = j.at("n_features").get<std::size_t>();
  m.weights = j.at("weights").get<Mat>();
  m.bias = j.at("bias").get<Vec>();
  m.C = j.at("C").get<double>();
  m.class_weights_used = j.at("class_weights").get<Vec>();
  m.converged = j.at("converged").get<bool>();
  m.iterations = j.at("iterations").get<int>();
  return m;
}

nlohmann::json to_json(const BoostedModel& m) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : m.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes)
      nodes.push_back({{"f", n.feature}, {"t", n.threshold}, {"l", n.left}, {"r", n.right}, {"v", n.value}});
    trees.push_back(std::move(nodes));
  }
  return {{"format_version", 1},     {"kind", "boosted"},
          {"trees", std::move(trees)}, {"learning_rate", m.learning_rate},
          {"init_log_odds", m.init_log_odds}, {"depth", m.depth}};
}

BoostedModel boosted_from_json(const nlohmann::json& j) {
  if (j.at("kind") != "boosted") throw Error("model json: expected kind=boosted");
  BoostedModel m;
  m.learning_rate = j.at("learning_rate").get<double>();
  m.init_log_odds = j.at("init_log_odds").get<double>();
  m.depth = j.at("depth").get<int>();
  for (const auto& tj : j.at("trees")) {
    RegressionTree t;
    for (const auto& nj : tj) {
      TreeNode n;
      n.feature = nj.at("f").get<int>();
      n.threshold = nj.at("t").get<double>();
      n.left = nj.at("l").get<int>();
      n.right = nj.at("r").get<int>();
      n.value = nj.at("v").get<double>();
      t.nodes.push_back(n);
    }
    m.trees.push_back(std::move(t));
  }
  return m;
}

nlohmann::json to_json(const CalibratedModel& m) {
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& s : m.maps) maps.push_back({{"a", s.a}, {"b", s.b}});
  nlohmann::json base = std::visit([](const auto& b) { return to_json(b); }, m.base);
  return {{"format_version", 1},
          {"kind", "calibrated"},
          {"base", std::move(base)},
          {"maps", std::move(maps)},
          {"n_classes", m.n_classes}};
}

CalibratedModel calibrated_from_json(const nlohmann::json& j) {
  if (j.at("kind") != "calibrated") throw Error("model json: expected kind=calibrated");
  CalibratedModel m;
  const auto& bj = j.at("base");
  if (bj.at("kind") == "linear") m.base = linear_from_json(bj);
  else m.base = boosted_from_json(bj);
  for (const auto& sj : j.at("maps"))
    m.maps.push_back(SigmoidMap{sj.at("a").get<double>(), sj.at("b").get<double>()});
  m.n_classes = j.at("n_classes").get<std::size_t>();
  return m;
}

}  // namespace causeway::classify
