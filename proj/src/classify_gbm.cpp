#include <algorithm>
#include <cmath>
#include <numeric>

#include "causeway/classify.hpp"
#include "causeway/io.hpp"

namespace causeway::classify {
namespace {

double stable_logloss(double f, int y) {
  // log(1+e^f) - y*f without overflow
  if (f > 0) return (1.0 - y) * f + std::log1p(std::exp(-f));
  return -y * f + std::log1p(std::exp(f));
}

constexpr double kLeafClamp = 10.0;
constexpr double kHessianRidge = 1e-12;

struct Split {
  int feature = -1;
  double threshold = 0;
  // Zero-gain splits are allowed (a constant-residual node may still need a
  // split for deeper structure, e.g. xor); first candidate wins ties.
  double gain = -1.0;
};

}  // namespace

double RegressionTree::predict(const Vec& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const TreeNode& n = nodes[static_cast<std::size_t>(node)];
    node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

double BoostedModel::score(const Vec& x) const {
  double f = init_log_odds;
  for (const auto& t : trees) f += learning_rate * t.predict(x);
  return f;
}

Vec BoostedModel::predict_proba(const Vec& x) const {
  const double p = 1.0 / (1.0 + std::exp(-score(x)));
  return {1.0 - p, p};
}

BoostedModel fit_gbm(const Mat& X, const std::vector<int>& y, const GbmOptions& opt) {
  if (opt.rounds < 0) throw Error("fit_gbm: rounds must be >= 0");
  if (opt.depth < 0) throw Error("fit_gbm: depth must be >= 0");
  if (X.empty() || X.size() != y.size()) throw Error("fit_gbm: empty data or X/y size mismatch");
  const std::size_t m = X.size(), d = X[0].size();
  for (const auto& row : X)
    if (row.size() != d) throw Error("fit_gbm: ragged feature matrix");
  for (int c : y)
    if (c != 0 && c != 1) throw Error("fit_gbm: labels must be binary 0/1");
  Vec w(m, 1.0);
  if (!opt.sample_weights.empty()) {
    if (opt.sample_weights.size() != m) throw Error("fit_gbm: sample weights size mismatch");
    w = opt.sample_weights;
  }
  double wsum = 0, wpos = 0;
  for (std::size_t i = 0; i < m; ++i) {
    wsum += w[i];
    if (y[i] == 1) wpos += w[i];
  }
  if (wsum <= 0) throw Error("fit_gbm: total sample weight is zero");
  const double p0 = std::clamp(wpos / wsum, 1e-12, 1.0 - 1e-12);

  BoostedModel model;
  model.learning_rate = opt.learning_rate;
  model.depth = opt.depth;
  model.init_log_odds = std::log(p0 / (1.0 - p0));

  Vec f(m, model.init_log_odds);
  auto mean_loss = [&] {
    double s = 0;
    for (std::size_t i = 0; i < m; ++i) s += w[i] * stable_logloss(f[i], y[i]);
    return s / wsum;
  };
  model.train_loss.push_back(mean_loss());

  // Presorted row indices per feature, reused across rounds.
  std::vector<std::vector<std::uint32_t>> sorted(d);
  for (std::size_t j = 0; j < d; ++j) {
    sorted[j].resize(m);
    std::iota(sorted[j].begin(), sorted[j].end(), 0u);
    std::stable_sort(sorted[j].begin(), sorted[j].end(),
                     [&](std::uint32_t a, std::uint32_t b) { return X[a][j] < X[b][j]; });
  }

  Vec r(m), h(m);
  std::vector<int> node_of(m);
  for (int round = 0; round < opt.rounds; ++round) {
    for (std::size_t i = 0; i < m; ++i) {
      const double p = 1.0 / (1.0 + std::exp(-f[i]));
      r[i] = static_cast<double>(y[i]) - p;
      h[i] = p * (1.0 - p);
    }

    RegressionTree tree;
    tree.nodes.push_back(TreeNode{});
    std::fill(node_of.begin(), node_of.end(), 0);
    std::vector<int> level_nodes = {0};

    for (int depth = 0; depth < opt.depth && !level_nodes.empty(); ++depth) {
      const int node_count = static_cast<int>(tree.nodes.size());
      // Node totals for this level.
      std::vector<double> tot_w(node_count, 0), tot_wr(node_count, 0);
      std::vector<std::size_t> tot_n(node_count, 0);
      for (std::size_t i = 0; i < m; ++i) {
        const int u = node_of[i];
        if (u < 0) continue;
        tot_w[u] += w[i];
        tot_wr[u] += w[i] * r[i];
        ++tot_n[u];
      }
      std::vector<Split> best(node_count);
      std::vector<double> left_w(node_count), left_wr(node_count), prev_val(node_count);
      std::vector<std::size_t> left_n(node_count);
      std::vector<char> started(node_count);

      for (std::size_t j = 0; j < d; ++j) {
        for (int u : level_nodes) {
          left_w[u] = left_wr[u] = 0;
          left_n[u] = 0;
          started[u] = 0;
        }
        for (std::uint32_t row : sorted[j]) {
          const int u = node_of[row];
          if (u < 0) continue;
          const double v = X[row][j];
          if (started[u] && v > prev_val[u] && left_n[u] >= static_cast<std::size_t>(opt.min_leaf) &&
              tot_n[u] - left_n[u] >= static_cast<std::size_t>(opt.min_leaf) && left_w[u] > 0 &&
              tot_w[u] - left_w[u] > 0) {
            const double sl = left_wr[u], sr = tot_wr[u] - sl;
            const double wl = left_w[u], wr_ = tot_w[u] - wl;
            const double gain = sl * sl / wl + sr * sr / wr_ - tot_wr[u] * tot_wr[u] / tot_w[u];
            if (gain > best[u].gain + 1e-12) {
              best[u].gain = gain;
              best[u].feature = static_cast<int>(j);
              best[u].threshold = 0.5 * (prev_val[u] + v);
            }
          }
          left_w[u] += w[row];
          left_wr[u] += w[row] * r[row];
          ++left_n[u];
          prev_val[u] = v;
          started[u] = 1;
        }
      }

      std::vector<int> next_level;
      for (int u : level_nodes) {
        if (best[u].feature < 0) continue;  // stays a leaf
        const int left_id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{});
        tree.nodes.push_back(TreeNode{});
        TreeNode& n = tree.nodes[static_cast<std::size_t>(u)];  // after reallocation
        n.feature = best[u].feature;
        n.threshold = best[u].threshold;
        n.left = left_id;
        n.right = left_id + 1;
        next_level.push_back(n.left);
        next_level.push_back(n.right);
      }
      for (std::size_t i = 0; i < m; ++i) {
        const int u = node_of[i];
        if (u < 0) continue;
        const TreeNode& n = tree.nodes[static_cast<std::size_t>(u)];
        if (n.feature >= 0)
          node_of[i] = X[i][static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
      }
      level_nodes = std::move(next_level);
    }

    // Newton leaf values.
    std::vector<double> leaf_wr(tree.nodes.size(), 0), leaf_wh(tree.nodes.size(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      const int u = node_of[i];
      leaf_wr[static_cast<std::size_t>(u)] += w[i] * r[i];
      leaf_wh[static_cast<std::size_t>(u)] += w[i] * h[i];
    }
    for (std::size_t u = 0; u < tree.nodes.size(); ++u) {
      if (tree.nodes[u].feature >= 0) continue;
      tree.nodes[u].value =
          std::clamp(leaf_wr[u] / (leaf_wh[u] + kHessianRidge), -kLeafClamp, kLeafClamp);
    }
    for (std::size_t i = 0; i < m; ++i)
      f[i] += opt.learning_rate * tree.nodes[static_cast<std::size_t>(node_of[i])].value;

    model.trees.push_back(std::move(tree));
    model.train_loss.push_back(mean_loss());
  }
  return model;
}

}  // namespace causeway::classify
