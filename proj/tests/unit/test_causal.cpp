#include <doctest.h>

#include <cmath>
#include <limits>

#include "causeway/causal.hpp"
#include "causeway/io.hpp"
#include "causeway/rng.hpp"

using namespace causeway;
using namespace causeway::causal;

namespace {

Mat random_matrix(std::size_t n, std::size_t d, Rng& rng) {
  Mat x(n, Vec(d));
  for (auto& row : x)
    for (auto& v : row) v = rng.next_normal();
  return x;
}

}  // namespace

TEST_CASE("cosine distance basics") {
  CHECK(cosine_distance({1, 2, 3}, {1, 2, 3}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cosine_distance({1, 0}, {0, 1}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_distance({1, 0}, {1, 1}) == doctest::Approx(1.0 - 1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(cosine_distance({1, 0}, {-1, 0}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_THROWS_AS(cosine_distance({0, 0}, {1, 0}), Error);
  CHECK_THROWS_AS(cosine_distance({1, 0}, {1, 0, 0}), Error);
}

TEST_CASE("nnm_match agrees with an exhaustive scan") {
  Rng rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat treated = random_matrix(50, 5, rng);
    const Mat controls = random_matrix(200, 5, rng);
    const auto match = nnm_match(treated, controls, NnmMetric::Cosine);
    REQUIRE(match.pairs.size() == 50);
    for (std::size_t i = 0; i < treated.size(); ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < controls.size(); ++j) {
        const double d = cosine_distance(treated[i], controls[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      CHECK(match.pairs[i].second == best);
    }
  }
}

TEST_CASE("nnm single control and replacement semantics") {
  const Mat treated = {{0.9, 0.1}, {0.1, 0.9}};
  const Mat one_control = {{1.0, 1.0}};
  const auto match = nnm_match(treated, one_control);
  CHECK(match.pairs[0].second == 0);
  CHECK(match.pairs[1].second == 0);  // with replacement
  CHECK_THROWS_AS(nnm_match(treated, Mat{}), Error);
}

TEST_CASE("psm squared distance gives the same matches as absolute distance") {
  Rng rng(55);
  Vec et(30), ec(100);
  for (auto& v : et) v = 0.05 + 0.9 * rng.next_unit();
  for (auto& v : ec) v = 0.05 + 0.9 * rng.next_unit();
  const auto match = psm_match(et, ec);
  for (std::size_t i = 0; i < et.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ec.size(); ++j) {
      const double d = std::fabs(et[i] - ec[j]);  // |.| ordering equals (.)^2 ordering
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    CHECK(match.pairs[i].second == best);
  }
}

TEST_CASE("fit_propensity on identical covariate distributions centers near 0.5") {
  Rng rng(321);
  const std::size_t n = 2000;
  Mat X = random_matrix(n, 3, rng);
  std::vector<int> t(n, 0);
  for (std::size_t i = 0; i < n / 2; ++i) t[i] = 1;
  const auto e = fit_propensity(X, t);
  double mean = 0;
  for (double v : e) {
    mean += v;
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  mean /= static_cast<double>(n);
  CHECK(std::fabs(mean - 0.5) < 0.05);

  CHECK_THROWS_AS(fit_propensity(X, std::vector<int>(n, 1)), Error);
}

TEST_CASE("fit_propensity separable groups push scores to the extremes") {
  Mat X;
  std::vector<int> t;
  for (int i = 0; i < 50; ++i) {
    X.push_back({5.0 + i * 0.01});
    t.push_back(1);
    X.push_back({-5.0 - i * 0.01});
    t.push_back(0);
  }
  const auto e = fit_propensity(X, t);
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (t[i] == 1) CHECK(e[i] > 0.9);
    else CHECK(e[i] < 0.1);
  }
}

TEST_CASE("iptw weights and inclusive trimming bounds") {
  const Vec e = {0.5, 0.2, 0.96, 0.05, 0.95, 0.04};
  const std::vector<int> t = {1, 1, 1, 0, 1, 0};
  const auto tw = iptw_weights(e, t);
  CHECK(tw.weights[0] == doctest::Approx(2.0));
  CHECK(tw.weights[1] == doctest::Approx(5.0));
  CHECK(!tw.kept[2]);  // 0.96 trimmed
  CHECK(tw.kept[3]);   // boundary 0.05 kept
  CHECK(tw.kept[4]);   // boundary 0.95 kept
  CHECK(!tw.kept[5]);
  CHECK(tw.n_trimmed == 2);
  CHECK(tw.weights[3] == doctest::Approx(1.0 / 0.95));
  CHECK_THROWS_AS(iptw_weights({0.0}, {1}), Error);
}

TEST_CASE("asmd hand values and weighted version") {
  // means 1 vs 0, both population variances 1
  CHECK(asmd({0, 2}, {-1, 1}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(asmd({1, 1, 1}, {1, 1, 1}) == doctest::Approx(0.0));
  CHECK(std::isinf(asmd({1, 1}, {2, 2})));
  CHECK_THROWS_AS(asmd({1}, {1, 2}), Error);

  // weights that zero out half the sample reproduce the subset value
  const Vec t = {0, 2, 100, 100};
  const Vec wt = {1, 1, 0, 0};
  const Vec c = {-1, 1};
  CHECK(asmd(t, c, &wt, nullptr) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ate_matched hand fixture and self-match zero") {
  MatchResult m;
  m.pairs = {{0, 0}, {1, 1}};
  CHECK(ate_matched(m, {1, 1}, {0, 1}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ate_matched(m, {1, 1}, {1, 1}) == doctest::Approx(0.0));

  // self-matched population: controls identical to treated
  Rng rng(9);
  const Mat x = random_matrix(20, 3, rng);
  Vec y(20);
  for (auto& v : y) v = rng.next_unit() < 0.5 ? 0.0 : 1.0;
  const auto self_match = nnm_match(x, x);
  CHECK(ate_matched(self_match, y, y) == doctest::Approx(0.0));
}

TEST_CASE("ate_iptw matches the hand-derived four-unit fixture") {
  // units (T, e, Y): (1,0.8,1) w=1.25; (1,0.4,0) w=2.5; (0,0.5,1) w=2; (0,0.2,0) w=1.25
  // treated term 1.25/3.75 = 1/3; control term 2/3.25 = 8/13; ATE = -11/39
  const Vec e = {0.8, 0.4, 0.5, 0.2};
  const std::vector<int> t = {1, 1, 0, 0};
  const Vec y = {1, 0, 1, 0};
  const auto tw = iptw_weights(e, t);
  CHECK(tw.n_trimmed == 0);
  CHECK(ate_iptw(tw, t, y) == doctest::Approx(-11.0 / 39.0).epsilon(1e-12));
}

TEST_CASE("constant propensity reduces to the difference in means") {
  Rng rng(44);
  const std::size_t n = 501;
  Vec e(n, 0.5), y(n);
  std::vector<int> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = rng.next_unit() < 0.4 ? 1 : 0;
    y[i] = rng.next_unit() < 0.3 ? 1.0 : 0.0;
  }
  if (std::count(t.begin(), t.end(), 1) == 0) t[0] = 1;
  if (std::count(t.begin(), t.end(), 0) == 0) t[1] = 0;
  const auto tw = iptw_weights(e, t);
  double st = 0, sc = 0, nt = 0, nc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i]) {
      st += y[i];
      nt += 1;
    } else {
      sc += y[i];
      nc += 1;
    }
  }
  CHECK(std::fabs(ate_iptw(tw, t, y) - (st / nt - sc / nc)) < 1e-12);
}

TEST_CASE("ate_iptw is invariant to uniform weight rescaling") {
  const Vec e = {0.8, 0.4, 0.5, 0.2, 0.6, 0.3};
  const std::vector<int> t = {1, 1, 0, 0, 1, 0};
  const Vec y = {1, 0, 1, 0, 1, 1};
  auto tw = iptw_weights(e, t);
  const double base = ate_iptw(tw, t, y);
  for (auto& w : tw.weights) w *= 37.5;
  CHECK(ate_iptw(tw, t, y) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("empty group after trimming raises") {
  const Vec e = {0.99, 0.5};
  const std::vector<int> t = {1, 0};
  const auto tw = iptw_weights(e, t);
  CHECK_THROWS_AS(ate_iptw(tw, t, {1, 0}), Error);
}

TEST_CASE("summarize_ci modes") {
  const auto lit = summarize_ci({0.0, 1.0}, CiMode::PaperLiteral);
  CHECK(lit.mean == doctest::Approx(0.5));
  CHECK(lit.sd == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  CHECK(lit.ci_hi - lit.mean == doctest::Approx(1.96 * std::sqrt(0.5) / 2.0).epsilon(1e-12));

  const auto se = summarize_ci({0.0, 1.0}, CiMode::StandardError);
  CHECK(se.ci_hi - se.mean == doctest::Approx(1.96 * std::sqrt(0.5) / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(se.ci_hi - se.mean == doctest::Approx(0.98).epsilon(1e-12));

  const auto collapsed = summarize_ci({0.25, 0.25, 0.25}, CiMode::PaperLiteral);
  CHECK(collapsed.ci_lo == doctest::Approx(0.25));
  CHECK(collapsed.ci_hi == doctest::Approx(0.25));

  CHECK_THROWS_AS(summarize_ci({1.0}, CiMode::PaperLiteral), Error);
  CHECK(lit.ci_lo <= lit.mean);
  CHECK(lit.mean <= lit.ci_hi);
}

TEST_CASE("iptw with true scores improves covariate balance on tilted data") {
  // Treatment probability rises with a latent u that also shifts x.
  Rng rng(2718);
  const std::size_t n = 5000, d = 10;
  Mat X(n, Vec(d));
  std::vector<int> t(n);
  Vec e_true(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.next_normal();
    for (std::size_t j = 0; j < d; ++j) X[i][j] = u + rng.next_normal();
    e_true[i] = 1.0 / (1.0 + std::exp(-(1.2 * u)));
    t[i] = rng.next_unit() < e_true[i] ? 1 : 0;
  }
  const auto tw = iptw_weights(e_true, t);
  std::size_t improved = 0;
  for (std::size_t j = 0; j < d; ++j) {
    Vec xt, xc, wt, wc;
    for (std::size_t i = 0; i < n; ++i) {
      if (t[i] == 1) {
        xt.push_back(X[i][j]);
        wt.push_back(tw.kept[i] ? tw.weights[i] : 0.0);
      } else {
        xc.push_back(X[i][j]);
        wc.push_back(tw.kept[i] ? tw.weights[i] : 0.0);
      }
    }
    const double before = asmd(xt, xc);
    const double after = asmd(xt, xc, &wt, &wc);
    if (after < before) ++improved;
  }
  CHECK(improved >= d * 95 / 100);
}
