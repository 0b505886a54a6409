#include "causeway/study.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "causeway/io.hpp"
#include "causeway/rng.hpp"
#include "causeway/stance.hpp"

namespace causeway::causal {

std::string method_name(Method m) {
  switch (m) {
    case Method::Naive: return "naive";
    case Method::Nnm: return "nnm";
    case Method::PsmLr: return "psm_lr";
    case Method::PsmGbm: return "psm_gbm";
    case Method::IptwLr: return "iptw_lr";
    case Method::IptwGbm: return "iptw_gbm";
  }
  return "?";
}

std::optional<Method> method_from(std::string_view name) {
  for (Method m : {Method::Naive, Method::Nnm, Method::PsmLr, Method::PsmGbm, Method::IptwLr,
                   Method::IptwGbm})
    if (method_name(m) == name) return m;
  return std::nullopt;
}

std::vector<Method> all_matching_methods() {
  return {Method::Nnm, Method::PsmLr, Method::PsmGbm, Method::IptwLr, Method::IptwGbm};
}

StudyData build_study_data(const std::vector<corpus::Tweet>& tweets,
                           const std::vector<corpus::UserRecord>& users,
                           cohort::PolicyTable policy, const StudyConfig& config,
                           bool include_retweets) {
  std::map<std::string, StudyUser> by_user;
  for (const auto& u : users) {
    StudyUser s;
    s.id = u.id;
    s.state = u.state;
    s.first_cannabis_any = u.first_cannabis;
    by_user.emplace(u.id, std::move(s));
  }

  std::map<std::string, std::pair<std::vector<double>, std::size_t>> cov_sum;
  for (const auto& t : tweets) {
    auto it = by_user.find(t.user_id);
    if (it == by_user.end()) continue;  // user filtered out (bots, no majority)
    if (!t.personal || !t.has_stance) continue;
    if (!include_retweets && t.is_retweet) continue;
    StudyTweet st;
    st.id_hash = fnv1a64(t.id);
    st.date = t.date;
    st.p_s = t.p_stance;
    if (t.dataset == corpus::Dataset::Juul) {
      it->second.juul.push_back(st);
      // Covariates: pre-treatment mean over personal JUUL tweets.
      if (t.date < config.legalization_date) {
        auto& acc = cov_sum[t.user_id];
        if (acc.first.empty()) acc.first.assign(t.embedding.size(), 0.0);
        for (std::size_t j = 0; j < t.embedding.size(); ++j) acc.first[j] += t.embedding[j];
        ++acc.second;
      }
    } else {
      it->second.cannabis.push_back(st);
    }
  }
  StudyData data;
  data.policy = std::move(policy);
  data.users.reserve(by_user.size());
  for (auto& [id, su] : by_user) {
    auto it = cov_sum.find(id);
    if (it != cov_sum.end() && it->second.second > 0) {
      su.covariates = it->second.first;
      for (double& v : su.covariates) v /= static_cast<double>(it->second.second);
      su.has_covariates = true;
    }
    data.users.push_back(std::move(su));
  }
  return data;
}

namespace {

struct ContrastData {
  Mat x;                    // treated rows first
  std::vector<int> treated;
  std::vector<Vec> y;       // per horizon index
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
};

// All estimators of one (group, method) cell share this view.
ContrastData make_contrast(const std::vector<cohort::CausalUnit>& units, cohort::Group g,
                           const std::vector<int>& horizons) {
  ContrastData c;
  c.y.assign(horizons.size(), Vec{});
  auto push = [&](const cohort::CausalUnit& u) {
    c.x.push_back(u.covariates);
    c.treated.push_back(u.treated);
    for (std::size_t h = 0; h < horizons.size(); ++h)
      c.y[h].push_back(static_cast<double>(u.outcomes[static_cast<std::size_t>(horizons[h] - 1)]));
  };
  for (const auto& u : units)
    if (u.treated == 1) {
      push(u);
      ++c.n_treated;
    }
  for (const auto& u : units)
    if (u.treated == 0 && u.group == g) {
      push(u);
      ++c.n_control;
    }
  return c;
}

Vec column(const Mat& x, std::size_t dim, std::size_t from, std::size_t to) {
  Vec out;
  out.reserve(to - from);
  for (std::size_t i = from; i < to; ++i) out.push_back(x[i][dim]);
  return out;
}

}  // namespace

SimulationResult run_simulation(const StudyData& data, const StudyConfig& config, int sim_index) {
  SimulationResult result;
  result.sim_index = sim_index;
  const auto sim_tag = static_cast<std::uint64_t>(sim_index);

  // Stance draws and per-user verdicts.
  std::vector<cohort::UserDraw> draws;
  draws.reserve(data.users.size());
  for (const auto& su : data.users) {
    cohort::UserDraw d;
    d.user_id = su.id;
    d.state = su.state;
    d.first_cannabis = su.first_cannabis_any;
    d.covariates = su.covariates;
    d.has_covariates = su.has_covariates;

    std::vector<stance::DatedStance> juul;
    juul.reserve(su.juul.size());
    for (const auto& t : su.juul)
      juul.push_back({t.date, stance::sample_stance(
                                  t.p_s, keyed_unit(config.master_seed, sim_tag, t.id_hash))});
    d.pro_juul = stance::pro_juul(juul, config.legalization_date);

    std::vector<stance::DatedStance> cannabis;
    cannabis.reserve(su.cannabis.size());
    for (const auto& t : su.cannabis)
      cannabis.push_back({t.date, stance::sample_stance(
                                      t.p_s, keyed_unit(config.master_seed, sim_tag, t.id_hash))});
    const auto pc =
        stance::pro_cannabis(cannabis, config.legalization_date, config.study_end);
    d.first_pro_cannabis = pc.first_pro_date;
    draws.push_back(std::move(d));
  }

  std::vector<const cohort::UserDraw*> eligible;
  for (const auto& d : draws)
    if (d.has_covariates && cohort::eligible(d, config.legalization_date)) eligible.push_back(&d);
  result.n_eligible = eligible.size();

  const auto units = cohort::assign_groups(eligible, config.treatment_state,
                                           config.legalization_date, data.policy);
  for (const auto& u : units) ++result.group_sizes[u.group];

  const bool want_lr = std::count(config.methods.begin(), config.methods.end(), Method::IptwLr) ||
                       std::count(config.methods.begin(), config.methods.end(), Method::PsmLr);
  const bool want_gbm = std::count(config.methods.begin(), config.methods.end(), Method::IptwGbm) ||
                        std::count(config.methods.begin(), config.methods.end(), Method::PsmGbm);

  for (cohort::Group g : {cohort::Group::C1, cohort::Group::C2, cohort::Group::C3, cohort::Group::C4}) {
    const ContrastData c = make_contrast(units, g, config.horizons);
    // Leave every cell of this contrast missing when a side is empty.
    if (c.n_treated == 0 || c.n_control == 0) {
      for (Method m : config.methods)
        for (std::size_t h = 0; h < config.horizons.size(); ++h)
          result.cells[{m, g, config.horizons[h]}] = CellValue{};
      continue;
    }
    const std::size_t nt = c.n_treated;
    const std::size_t n = c.x.size();
    const std::size_t dims = c.x[0].size();

    Vec e_lr, e_gbm;
    if (want_lr) {
      PropensityOptions po;
      po.model = PropensityModel::LR;
      po.C = config.propensity_C;
      try {
        e_lr = fit_propensity(c.x, c.treated, po);
      } catch (const Error&) {
      }
    }
    if (want_gbm) {
      PropensityOptions po;
      po.model = PropensityModel::GBM;
      po.gbm = config.propensity_gbm;
      try {
        e_gbm = fit_propensity(c.x, c.treated, po);
      } catch (const Error&) {
      }
    }

    for (Method m : config.methods) {
      auto record_balance = [&](const Vec* wt, const Vec* wc, const MatchResult* match) {
        auto& rows = result.balance[{m, g}];
        rows.assign(dims, {0, 0});
        for (std::size_t dim = 0; dim < dims; ++dim) {
          const Vec xt = column(c.x, dim, 0, nt);
          const Vec xc = column(c.x, dim, nt, n);
          double before, after;
          try {
            before = asmd(xt, xc);
          } catch (const Error&) {
            before = std::numeric_limits<double>::quiet_NaN();
          }
          try {
            if (match) {
              Vec matched;
              matched.reserve(match->pairs.size());
              for (const auto& [ti, ci] : match->pairs) matched.push_back(xc[ci]);
              after = asmd(xt, matched);
            } else if (wt) {
              after = asmd(xt, xc, wt, wc);
            } else {
              after = before;
            }
          } catch (const Error&) {
            after = std::numeric_limits<double>::quiet_NaN();
          }
          rows[dim] = {before, after};
        }
      };

      try {
        switch (m) {
          case Method::Naive: {
            for (std::size_t h = 0; h < config.horizons.size(); ++h) {
              double st = 0, sc = 0;
              for (std::size_t i = 0; i < n; ++i)
                (i < nt ? st : sc) += c.y[h][i];
              CellValue v;
              v.missing = false;
              v.ate = st / static_cast<double>(nt) - sc / static_cast<double>(n - nt);
              v.n_treated = nt;
              v.n_control = n - nt;
              result.cells[{m, g, config.horizons[h]}] = v;
            }
            record_balance(nullptr, nullptr, nullptr);
            break;
          }
          case Method::Nnm: {
            Mat xt(c.x.begin(), c.x.begin() + static_cast<std::ptrdiff_t>(nt));
            Mat xc(c.x.begin() + static_cast<std::ptrdiff_t>(nt), c.x.end());
            const MatchResult match = nnm_match(xt, xc, NnmMetric::Cosine);
            for (std::size_t h = 0; h < config.horizons.size(); ++h) {
              Vec yt(c.y[h].begin(), c.y[h].begin() + static_cast<std::ptrdiff_t>(nt));
              Vec yc(c.y[h].begin() + static_cast<std::ptrdiff_t>(nt), c.y[h].end());
              CellValue v;
              v.missing = false;
              v.ate = ate_matched(match, yt, yc);
              v.n_treated = nt;
              v.n_control = n - nt;
              result.cells[{m, g, config.horizons[h]}] = v;
            }
            record_balance(nullptr, nullptr, &match);
            break;
          }
          case Method::PsmLr:
          case Method::PsmGbm: {
            const Vec& e = m == Method::PsmLr ? e_lr : e_gbm;
            if (e.empty()) throw Error("propensity fit unavailable");
            Vec et(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(nt));
            Vec ec(e.begin() + static_cast<std::ptrdiff_t>(nt), e.end());
            const MatchResult match = psm_match(et, ec);
            for (std::size_t h = 0; h < config.horizons.size(); ++h) {
              Vec yt(c.y[h].begin(), c.y[h].begin() + static_cast<std::ptrdiff_t>(nt));
              Vec yc(c.y[h].begin() + static_cast<std::ptrdiff_t>(nt), c.y[h].end());
              CellValue v;
              v.missing = false;
              v.ate = ate_matched(match, yt, yc);
              v.n_treated = nt;
              v.n_control = n - nt;
              result.cells[{m, g, config.horizons[h]}] = v;
            }
            record_balance(nullptr, nullptr, &match);
            break;
          }
          case Method::IptwLr:
          case Method::IptwGbm: {
            const Vec& e = m == Method::IptwLr ? e_lr : e_gbm;
            if (e.empty()) throw Error("propensity fit unavailable");
            const TrimmedWeights tw = iptw_weights(e, c.treated, config.trim_lo, config.trim_hi);
            for (std::size_t h = 0; h < config.horizons.size(); ++h) {
              CellValue v;
              v.ate = ate_iptw(tw, c.treated, c.y[h]);  // throws if a side trims away
              v.missing = false;
              v.n_treated = nt;
              v.n_control = n - nt;
              v.n_trimmed = tw.n_trimmed;
              result.cells[{m, g, config.horizons[h]}] = v;
            }
            Vec wt, wc;
            for (std::size_t i = 0; i < n; ++i) {
              if (i < nt) wt.push_back(tw.kept[i] ? tw.weights[i] : 0.0);
              else wc.push_back(tw.kept[i] ? tw.weights[i] : 0.0);
            }
            record_balance(&wt, &wc, nullptr);
            break;
          }
        }
      } catch (const Error&) {
        for (std::size_t h = 0; h < config.horizons.size(); ++h)
          result.cells[{m, g, config.horizons[h]}] = CellValue{};
      }
    }
  }
  return result;
}

StudyResult run_study(const StudyData& data, const StudyConfig& config) {
  if (config.n_sims < 1) throw Error("run_study: n_sims must be >= 1");
  StudyResult out;
  std::map<BalanceKey, std::vector<std::pair<double, double>>> balance_sum;
  std::map<BalanceKey, std::size_t> balance_n;
  std::map<cohort::Group, Vec> sizes;

  for (int s = 0; s < config.n_sims; ++s) {
    const SimulationResult sim = run_simulation(data, config, s);
    for (const auto& [key, val] : sim.cells) {
      auto& agg = out.cells[key];
      if (val.missing) {
        ++agg.n_missing;
        agg.missing_sims.push_back(s);
        continue;
      }
      agg.sims.push_back(val.ate);
      agg.sim_indices.push_back(s);
      agg.mean_n_treated += static_cast<double>(val.n_treated);
      agg.mean_n_control += static_cast<double>(val.n_control);
      agg.mean_n_trimmed += static_cast<double>(val.n_trimmed);
    }
    for (const auto& [key, rows] : sim.balance) {
      auto& acc = balance_sum[key];
      if (acc.empty()) acc.assign(rows.size(), {0, 0});
      for (std::size_t d = 0; d < rows.size(); ++d) {
        acc[d].first += rows[d].first;
        acc[d].second += rows[d].second;
      }
      ++balance_n[key];
    }
    for (auto g : {cohort::Group::Treatment, cohort::Group::C1, cohort::Group::C2,
                   cohort::Group::C3, cohort::Group::C4}) {
      auto it = sim.group_sizes.find(g);
      sizes[g].push_back(it == sim.group_sizes.end() ? 0.0 : static_cast<double>(it->second));
    }
  }

  for (auto& [key, agg] : out.cells) {
    const double n = static_cast<double>(agg.sims.size());
    if (n > 0) {
      agg.mean_n_treated /= n;
      agg.mean_n_control /= n;
      agg.mean_n_trimmed /= n;
    }
    if (agg.sims.empty()) agg.flag = "empty";
    else if (agg.mean_n_treated < static_cast<double>(config.min_group) ||
             agg.mean_n_control < static_cast<double>(config.min_group))
      agg.flag = "small_n";
  }
  for (const auto& [key, acc] : balance_sum) {
    auto& rows = out.balance[key];
    rows.assign(acc.size(), {0, 0});
    const double n = static_cast<double>(balance_n[key]);
    for (std::size_t d = 0; d < acc.size(); ++d)
      rows[d] = {acc[d].first / n, acc[d].second / n};
  }
  for (const auto& [g, v] : sizes) {
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out.mean_group_size[g] = mean;
    out.sd_group_size[g] =
        v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return out;
}

std::vector<SensitivityCell> sensitivity_grid(const StudyData& with_retweets,
                                              const StudyData& without_retweets,
                                              StudyConfig config) {
  config.methods = all_matching_methods();
  std::vector<SensitivityCell> out;
  for (bool included : {true, false}) {
    SensitivityCell cell;
    cell.retweets_included = included;
    cell.result = run_study(included ? with_retweets : without_retweets, config);
    out.push_back(std::move(cell));
  }
  return out;
}

}  // namespace causeway::causal
