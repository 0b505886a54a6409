#include "causeway/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "causeway/io.hpp"
#include "causeway/rng.hpp"

namespace causeway::synth {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Policy leniency score for the assignment tilt. The span is deliberately
// compact (+-0.275): at the strongest confounding the pipeline is tested
// with, assignment logits then stay within the 0.05/0.95 trim bounds, so
// positivity holds and the trimmed estimand equals the analytic one.
double leniency(cohort::Policy p) {
  constexpr double kScale = 0.275;
  switch (p) {
    case cohort::Policy::Illegal: return -kScale;
    case cohort::Policy::MedicalLimitedThc: return -kScale / 3.0;
    case cohort::Policy::Medical: return kScale / 3.0;
    case cohort::Policy::Recreational: return kScale;
  }
  return 0;
}

std::string tier_label(cohort::Policy p) {
  switch (p) {
    case cohort::Policy::Illegal: return "C1";
    case cohort::Policy::MedicalLimitedThc: return "C2";
    case cohort::Policy::Medical: return "C3";
    case cohort::Policy::Recreational: return "C4";
  }
  return "?";
}

struct TierView {
  std::string label;
  double share;
  double z;
  double offset;
  std::vector<std::string> states;
  cohort::Policy policy;
};

std::vector<TierView> tier_views(const GeneratorSpec& spec) {
  std::vector<TierView> v;
  v.push_back({"T", spec.treatment_share, leniency(cohort::Policy::Recreational), spec.tau, {spec.treatment_state},
               cohort::Policy::Recreational});
  for (const auto& t : spec.tiers)
    v.push_back({tier_label(t.policy), t.share, leniency(t.policy), t.outcome_offset, t.states,
                 t.policy});
  return v;
}

void validate(const GeneratorSpec& spec) {
  auto fail = [](const std::string& why) { throw Error("synth: infeasible spec: " + why); };
  if (spec.n_users < 1) fail("n_users must be >= 1");
  if (spec.embedding_dim < 3) fail("embedding_dim must be >= 3");
  if (!(spec.tau >= -1.0 && spec.tau <= 1.0)) fail("tau must lie in [-1, 1]");
  if (!(spec.gamma >= 0)) fail("gamma must be >= 0");
  if (!(spec.stance_noise >= 0 && spec.stance_noise <= 0.9)) fail("stance_noise out of [0, 0.9]");
  if (!std::isfinite(spec.base_logit) || !std::isfinite(spec.month_step)) fail("non-finite logit");
  if (spec.juul_tweets_lo < 1 || spec.juul_tweets_hi < spec.juul_tweets_lo)
    fail("bad tweets-per-user range");
  if (spec.tiers.empty()) fail("at least one control tier required");
  if (!(spec.treatment_share > 0)) fail("treatment_share must be positive");
  if (spec.legalization <= spec.study_start || spec.study_end <= spec.legalization)
    fail("dates must satisfy study_start < legalization < study_end");
  std::vector<bool> seen(4, false);
  for (const auto& t : spec.tiers) {
    if (!(t.share > 0)) fail("tier share must be positive");
    if (!(t.outcome_offset >= -1.0 && t.outcome_offset <= 1.0))
      fail("tier outcome offset out of [-1, 1]");
    if (t.states.empty()) fail("tier has no states");
    if (seen[static_cast<std::size_t>(t.policy)]) fail("duplicate tier policy");
    seen[static_cast<std::size_t>(t.policy)] = true;
    for (const auto& s : t.states)
      if (s == spec.treatment_state) fail("treatment state listed in a control tier");
  }
  if (spec.n_annotations < 60) fail("n_annotations must be >= 60");
}

// Simpson quadrature of fn(u) * phi(u) over [-10, 10].
template <typename Fn>
double gauss_integral(Fn&& fn) {
  const int n = 2000;  // even
  const double a = -10.0, b = 10.0;
  const double h = (b - a) / n;
  auto f = [&](double u) {
    const double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * 3.141592653589793);
    return fn(u) * phi;
  };
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + h * i) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Acklam's inverse normal CDF (|error| < 1.2e-9), for stratified draws.
double inverse_normal_cdf(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p <= phigh) {
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }
  q = std::sqrt(-2 * std::log(1 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
}

double radical_inverse(std::size_t i, std::size_t base) {
  double x = 0, w = 1.0 / static_cast<double>(base);
  for (++i; i > 0; i /= base, w /= static_cast<double>(base)) x += static_cast<double>(i % base) * w;
  return x;
}

}  // namespace

std::vector<TierSpec> default_tiers() {
  return {
      {cohort::Policy::Illegal, 0.2, 0.0, {"ID", "KS", "NE", "SD"}},
      {cohort::Policy::MedicalLimitedThc, 0.2, 0.0, {"TX", "GA", "NC", "WI"}},
      {cohort::Policy::Medical, 0.2, 0.0, {"NY", "FL", "OH", "PA"}},
      {cohort::Policy::Recreational, 0.2, 0.0, {"CO", "WA", "OR", "AK"}},
  };
}

GeneratorSpec policy_gradient_fixture(GeneratorSpec base) {
  if (base.tiers.empty()) base.tiers = default_tiers();
  for (auto& t : base.tiers) {
    switch (t.policy) {
      case cohort::Policy::Illegal: t.outcome_offset = 0.0; break;
      case cohort::Policy::MedicalLimitedThc: t.outcome_offset = 0.35 * base.tau; break;
      case cohort::Policy::Medical: t.outcome_offset = 0.65 * base.tau; break;
      case cohort::Policy::Recreational: t.outcome_offset = base.tau; break;
    }
  }
  return base;
}

double quadrature_ate(const GeneratorSpec& spec, const TierSpec& tier, int horizon_months) {
  if (spec.everyone_posts_outcome) return 0.0;
  const auto views = tier_views(spec);
  const TierView* g = nullptr;
  for (const auto& v : views)
    if (v.label != "T" && v.policy == tier.policy) g = &v;
  if (!g) throw Error("quadrature_ate: tier not found");
  const double L0 = spec.base_logit + spec.month_step * (horizon_months - 1);

  auto pi = [&](double u, const TierView& t) {
    double z_norm = 0;
    for (const auto& v : views) z_norm += v.share * std::exp(spec.gamma * u * v.z);
    return t.share * std::exp(spec.gamma * u * t.z) / z_norm;
  };
  const TierView& T = views[0];
  const double num = gauss_integral([&](double u) {
    return (pi(u, T) + pi(u, *g)) *
           (sigmoid(L0 + spec.gamma * u + spec.tau) - sigmoid(L0 + spec.gamma * u + g->offset));
  });
  const double den = gauss_integral([&](double u) { return pi(u, T) + pi(u, *g); });
  return num / den;
}

namespace {

double quadrature_naive(const GeneratorSpec& spec, const std::vector<TierView>& views,
                        const TierView& g, int horizon_months) {
  if (spec.everyone_posts_outcome) return 0.0;
  const double L0 = spec.base_logit + spec.month_step * (horizon_months - 1);
  auto pi = [&](double u, const TierView& t) {
    double z_norm = 0;
    for (const auto& v : views) z_norm += v.share * std::exp(spec.gamma * u * v.z);
    return t.share * std::exp(spec.gamma * u * t.z) / z_norm;
  };
  const TierView& T = views[0];
  auto tilted_mean = [&](const TierView& t, double offset) {
    const double num = gauss_integral(
        [&](double u) { return pi(u, t) * sigmoid(L0 + spec.gamma * u + offset); });
    const double den = gauss_integral([&](double u) { return pi(u, t); });
    return num / den;
  };
  return tilted_mean(T, spec.tau) - tilted_mean(g, g.offset);
}

struct JsonlTweet {
  std::string id, user_id, text, location, dataset;
  Date date;
  bool retweet = false;
};

std::string jsonl_line(const JsonlTweet& t) {
  nlohmann::json j = {{"id", t.id},
                      {"user_id", t.user_id},
                      {"created_at", t.date.to_string()},
                      {"text", t.text},
                      {"lang", "en"},
                      {"user_location", t.location},
                      {"is_retweet", t.retweet},
                      {"dataset", t.dataset}};
  return j.dump();
}

}  // namespace

GeneratedCorpus generate(const GeneratorSpec& spec_in, const std::filesystem::path& out_dir) {
  GeneratorSpec spec = spec_in;
  if (spec.tiers.empty()) spec.tiers = default_tiers();
  validate(spec);
  std::filesystem::create_directories(out_dir);
  const auto views = tier_views(spec);
  const std::size_t d = static_cast<std::size_t>(spec.embedding_dim);
  Rng rng(Rng::derive(spec.seed, "synth-corpus"));

  // Stance cluster directions plus a promo direction (unit vectors).
  auto random_unit = [&] {
    std::vector<double> v(d);
    double n2 = 0;
    for (auto& x : v) {
      x = rng.next_normal();
      n2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& x : v) x *= inv;
    return v;
  };
  const std::vector<std::vector<double>> stance_dir = {random_unit(), random_unit(), random_unit()};
  const std::vector<double> promo_dir = random_unit();

  // Pure class cluster centers (order: 0 favor, 1 against, 2 neither).
  auto stance_position = [&](int label) {
    std::vector<double> v(d);
    for (std::size_t j = 0; j < d; ++j)
      v[j] = spec.stance_sep * stance_dir[static_cast<std::size_t>(label)][j];
    return v;
  };
  // Favor-side tweets sit at t*favor + (1-t)*against, t = 1 - stance_noise*r
  // with r in [0,1]; the trained classifier then emits genuinely graded
  // probabilities along the segment and per-simulation draws carry real
  // variance. r is identically distributed in every tier, so this
  // measurement noise cancels between arms.
  auto favor_position = [&](double t) {
    std::vector<double> v(d);
    for (std::size_t j = 0; j < d; ++j)
      v[j] = spec.stance_sep *
             (t * stance_dir[0][j] + (1.0 - t) * stance_dir[1][j]);
    return v;
  };

  std::ostringstream tweets, embeddings;
  std::vector<std::string> lines;  // tweet JSONL lines in creation order

  auto add_token = [&](const std::string& token, const std::vector<double>& vec) {
    embeddings << token;
    for (double v : vec) embeddings << ' ' << format_double(v);
    embeddings << '\n';
  };

  const char* personal_templates[3] = {
      "i love my %s %s",
      "i really love this awesome great %s %s",
      "just got my %s %s today",
  };

  GeneratedCorpus out;
  out.dir = out_dir;
  std::ostringstream true_prop;
  true_prop << "user_id,group";
  for (std::size_t t = 1; t < views.size(); ++t) true_prop << ",e_" << views[t].label;
  true_prop << '\n';

  const std::int64_t juul_span = spec.legalization.days() - spec.study_start.days();

  // Low-discrepancy driver variables: the latent interest U is a shuffled
  // stratified normal, tier assignment follows a golden-ratio Kronecker
  // sequence and uptake a digit-shifted van der Corput sequence, both paired
  // against the U rank. The corpus then tracks the generative law at O(1/n)
  // instead of O(1/sqrt(n)), so estimator checks against the analytic ground
  // truth are not drowned in corpus sampling noise.
  std::vector<std::size_t> u_rank(spec.n_users);
  std::iota(u_rank.begin(), u_rank.end(), std::size_t{0});
  for (std::size_t i = spec.n_users - 1; i > 0; --i)
    std::swap(u_rank[i], u_rank[rng.next_below(i + 1)]);
  const double tier_shift = rng.next_unit();
  const double uptake_shift = rng.next_unit();
  const double outcome_stance_shift = rng.next_unit();

  // Tier assignment depends only on the rank, so a dry pass can fix every
  // user's tier up front; the outcome stance coordinate is then equispaced
  // within each tier, which pins the per-arm stance-noise mean exactly.
  std::vector<std::size_t> tier_of(spec.n_users);
  std::vector<std::size_t> tier_count(views.size(), 0);
  for (std::size_t i = 0; i < spec.n_users; ++i) {
    const std::size_t rank = u_rank[i];
    const double uu = inverse_normal_cdf((static_cast<double>(rank) + 0.5) /
                                         static_cast<double>(spec.n_users));
    double z_norm = 0;
    std::vector<double> w(views.size());
    for (std::size_t t = 0; t < views.size(); ++t) {
      w[t] = views[t].share * std::exp(spec.gamma * uu * views[t].z);
      z_norm += w[t];
    }
    double pick = radical_inverse(rank, 3) + tier_shift;
    pick = (pick - std::floor(pick)) * z_norm;
    std::size_t tier = 0;
    double acc = 0;
    for (std::size_t t = 0; t < views.size(); ++t) {
      acc += w[t];
      if (pick < acc) {
        tier = t;
        break;
      }
    }
    tier_of[i] = tier;
    ++tier_count[tier];
  }
  std::vector<std::size_t> tier_seen(views.size(), 0);

  for (std::size_t i = 0; i < spec.n_users; ++i) {
    const std::size_t rank = u_rank[i];
    const double u = inverse_normal_cdf((static_cast<double>(rank) + 0.5) /
                                        static_cast<double>(spec.n_users));
    // Softmax weights over share * exp(gamma * u * leniency); the tier
    // itself was fixed in the dry pass.
    std::vector<double> w(views.size());
    for (std::size_t t = 0; t < views.size(); ++t)
      w[t] = views[t].share * std::exp(spec.gamma * u * views[t].z);
    const std::size_t tier = tier_of[i];
    const TierView& tv = views[tier];
    const std::string state = tv.states[rng.next_below(tv.states.size())];
    const std::string uid = "u" + std::to_string(i);
    ++out.users_per_group[tv.label];

    true_prop << uid << ',' << tv.label;
    for (std::size_t t = 1; t < views.size(); ++t) {
      const double e = w[0] / (w[0] + w[t]);
      true_prop << ',' << format_double(e);
    }
    true_prop << '\n';

    // Per-user base position: confounder loading on every dimension.
    std::vector<double> base(d);
    for (std::size_t j = 0; j < d; ++j)
      base[j] = spec.x_scale * u + spec.x_noise_sd * rng.next_normal();

    auto emit_tweet = [&](const std::string& tid, const char* tmpl, const char* keyword,
                          double t_favor, Date date, const std::string& dataset, bool retweet,
                          bool jitter) {
      const std::string token = tid;
      char text[256];
      std::snprintf(text, sizeof text, tmpl, keyword, token.c_str());
      std::vector<double> vec = base;
      const auto spos = favor_position(t_favor);
      // Outcome tweets carry no per-tweet jitter: their randomness lives in
      // the rank-paired t coordinate, which stays balanced across arms.
      for (std::size_t j = 0; j < d; ++j)
        vec[j] += spos[j] + (jitter ? spec.tweet_noise_sd * rng.next_normal() : 0.0);
      add_token(token, vec);
      lines.push_back(jsonl_line({token, uid, text, state, dataset, date, retweet}));
      ++out.n_tweets;
    };

    // JUUL history, all pre-legalization, favor-leaning stance positions.
    const int n_juul = spec.juul_tweets_lo +
                       static_cast<int>(rng.next_below(
                           static_cast<std::uint64_t>(spec.juul_tweets_hi - spec.juul_tweets_lo + 1)));
    for (int k = 0; k < n_juul; ++k) {
      const Date date = spec.study_start.add_days(
          static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(juul_span))));
      const bool rt = rng.next_unit() < spec.retweet_share;
      emit_tweet(uid + "t" + std::to_string(k), personal_templates[k % 3], "juul", 1.0, date,
                 "JUUL", rt, true);
    }
    // Occasional URL promo tweet (non-personal training signal).
    if (rng.next_unit() < spec.promo_share) {
      const Date date = spec.study_start.add_days(
          static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(juul_span))));
      const std::string token = uid + "promo";
      std::vector<double> vec = base;
      for (std::size_t j = 0; j < d; ++j)
        vec[j] += 2.0 * spec.stance_sep * promo_dir[j] + spec.tweet_noise_sd * rng.next_normal();
      add_token(token, vec);
      char text[256];
      std::snprintf(text, sizeof text, "great juul deals %s https://promo.example/x", token.c_str());
      lines.push_back(jsonl_line({token, uid, text, state, "JUUL", date, false}));
      ++out.n_tweets;
    }

    // Uptake month via CDF inversion: P(M <= N) = sigmoid(base + step(N-1) + gamma u + offset).
    int uptake_month = 0;
    if (spec.everyone_posts_outcome) {
      uptake_month = 1;
    } else {
      double v = radical_inverse(rank, 2) + uptake_shift;
      v -= std::floor(v);
      for (int n = 1; n <= 6; ++n) {
        const double p = sigmoid(spec.base_logit + spec.month_step * (n - 1) + spec.gamma * u +
                                 views[tier].offset);
        if (v < p) {
          uptake_month = n;
          break;
        }
      }
    }
    if (uptake_month > 0) {
      const Date date = spec.legalization.add_months(uptake_month - 1).add_days(14);
      const bool rt = rng.next_unit() < spec.retweet_share;
      // The stance interpolation coordinate is equispaced within the tier,
      // so every arm sees the same stance-noise profile exactly.
      double r = (static_cast<double>(tier_seen[tier]) + 0.5) /
                     static_cast<double>(tier_count[tier]) +
                 outcome_stance_shift;
      r -= std::floor(r);
      emit_tweet(uid + "c0", personal_templates[static_cast<int>(i) % 3], "weed",
                 1.0 - spec.stance_noise * r, date, "CANNABIS", rt, false);
    }
    ++tier_seen[tier];
  }

  for (const auto& l : lines) tweets << l << '\n';

  // Stance annotation files: class-blocked counts with floors so every class
  // survives the train/eval and calibration splits.
  auto write_annotations = [&](const std::string& name, const char* prefix, double p_against,
                               double p_neither) {
    std::ostringstream csv;
    csv << "tweet_id,text,label,split\n";
    const std::size_t n = spec.n_annotations;
    const std::size_t floor_count = std::max<std::size_t>(n / 12, 12);
    std::size_t n_against = std::max<std::size_t>(
        static_cast<std::size_t>(std::lround(p_against * static_cast<double>(n))), floor_count);
    std::size_t n_neither = std::max<std::size_t>(
        static_cast<std::size_t>(std::lround(p_neither * static_cast<double>(n))), floor_count);
    const std::size_t n_favor = n - n_against - n_neither;
    const char* label_names[3] = {"favor", "against", "neither"};
    std::size_t counts[3] = {n_favor, n_against, n_neither};
    std::size_t row = 0;
    for (int label = 0; label < 3; ++label) {
      for (std::size_t k = 0; k < counts[label]; ++k, ++row) {
        const std::string token = std::string(prefix) + std::to_string(row);
        const double ua = rng.next_normal();
        std::vector<double> vec(d);
        const auto spos = stance_position(label);
        for (std::size_t j = 0; j < d; ++j)
          vec[j] = spec.x_scale * ua + spec.x_noise_sd * rng.next_normal() + spos[j] +
                   spec.tweet_noise_sd * rng.next_normal();
        add_token(token, vec);
        csv << token << ',' << token << ',' << label_names[label] << ','
            << (k % 5 == 4 ? "eval" : "train") << '\n';
      }
    }
    write_file(out_dir / name, csv.str());
  };
  write_annotations("stance_juul.csv", "aj", 0.07, 0.17);
  write_annotations("stance_cannabis.csv", "ac", 0.08, 0.38);

  // Policy table and gazetteer for exactly the states in play.
  {
    std::ostringstream policy;
    policy << "state,effective_date,policy\n";
    const Date baseline = Date::from_ymd(2014, 1, 1);
    policy << spec.treatment_state << ',' << baseline.to_string() << ",Medical\n";
    policy << spec.treatment_state << ',' << spec.legalization.to_string() << ",Recreational\n";
    for (const auto& t : spec.tiers)
      for (const auto& s : t.states)
        policy << s << ',' << baseline.to_string() << ',' << cohort::policy_name(t.policy) << '\n';
    write_file(out_dir / "policy.csv", policy.str());

    std::ostringstream gaz;
    gaz << "pattern,state_code,kind\n";
    gaz << spec.treatment_state << ',' << spec.treatment_state << ",abbrev\n";
    for (const auto& t : spec.tiers)
      for (const auto& s : t.states) gaz << s << ',' << s << ",abbrev\n";
    write_file(out_dir / "gazetteer.csv", gaz.str());
  }

  write_file(out_dir / "lexicon.csv",
             "token,strength\n"
             "love,strong\nawesome,strong\ngreat,strong\nterrible,strong\nhate,strong\n"
             "really,weak\ngood,weak\nbad,weak\nnice,weak\ncool,weak\n");
  write_file(out_dir / "blocklist.txt", "");
  write_file(out_dir / "tweets.jsonl", tweets.str());
  write_file(out_dir / "embeddings.txt", embeddings.str());
  write_file(out_dir / "true_propensity.csv", true_prop.str());

  // Ground truth by quadrature.
  out.truth.tau = spec.tau;
  out.truth.gamma = spec.gamma;
  for (const auto& t : spec.tiers) {
    std::array<double, 6> ate{}, naive{};
    for (int n = 1; n <= 6; ++n) {
      ate[static_cast<std::size_t>(n - 1)] = quadrature_ate(spec, t, n);
      const TierView* g = nullptr;
      for (const auto& v : views)
        if (v.label != "T" && v.policy == t.policy) g = &v;
      naive[static_cast<std::size_t>(n - 1)] = quadrature_naive(spec, views, *g, n);
    }
    out.truth.ate[tier_label(t.policy)] = ate;
    out.truth.naive[tier_label(t.policy)] = naive;
  }
  {
    nlohmann::json j;
    j["tau"] = spec.tau;
    j["gamma"] = spec.gamma;
    j["seed"] = spec.seed;
    j["n_users"] = spec.n_users;
    j["everyone_posts_outcome"] = spec.everyone_posts_outcome;
    for (const auto& [label, a] : out.truth.ate) j["ate"][label] = a;
    for (const auto& [label, a] : out.truth.naive) j["naive"][label] = a;
    write_file(out_dir / "ground_truth.json", j.dump(2) + "\n");
  }

  // A ready-to-run pipeline config pointing at this corpus.
  {
    const auto p = [&](const char* name) { return (out_dir / name).string(); };
    std::ostringstream ini;
    ini << "[paths]\n"
        << "corpus = " << p("tweets.jsonl") << "\n"
        << "embeddings = " << p("embeddings.txt") << "\n"
        << "policy_table = " << p("policy.csv") << "\n"
        << "gazetteer = " << p("gazetteer.csv") << "\n"
        << "lexicon = " << p("lexicon.csv") << "\n"
        << "blocklist = " << p("blocklist.txt") << "\n"
        << "stance_train_juul = " << p("stance_juul.csv") << "\n"
        << "stance_train_cannabis = " << p("stance_cannabis.csv") << "\n\n"
        << "[ingest]\n"
        << "language = en\n"
        << "juul_keywords = juul\n"
        << "cannabis_keywords = weed\n"
        << "juul_from = " << spec.study_start.to_string() << "\n"
        << "juul_to = " << spec.study_end.to_string() << "\n"
        << "cannabis_from = " << spec.study_start.to_string() << "\n"
        << "cannabis_to = " << spec.study_end.to_string() << "\n"
        << "embedding_dim = " << spec.embedding_dim << "\n\n"
        << "[estimate]\n"
        << "treatment_state = " << spec.treatment_state << "\n"
        << "legalization_date = " << spec.legalization.to_string() << "\n"
        << "study_end = " << spec.study_end.to_string() << "\n"
        << "master_seed = " << spec.seed << "\n";
    write_file(out_dir / "run_config.ini", ini.str());
  }
  return out;
}

}  // namespace causeway::synth
