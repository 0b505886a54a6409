#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "causeway/cohort.hpp"
#include "causeway/date.hpp"

namespace causeway::synth {

struct TierSpec {
  cohort::Policy policy = cohort::Policy::Illegal;
  double share = 0.2;           // base population share before confounder tilt
  double outcome_offset = 0.0;  // uptake logit offset from this tier's own policy
  std::vector<std::string> states;
};

/// Corpus generator with a latent per-user interest U ~ N(0,1) that tilts
/// both state assignment (strength gamma) and uptake, a treatment outcome
/// offset tau on the logit scale, and per-tier uptake offsets. The true ATE
/// per contrast comes from 1-D quadrature over U, so every generated corpus
/// carries its own exact oracle.
struct GeneratorSpec {
  std::size_t n_users = 1000;
  int embedding_dim = 25;
  double tau = 0.0;    // treatment-state uptake offset, logit scale, in [-1,1]
  double gamma = 0.0;  // confounding strength, >= 0
  double stance_noise = 0.0;  // off-class blend of stance-bearing embeddings
  double base_logit = -1.6;   // P(uptake within 1 month) logit at U=0, offset 0
  double month_step = 0.35;   // uptake logit increment per horizon month
  int juul_tweets_lo = 2;
  int juul_tweets_hi = 5;
  double promo_share = 0.3;         // extra URL promo tweet probability per user
  double retweet_share = 0.0;       // fraction of personal tweets marked retweets
  bool everyone_posts_outcome = false;  // uptake month forced to 1 for all users
  std::string treatment_state = "CA";
  double treatment_share = 0.2;
  std::vector<TierSpec> tiers;  // empty -> default four-tier layout
  Date study_start = Date::from_ymd(2016, 1, 1);
  Date legalization = Date::from_ymd(2018, 1, 1);
  Date study_end = Date::from_ymd(2018, 12, 31);
  std::uint64_t seed = 1;
  double x_scale = 1.0;         // confounder loading per embedding dimension
  double x_noise_sd = 0.5;      // per-user per-dimension noise
  double tweet_noise_sd = 0.2;  // per-tweet jitter
  double stance_sep = 4.0;      // stance cluster separation
  std::size_t n_annotations = 600;  // per dataset
};

/// Four control tiers (Illegal/limited/medical/recreational) with equal
/// shares and zero uptake offsets.
std::vector<TierSpec> default_tiers();

/// Tiers whose uptake offsets rise with policy leniency, with the
/// previously-recreational tier matching the treatment state's tau.
GeneratorSpec policy_gradient_fixture(GeneratorSpec base);

struct GroundTruth {
  double tau = 0;
  double gamma = 0;
  /// Analytic ATE per contrast per horizon (index 0 = one month).
  std::map<std::string, std::array<double, 6>> ate;
  /// Expected naive difference in means per contrast per horizon.
  std::map<std::string, std::array<double, 6>> naive;
};

struct GeneratedCorpus {
  std::filesystem::path dir;
  GroundTruth truth;
  std::size_t n_tweets = 0;
  std::map<std::string, std::size_t> users_per_group;
};

/// Writes tweets.jsonl, embeddings.txt, policy.csv, gazetteer.csv,
/// lexicon.csv, blocklist.txt, stance_juul.csv, stance_cannabis.csv,
/// true_propensity.csv, ground_truth.json and run_config.ini into out_dir.
/// Same spec + seed produces byte-identical files.
GeneratedCorpus generate(const GeneratorSpec& spec, const std::filesystem::path& out_dir);

/// The quadrature the ground truth is built from, exposed for tests.
double quadrature_ate(const GeneratorSpec& spec, const TierSpec& tier, int horizon_months);

}  // namespace causeway::synth
