#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "causeway/causal.hpp"
#include "causeway/corpus.hpp"
#include "causeway/study.hpp"
#include "causeway/synth.hpp"
#include "causeway/weaklabel.hpp"

namespace causeway::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";

/// Resolved run configuration; one INI file with sections, every default
/// overridable. Paths are resolved against the config file's directory.
struct RunConfig {
  // [paths]
  std::filesystem::path corpus, embeddings, policy_table, gazetteer, lexicon, blocklist;
  std::filesystem::path stance_train_juul, stance_train_cannabis;
  std::filesystem::path external_scores;  // optional; empty -> fallback scorer

  // [ingest]
  std::string language = "en";
  std::vector<std::string> juul_keywords = {"juul", "juulvapor", "juulnation", "doit4juul"};
  std::vector<std::string> cannabis_keywords = {
      "weed",     "ganja",   "marijuana", "cannabis", "mary jane",     "thc",
      "marihuana", "hash",    "reefer",    "hashish",  "bhang",         "cbd",
      "green goddess", "locoweed", "maryjane", "spliff", "hemp",        "wacky baccy",
      "sinsemilla", "doobie", "acapulco gold"};
  Date juul_from = Date::from_ymd(2016, 1, 1);
  Date juul_to = Date::from_ymd(2018, 12, 31);
  Date cannabis_from = Date::from_ymd(2014, 1, 1);
  Date cannabis_to = Date::from_ymd(2018, 12, 31);
  std::string keyword_mode = "token";  // token | substring
  std::vector<std::string> exclude_users;
  bool strict = false;
  bool require_blocklist = true;
  int embedding_dim = 25;

  // [weaklabel]
  double confidence_threshold = 0.8;
  std::size_t sample_k = 20000;
  double threshold_juul = 0.1;
  double threshold_cannabis = 0.5;
  int gbm_rounds = 100;
  int gbm_depth = 3;
  double gbm_learning_rate = 0.1;

  // [stance]
  double stance_C = 1.0;
  double calibration_holdout = 0.2;
  double decay_per_day = 0.0;  // optional recency weighting, 0 = off

  // [estimate]
  std::string treatment_state = "CA";
  Date legalization_date = Date::from_ymd(2018, 1, 1);
  Date study_end = Date::from_ymd(2018, 12, 31);
  std::vector<int> horizons = {1, 2, 3, 4, 5, 6};
  int n_sims = 200;
  std::vector<causal::Method> methods = {causal::Method::IptwLr};
  double trim_lo = 0.05;
  double trim_hi = 0.95;
  double propensity_C = 1.0;
  causal::CiMode ci_mode = causal::CiMode::PaperLiteral;
  bool include_retweets = true;
  std::size_t min_group = 20;
  std::uint64_t master_seed = 0;

  static RunConfig from_ini(const std::filesystem::path& path);
  static RunConfig from_kv(const std::map<std::string, std::string>& kv,
                           const std::filesystem::path& base_dir);
  void validate() const;
  nlohmann::json to_json() const;
  std::string config_hash() const;

  causal::StudyConfig study_config() const;
};

/// Known treatment presets: CA 2018-01-01, MA 2017-07-28, VT 2018-07-01.
std::optional<Date> default_legalization_date(const std::string& state);

std::map<std::string, std::string> parse_ini(const std::filesystem::path& path);

// ---- stage artifacts ----

struct IngestOutput {
  std::vector<corpus::Tweet> tweets;
  std::vector<corpus::UserRecord> users;  // bot accounts already removed
  corpus::IngestStats stats;
  std::size_t bots_removed = 0;
};

struct WeaklabelOutput {
  std::set<std::string> retained_users;
  weaklabel::LabelModel label_model;
  classify::BoostedModel personal_model;
  nlohmann::json stats;
};

struct StanceOutput {
  classify::CalibratedModel model_juul;
  classify::CalibratedModel model_cannabis;
  nlohmann::json eval;
};

IngestOutput run_ingest(const RunConfig& config);
WeaklabelOutput run_weaklabel(const RunConfig& config, std::vector<corpus::Tweet>& tweets);
StanceOutput run_stance(const RunConfig& config, std::vector<corpus::Tweet>& tweets,
                        const corpus::EmbeddingTable& table);
causal::StudyResult run_estimate(const RunConfig& config,
                                 const std::vector<corpus::Tweet>& tweets,
                                 const std::vector<corpus::UserRecord>& users,
                                 const std::set<std::string>& retained);

// ---- file-level commands (CLI surface); each writes artifacts + manifest ----

void cmd_ingest(const RunConfig& config, const std::filesystem::path& out_root);
void cmd_weaklabel(const RunConfig& config, const std::filesystem::path& out_root);
void cmd_stance(const RunConfig& config, const std::filesystem::path& out_root);
void cmd_estimate(const RunConfig& config, const std::filesystem::path& out_root);
void cmd_sensitivity(const RunConfig& config, const std::filesystem::path& out_root);
void cmd_report(const RunConfig& config, const std::filesystem::path& out_root);

/// ingest -> weaklabel -> stance -> estimate -> report in one pass, sharing
/// in-memory state but writing the same artifacts as the staged commands.
causal::StudyResult run_full(const RunConfig& config, const std::filesystem::path& out_root);

/// Sensitivity grid end to end (5 methods x retweet toggle).
void run_full_sensitivity(const RunConfig& config, const std::filesystem::path& out_root);

// ---- report emission (also used by tests) ----

std::string ate_report_csv(const causal::StudyResult& result, causal::CiMode mode);
std::string plot_data_csv(const causal::StudyResult& result, causal::CiMode mode);
std::string balance_report_csv(const causal::StudyResult& result);
std::string sims_csv(const causal::StudyResult& result);

// ---- manifests ----

void write_manifest(const std::filesystem::path& stage_dir, const std::string& stage,
                    const RunConfig& config,
                    const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs);

/// Throws when the upstream stage is missing or was produced under a
/// different configuration, naming the stage to re-run.
void check_upstream(const std::filesystem::path& stage_dir, const std::string& stage,
                    const RunConfig& config);

// ---- enriched tweet/user JSONL used between stages ----

nlohmann::json tweet_to_json(const corpus::Tweet& t);
corpus::Tweet tweet_from_json(const nlohmann::json& j);
void write_tweets(const std::filesystem::path& path, const std::vector<corpus::Tweet>& tweets);
std::vector<corpus::Tweet> read_tweets(const std::filesystem::path& path);
void write_users(const std::filesystem::path& path, const std::vector<corpus::UserRecord>& users);
std::vector<corpus::UserRecord> read_users(const std::filesystem::path& path);

}  // namespace causeway::pipeline
