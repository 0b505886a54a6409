#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "causeway/causal.hpp"
#include "causeway/cohort.hpp"
#include "causeway/corpus.hpp"
#include "causeway/date.hpp"

namespace causeway::causal {

enum class Method { Naive = 0, Nnm = 1, PsmLr = 2, PsmGbm = 3, IptwLr = 4, IptwGbm = 5 };
std::string method_name(Method m);
std::optional<Method> method_from(std::string_view name);
/// The sensitivity grid's five estimators (naive excluded).
std::vector<Method> all_matching_methods();

/// One personal tweet prepared for per-simulation stance draws.
struct StudyTweet {
  std::uint64_t id_hash = 0;  // keys the draw stream, order independent
  Date date;
  std::array<double, 3> p_s{0, 0, 0};
};

struct StudyUser {
  std::string id;
  std::string state;
  std::vector<StudyTweet> juul;      // personal JUUL tweets (toggle applied)
  std::vector<StudyTweet> cannabis;  // personal cannabis tweets (toggle applied)
  std::optional<Date> first_cannabis_any;  // over all ingested tweets
  std::vector<double> covariates;          // pre-treatment mean embedding
  bool has_covariates = false;
};

struct StudyData {
  std::vector<StudyUser> users;
  cohort::PolicyTable policy;
};

struct StudyConfig {
  std::string treatment_state = "CA";
  Date legalization_date;
  Date study_end;
  std::vector<int> horizons = {1, 2, 3, 4, 5, 6};
  std::vector<Method> methods = {Method::IptwLr};
  double trim_lo = 0.05;
  double trim_hi = 0.95;
  double propensity_C = 1.0;
  classify::GbmOptions propensity_gbm;
  std::size_t min_group = 20;  // below this a cell is flagged small_n
  std::uint64_t master_seed = 0;
  int n_sims = 200;
};

/// Builds per-user simulation inputs from classified tweets. Tweets must
/// carry stance probabilities; only personal tweets of retained users enter.
/// Retweets are dropped from stances/covariates when include_retweets is
/// false, but first_cannabis_any always reflects every ingested tweet.
StudyData build_study_data(const std::vector<corpus::Tweet>& tweets,
                           const std::vector<corpus::UserRecord>& users,
                           cohort::PolicyTable policy, const StudyConfig& config,
                           bool include_retweets);

struct CellKey {
  Method method;
  cohort::Group group;
  int horizon;
  bool operator<(const CellKey& o) const {
    return std::tie(method, group, horizon) < std::tie(o.method, o.group, o.horizon);
  }
};

struct CellValue {
  bool missing = true;
  double ate = 0;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  std::size_t n_trimmed = 0;
};

using BalanceKey = std::pair<Method, cohort::Group>;

struct SimulationResult {
  int sim_index = 0;
  std::map<CellKey, CellValue> cells;
  /// per (method, group), per covariate dimension: (asmd before, after)
  std::map<BalanceKey, std::vector<std::pair<double, double>>> balance;
  std::map<cohort::Group, std::size_t> group_sizes;
  std::size_t n_eligible = 0;
};

/// One full pass: stance draws -> verdicts -> population -> groups ->
/// propensity fits per control group -> estimates at every horizon.
/// Estimation failures (an empty group, all units trimmed) leave cells
/// missing and the run continues.
SimulationResult run_simulation(const StudyData& data, const StudyConfig& config, int sim_index);

struct CellAggregate {
  Vec sims;                      // per-sim ATEs of non-missing runs
  std::vector<int> sim_indices;  // parallel to sims
  std::vector<int> missing_sims;
  double mean_n_treated = 0;
  double mean_n_control = 0;
  double mean_n_trimmed = 0;
  std::size_t n_missing = 0;
  std::string flag = "ok";  // ok | small_n | empty
};

struct StudyResult {
  std::map<CellKey, CellAggregate> cells;
  /// per (method, group), per dimension: mean over sims of (before, after)
  std::map<BalanceKey, std::vector<std::pair<double, double>>> balance;
  std::map<cohort::Group, double> mean_group_size;
  std::map<cohort::Group, double> sd_group_size;
};

StudyResult run_study(const StudyData& data, const StudyConfig& config);

struct SensitivityCell {
  bool retweets_included = true;
  StudyResult result;
};

/// 5 matching methods x retweets in/out; per-cell small-population flags
/// come from CellAggregate::flag.
std::vector<SensitivityCell> sensitivity_grid(const StudyData& with_retweets,
                                              const StudyData& without_retweets,
                                              StudyConfig config);

}  // namespace causeway::causal
