#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causeway/date.hpp"

namespace causeway::cohort {

enum class Policy { Illegal = 0, MedicalLimitedThc = 1, Medical = 2, Recreational = 3 };
std::string policy_name(Policy p);
std::optional<Policy> policy_from(std::string_view name);

/// Per-state timeline of (effective_date, policy), dates strictly increasing.
class PolicyTable {
 public:
  static PolicyTable load_csv(const std::filesystem::path& path);
  void add(const std::string& state, Date effective, Policy policy);  // keeps order sorted
  Policy policy_at(const std::string& state, Date date) const;
  bool has_state(const std::string& state) const;
  std::size_t n_states() const { return timelines_.size(); }
  const std::map<std::string, std::vector<std::pair<Date, Policy>>>& timelines() const {
    return timelines_;
  }

 private:
  std::map<std::string, std::vector<std::pair<Date, Policy>>> timelines_;
};

Policy policy_at(const PolicyTable& table, const std::string& state, Date date);

enum class Group { Treatment = 0, C1 = 1, C2 = 2, C3 = 3, C4 = 4 };
std::string group_name(Group g);

/// Per-simulation view of one user, after stance draws.
struct UserDraw {
  std::string user_id;
  std::string state;
  bool pro_juul = false;                   // from pre-cutoff JUUL stances
  std::optional<Date> first_cannabis;      // earliest cannabis mention, any tweet
  std::optional<Date> first_pro_cannabis;  // earliest InFavor cannabis tweet in window
  std::vector<double> covariates;          // pre-treatment mean embedding
  bool has_covariates = false;
};

struct CausalUnit {
  std::string user_id;
  int treated = 0;
  Group group = Group::C1;
  std::vector<double> covariates;
  std::array<std::uint8_t, 6> outcomes{};  // Y(N), N = 1..6
  double propensity = -1;
  double weight = 0;
  bool kept = true;  // false once trimmed
};

/// Eligible iff pro-JUUL before the legalization date and no cannabis
/// mention before it.
bool eligible(const UserDraw& user, Date legalization_date);
std::vector<const UserDraw*> select_population(const std::vector<UserDraw>& users,
                                               Date legalization_date);

/// Group by the user's state policy at the treatment state's legalization
/// date: treatment state -> T; Illegal -> C1, limited-THC medical -> C2,
/// medical -> C3, recreational -> C4.
Group classify_group(const std::string& state, const std::string& treatment_state,
                     Date legalization_date, const PolicyTable& table);

/// Binary outcome: 1 iff the first pro-cannabis date falls strictly before
/// legalization_date + N calendar months (day clamped to month end).
int outcome(const std::optional<Date>& first_pro_date, Date legalization_date, int months);

std::vector<CausalUnit> assign_groups(const std::vector<const UserDraw*>& eligible_users,
                                      const std::string& treatment_state, Date legalization_date,
                                      const PolicyTable& table);

}  // namespace causeway::cohort
