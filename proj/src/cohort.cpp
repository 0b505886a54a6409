#include "causeway/cohort.hpp"

#include <algorithm>

#include "causeway/io.hpp"

namespace causeway::cohort {

std::string policy_name(Policy p) {
  switch (p) {
    case Policy::Illegal: return "Illegal";
    case Policy::MedicalLimitedThc: return "MedicalLimitedTHC";
    case Policy::Medical: return "Medical";
    case Policy::Recreational: return "Recreational";
  }
  return "?";
}

std::optional<Policy> policy_from(std::string_view name) {
  if (name == "Illegal") return Policy::Illegal;
  if (name == "MedicalLimitedTHC") return Policy::MedicalLimitedThc;
  if (name == "Medical") return Policy::Medical;
  if (name == "Recreational") return Policy::Recreational;
  return std::nullopt;
}

std::string group_name(Group g) {
  switch (g) {
    case Group::Treatment: return "T";
    case Group::C1: return "C1";
    case Group::C2: return "C2";
    case Group::C3: return "C3";
    case Group::C4: return "C4";
  }
  return "?";
}

PolicyTable PolicyTable::load_csv(const std::filesystem::path& path) {
  PolicyTable t;
  CsvTable csv = read_csv(path);
  const int c_state = csv.require_column("state", "policy table");
  const int c_date = csv.require_column("effective_date", "policy table");
  const int c_policy = csv.require_column("policy", "policy table");
  for (const auto& row : csv.rows) {
    const auto date = Date::parse(row[static_cast<std::size_t>(c_date)]);
    if (!date) throw Error("policy table: bad date '" + row[static_cast<std::size_t>(c_date)] + "'");
    const auto pol = policy_from(row[static_cast<std::size_t>(c_policy)]);
    if (!pol)
      throw Error("policy table: unknown policy '" + row[static_cast<std::size_t>(c_policy)] + "'");
    t.add(row[static_cast<std::size_t>(c_state)], *date, *pol);
  }
  return t;
}

void PolicyTable::add(const std::string& state, Date effective, Policy policy) {
  auto& tl = timelines_[state];
  for (const auto& [d, p] : tl)
    if (d == effective) throw Error("policy table: duplicate date for " + state);
  tl.emplace_back(effective, policy);
  std::sort(tl.begin(), tl.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

bool PolicyTable::has_state(const std::string& state) const { return timelines_.count(state) > 0; }

Policy PolicyTable::policy_at(const std::string& state, Date date) const {
  auto it = timelines_.find(state);
  if (it == timelines_.end()) throw Error("policy table: unknown state '" + state + "'");
  const auto& tl = it->second;
  if (tl.empty() || date < tl.front().first)
    throw Error("policy table: timeline incomplete for " + state + " at " + date.to_string());
  Policy out = tl.front().second;
  for (const auto& [d, p] : tl) {
    if (d <= date) out = p;
    else break;
  }
  return out;
}

Policy policy_at(const PolicyTable& table, const std::string& state, Date date) {
  return table.policy_at(state, date);
}

bool eligible(const UserDraw& user, Date legalization_date) {
  if (!user.pro_juul) return false;
  if (user.first_cannabis && *user.first_cannabis < legalization_date) return false;
  return true;
}

std::vector<const UserDraw*> select_population(const std::vector<UserDraw>& users,
                                               Date legalization_date) {
  std::vector<const UserDraw*> out;
  for (const auto& u : users)
    if (eligible(u, legalization_date)) out.push_back(&u);
  return out;
}

Group classify_group(const std::string& state, const std::string& treatment_state,
                     Date legalization_date, const PolicyTable& table) {
  if (state == treatment_state) return Group::Treatment;
  switch (table.policy_at(state, legalization_date)) {
    case Policy::Illegal: return Group::C1;
    case Policy::MedicalLimitedThc: return Group::C2;
    case Policy::Medical: return Group::C3;
    case Policy::Recreational: return Group::C4;
  }
  return Group::C1;
}

int outcome(const std::optional<Date>& first_pro_date, Date legalization_date, int months) {
  if (months < 1 || months > 6) throw Error("outcome: horizon must be in [1,6]");
  if (!first_pro_date) return 0;
  return *first_pro_date < legalization_date.add_months(months) ? 1 : 0;
}

std::vector<CausalUnit> assign_groups(const std::vector<const UserDraw*>& eligible_users,
                                      const std::string& treatment_state, Date legalization_date,
                                      const PolicyTable& table) {
  std::vector<CausalUnit> units;
  units.reserve(eligible_users.size());
  for (const UserDraw* u : eligible_users) {
    CausalUnit c;
    c.user_id = u->user_id;
    c.group = classify_group(u->state, treatment_state, legalization_date, table);
    c.treated = c.group == Group::Treatment ? 1 : 0;
    c.covariates = u->covariates;
    for (int n = 1; n <= 6; ++n)
      c.outcomes[static_cast<std::size_t>(n - 1)] =
          static_cast<std::uint8_t>(outcome(u->first_pro_cannabis, legalization_date, n));
    units.push_back(std::move(c));
  }
  return units;
}

}  // namespace causeway::cohort
