#include "causeway/stance.hpp"

#include <algorithm>
#include <cmath>

#include "causeway/io.hpp"

namespace causeway::stance {

std::array<double, 3> predict_stance(const classify::CalibratedModel& model,
                                     const std::vector<double>& embedding) {
  if (model.n_classes != 3) throw Error("predict_stance: model must have three classes");
  const auto p = model.predict_proba(embedding);
  return {p[0], p[1], p[2]};
}

StanceLabel sample_stance(const std::array<double, 3>& p_s, double u) {
  if (u < p_s[kInFavor]) return StanceLabel::InFavor;
  if (u < p_s[kInFavor] + p_s[kAgainst]) return StanceLabel::Against;
  return StanceLabel::Neither;
}

UserStance user_polarity(const std::vector<StanceLabel>& stances) {
  UserStance us;
  for (auto s : stances) us.polarity_sum += polarity(s);
  us.verdict = us.polarity_sum > 0 ? 1 : (us.polarity_sum < 0 ? -1 : 0);
  us.empty_flag = stances.empty();
  return us;
}

UserStance user_polarity_decayed(const std::vector<DatedStance>& stances, double decay_per_day) {
  UserStance us;
  us.empty_flag = stances.empty();
  if (stances.empty()) return us;
  Date newest = stances[0].date;
  for (const auto& s : stances) newest = std::max(newest, s.date);
  double sum = 0;
  for (const auto& s : stances) {
    const double age = static_cast<double>(newest.days() - s.date.days());
    sum += polarity(s.label) * std::exp(-decay_per_day * age);
  }
  us.polarity_sum = static_cast<long long>(sum > 0 ? std::ceil(sum - 1e-12) : std::floor(sum + 1e-12));
  us.verdict = sum > 1e-12 ? 1 : (sum < -1e-12 ? -1 : 0);
  return us;
}

bool pro_juul(const std::vector<DatedStance>& juul_stances, Date cutoff) {
  std::vector<StanceLabel> in_period;
  for (const auto& s : juul_stances)
    if (s.date < cutoff) in_period.push_back(s.label);
  return user_polarity(in_period).verdict > 0;
}

ProCannabis pro_cannabis(const std::vector<DatedStance>& cannabis_stances, Date window_start,
                         Date window_end) {
  ProCannabis out;
  std::vector<StanceLabel> in_window;
  for (const auto& s : cannabis_stances) {
    if (s.date < window_start || s.date > window_end) continue;
    in_window.push_back(s.label);
    if (s.label == StanceLabel::InFavor && (!out.first_pro_date || s.date < *out.first_pro_date))
      out.first_pro_date = s.date;
  }
  out.pro = user_polarity(in_window).verdict > 0;
  return out;
}

}  // namespace causeway::stance
