#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "causeway/classify.hpp"
#include "causeway/date.hpp"

namespace causeway::stance {

/// Polarity mapping is exactly {+1, -1, 0}.
enum class StanceLabel : int { InFavor = +1, Against = -1, Neither = 0 };

constexpr int polarity(StanceLabel s) { return static_cast<int>(s); }

/// p_s component order everywhere: [InFavor, Against, Neither].
constexpr std::size_t kInFavor = 0, kAgainst = 1, kNeither = 2;

struct UserStance {
  std::string user_id;
  long long polarity_sum = 0;
  int verdict = 0;  // sign of the polarity sum
  bool empty_flag = false;
};

/// Calibrated stance probabilities for one tweet embedding; sums to one.
std::array<double, 3> predict_stance(const classify::CalibratedModel& model,
                                     const std::vector<double>& embedding);

/// Categorical draw from p_s given a uniform u in [0,1).
StanceLabel sample_stance(const std::array<double, 3>& p_s, double u);

struct DatedStance {
  Date date;
  StanceLabel label;
};

/// Polarity sum and verdict; optional exponential recency decay (weight
/// exp(-decay * days before the newest tweet)), off at decay = 0.
UserStance user_polarity(const std::vector<StanceLabel>& stances);
UserStance user_polarity_decayed(const std::vector<DatedStance>& stances, double decay_per_day);

/// True iff the polarity over JUUL stances strictly before `cutoff` is
/// positive.
bool pro_juul(const std::vector<DatedStance>& juul_stances, Date cutoff);

struct ProCannabis {
  bool pro = false;
  std::optional<Date> first_pro_date;  // earliest InFavor tweet in the window
};

/// Verdict over cannabis stances within [window_start, window_end]
/// (inclusive), plus the date of the first InFavor tweet in the window.
ProCannabis pro_cannabis(const std::vector<DatedStance>& cannabis_stances, Date window_start,
                         Date window_end);

}  // namespace causeway::stance
