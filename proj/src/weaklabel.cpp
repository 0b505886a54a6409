#include "causeway/weaklabel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "causeway/io.hpp"
#include "causeway/rng.hpp"
#include "causeway/text.hpp"

namespace causeway::weaklabel {

namespace {

const std::set<std::string>& first_person_pronouns() {
  static const std::set<std::string> kPronouns = {"i",  "me",  "my",   "mine", "we",   "us",
                                                  "our", "ours", "i'm", "i've", "i'll", "i'd"};
  return kPronouns;
}

}  // namespace

SubjectivityLexicon SubjectivityLexicon::load_csv(const std::filesystem::path& path) {
  SubjectivityLexicon lex;
  CsvTable t = read_csv(path);
  const int c_tok = t.require_column("token", "lexicon");
  const int c_str = t.require_column("strength", "lexicon");
  for (const auto& row : t.rows) {
    const std::string& s = row[static_cast<std::size_t>(c_str)];
    int strength;
    if (s == "weak") strength = 1;
    else if (s == "strong") strength = 2;
    else throw Error("lexicon: strength must be weak|strong, got '" + s + "'");
    lex.add(to_lower(row[static_cast<std::size_t>(c_tok)]), strength);
  }
  if (lex.size() == 0) throw Error("lexicon: empty");
  return lex;
}

void SubjectivityLexicon::add(const std::string& token, int strength) {
  if (strength != 1 && strength != 2) throw Error("lexicon: strength must be 1 or 2");
  strength_[token] = strength;
}

int SubjectivityLexicon::score_tokens(const std::vector<std::string>& tokens) const {
  int score = 0;
  for (const auto& t : tokens) {
    auto it = strength_.find(t);
    if (it != strength_.end()) score += it->second;
  }
  return score;
}

std::vector<LfVote> apply_labeling_functions(std::string_view text,
                                             const SubjectivityLexicon& lexicon,
                                             std::optional<double> external_score) {
  std::vector<LfVote> votes(4, LfVote::Abstain);
  votes[0] = contains_url(text) ? LfVote::NonPersonal : LfVote::Personal;

  const auto tokens = tokenize(strip_urls_mentions(text), /*keep_apostrophe=*/true);
  for (const auto& tok : tokens) {
    if (first_person_pronouns().count(tok)) {
      votes[1] = LfVote::Personal;
      break;
    }
  }

  const int subj = lexicon.score_tokens(tokens);
  if (subj < 1) votes[2] = LfVote::NonPersonal;
  else if (subj > 4) votes[2] = LfVote::Personal;

  if (external_score) {
    if (*external_score > 0.6) votes[3] = LfVote::Personal;
    else if (*external_score < 0.1) votes[3] = LfVote::NonPersonal;
  }
  return votes;
}

namespace {

// Row likelihood factors under truth Personal / NonPersonal.
void row_factors(const std::vector<LfVote>& row, const std::vector<double>& acc, double& fp,
                 double& fn) {
  fp = 1.0;
  fn = 1.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] == LfVote::Abstain) continue;
    if (row[j] == LfVote::Personal) {
      fp *= acc[j];
      fn *= 1.0 - acc[j];
    } else {
      fp *= 1.0 - acc[j];
      fn *= acc[j];
    }
  }
}

double model_log_likelihood(const std::vector<std::vector<LfVote>>& votes,
                            const std::vector<double>& acc, double prior) {
  double ll = 0;
  for (const auto& row : votes) {
    double fp, fn;
    row_factors(row, acc, fp, fn);
    ll += std::log(std::max(prior * fp + (1.0 - prior) * fn, 1e-300));
  }
  return ll;
}

}  // namespace

LabelModel fit_label_model(const std::vector<std::vector<LfVote>>& votes,
                           const LabelModelOptions& opt) {
  if (votes.empty()) throw Error("fit_label_model: no rows");
  const std::size_t n_lf = votes[0].size();
  for (const auto& row : votes)
    if (row.size() != n_lf) throw Error("fit_label_model: ragged vote matrix");

  std::vector<std::size_t> lf_votes(n_lf, 0);
  std::size_t any_vote = 0;
  for (const auto& row : votes)
    for (std::size_t j = 0; j < n_lf; ++j)
      if (row[j] != LfVote::Abstain) {
        ++lf_votes[j];
        ++any_vote;
      }
  if (any_vote == 0) throw Error("fit_label_model: no signal (all votes abstain)");

  LabelModel m;
  m.low_row_warning = votes.size() < 50;
  m.accuracies.assign(n_lf, opt.init_accuracy);
  for (std::size_t j = 0; j < n_lf; ++j)
    if (lf_votes[j] == 0) m.no_signal_lfs.push_back(static_cast<int>(j));

  // Prior initialized from per-row vote majorities (ties count one half).
  {
    double maj = 0;
    for (const auto& row : votes) {
      int p = 0, n = 0;
      for (auto v : row) {
        if (v == LfVote::Personal) ++p;
        if (v == LfVote::NonPersonal) ++n;
      }
      maj += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
    }
    m.prior_personal = std::clamp(maj / static_cast<double>(votes.size()), 0.05, 0.95);
  }

  double ll = model_log_likelihood(votes, m.accuracies, m.prior_personal);
  m.ll_trace.push_back(ll);
  std::vector<double> gamma(votes.size());

  for (int it = 0; it < opt.max_iter; ++it) {
    // E step
    for (std::size_t i = 0; i < votes.size(); ++i) {
      double fp, fn;
      row_factors(votes[i], m.accuracies, fp, fn);
      const double num = m.prior_personal * fp;
      const double den = num + (1.0 - m.prior_personal) * fn;
      gamma[i] = den > 0 ? num / den : m.prior_personal;
    }
    // M step
    double gsum = 0;
    for (double g : gamma) gsum += g;
    const double new_prior =
        std::clamp(gsum / static_cast<double>(votes.size()), opt.acc_lo, opt.acc_hi);
    std::vector<double> new_acc = m.accuracies;
    for (std::size_t j = 0; j < n_lf; ++j) {
      if (lf_votes[j] == 0) continue;  // stays at initialization, flagged
      double correct = 0, total = 0;
      for (std::size_t i = 0; i < votes.size(); ++i) {
        if (votes[i][j] == LfVote::Abstain) continue;
        correct += votes[i][j] == LfVote::Personal ? gamma[i] : 1.0 - gamma[i];
        total += 1.0;
      }
      new_acc[j] = std::clamp(correct / total, opt.acc_lo, opt.acc_hi);
    }
    const double new_ll = model_log_likelihood(votes, new_acc, new_prior);
    m.accuracies = std::move(new_acc);
    m.prior_personal = new_prior;
    m.iterations = it + 1;
    m.ll_trace.push_back(new_ll);
    const double delta = new_ll - ll;
    ll = new_ll;
    if (std::fabs(delta) < opt.ll_tol) break;
  }
  m.log_likelihood = ll;
  return m;
}

std::vector<double> infer_weak_labels(const std::vector<std::vector<LfVote>>& votes,
                                      const LabelModel& model) {
  if (model.accuracies.empty()) throw Error("infer_weak_labels: model not fitted");
  std::vector<double> out(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) {
    if (votes[i].size() != model.accuracies.size())
      throw Error("infer_weak_labels: vote row width mismatch");
    double fp, fn;
    row_factors(votes[i], model.accuracies, fp, fn);
    const double num = model.prior_personal * fp;
    const double den = num + (1.0 - model.prior_personal) * fn;
    out[i] = den > 0 ? num / den : model.prior_personal;
  }
  return out;
}

WeightedSample select_weighted_training(const std::vector<double>& p_personal, double threshold,
                                        std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < p_personal.size(); ++i) {
    const double conf = std::max(p_personal[i], 1.0 - p_personal[i]);
    if (conf > threshold) eligible.push_back(i);
  }
  if (eligible.empty()) throw Error("select_weighted_training: no rows above confidence threshold");
  const std::size_t take = std::min(k, eligible.size());
  Rng rng(Rng::derive(seed, "weak-train-sample"));
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.next_below(eligible.size() - i);
    std::swap(eligible[i], eligible[j]);
  }
  eligible.resize(take);
  std::sort(eligible.begin(), eligible.end());
  WeightedSample s;
  s.indices = std::move(eligible);
  s.weights.reserve(take);
  for (auto i : s.indices) s.weights.push_back(std::max(p_personal[i], 1.0 - p_personal[i]));
  return s;
}

std::vector<std::size_t> domain_select(const classify::Mat& source, const classify::Mat& target,
                                       std::size_t k, std::ostream* warn) {
  if (source.empty() || target.empty()) throw Error("domain_select: empty source or target");
  if (k > source.size()) {
    if (warn) *warn << "domain_select: k=" << k << " clamped to " << source.size() << "\n";
    k = source.size();
  }
  auto norm = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  std::vector<double> tnorm(target.size());
  for (std::size_t j = 0; j < target.size(); ++j) tnorm[j] = norm(target[j]);

  std::vector<double> best(source.size(), -2.0);
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (source[i].size() != target[0].size())
      throw Error("domain_select: embedding dimension mismatch");
    const double sn = norm(source[i]);
    for (std::size_t j = 0; j < target.size(); ++j) {
      double dot = 0;
      for (std::size_t c = 0; c < source[i].size(); ++c) dot += source[i][c] * target[j][c];
      const double denom = sn * tnorm[j];
      const double sim = denom > 0 ? dot / denom : -1.0;
      best[i] = std::max(best[i], sim);
    }
  }
  std::vector<std::size_t> idx(source.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (best[a] != best[b]) return best[a] > best[b];
    return a < b;
  });
  idx.resize(k);
  return idx;
}

void classify_personal(const classify::AnyModel& model, std::vector<corpus::Tweet>& tweets,
                       const PersonalThresholds& thresholds) {
  for (auto& t : tweets) {
    const auto p = classify::predict_proba(model, t.embedding);
    t.p_personal = p[1];
    const double thr =
        t.dataset == corpus::Dataset::Juul ? thresholds.juul : thresholds.cannabis;
    t.personal = t.p_personal >= thr;
  }
}

std::set<std::string> retained_users(const std::vector<corpus::Tweet>& tweets) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // personal, total
  for (const auto& t : tweets) {
    auto& c = counts[t.user_id];
    if (t.personal) ++c.first;
    ++c.second;
  }
  std::set<std::string> kept;
  for (const auto& [id, c] : counts)
    if (2 * c.first > c.second) kept.insert(id);
  return kept;
}

}  // namespace causeway::weaklabel
