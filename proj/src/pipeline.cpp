#include "causeway/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "causeway/io.hpp"
#include "causeway/metrics.hpp"
#include "causeway/rng.hpp"
#include "causeway/stance.hpp"
#include "causeway/weaklabel.hpp"

namespace causeway::pipeline {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  std::size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : value) {
    if (c == ',') {
      const std::string t = trim(cur);
      if (!t.empty()) out.push_back(t);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  const std::string t = trim(cur);
  if (!t.empty()) out.push_back(t);
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw Error("config: " + key + ": expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw Error("config: " + key + ": expected an integer, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error("config: " + key + ": expected true/false, got '" + v + "'");
}

Date parse_date(const std::string& key, const std::string& v) {
  const auto d = Date::parse(v);
  if (!d) throw Error("config: " + key + ": expected YYYY-MM-DD, got '" + v + "'");
  return *d;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
  std::filesystem::path p(v);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

std::optional<Date> default_legalization_date(const std::string& state) {
  if (state == "CA") return Date::from_ymd(2018, 1, 1);
  if (state == "MA") return Date::from_ymd(2017, 7, 28);
  if (state == "VT") return Date::from_ymd(2018, 7, 1);
  return std::nullopt;
}

std::map<std::string, std::string> parse_ini(const std::filesystem::path& path) {
  std::map<std::string, std::string> kv;
  std::string section;
  std::size_t lineno = 0;
  for (const auto& raw : read_lines(path)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error("config " + path.string() + " line " + std::to_string(lineno) +
                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("config " + path.string() + " line " + std::to_string(lineno) +
                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw Error("config " + path.string() + " line " + std::to_string(lineno) + ": empty key");
    kv[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

RunConfig RunConfig::from_ini(const std::filesystem::path& path) {
  return from_kv(parse_ini(path), std::filesystem::absolute(path).parent_path());
}

RunConfig RunConfig::from_kv(const std::map<std::string, std::string>& kv,
                             const std::filesystem::path& base_dir) {
  RunConfig c;
  bool explicit_legal_date = false;
  for (const auto& [key, v] : kv) {
    if (key == "paths.corpus") c.corpus = resolve(base_dir, v);
    else if (key == "paths.embeddings") c.embeddings = resolve(base_dir, v);
    else if (key == "paths.policy_table") c.policy_table = resolve(base_dir, v);
    else if (key == "paths.gazetteer") c.gazetteer = resolve(base_dir, v);
    else if (key == "paths.lexicon") c.lexicon = resolve(base_dir, v);
    else if (key == "paths.blocklist") c.blocklist = resolve(base_dir, v);
    else if (key == "paths.stance_train_juul") c.stance_train_juul = resolve(base_dir, v);
    else if (key == "paths.stance_train_cannabis") c.stance_train_cannabis = resolve(base_dir, v);
    else if (key == "paths.external_scores")
      c.external_scores = v.empty() ? std::filesystem::path{} : resolve(base_dir, v);
    else if (key == "ingest.language") c.language = v;
    else if (key == "ingest.juul_keywords") c.juul_keywords = split_list(v);
    else if (key == "ingest.cannabis_keywords") c.cannabis_keywords = split_list(v);
    else if (key == "ingest.juul_from") c.juul_from = parse_date(key, v);
    else if (key == "ingest.juul_to") c.juul_to = parse_date(key, v);
    else if (key == "ingest.cannabis_from") c.cannabis_from = parse_date(key, v);
    else if (key == "ingest.cannabis_to") c.cannabis_to = parse_date(key, v);
    else if (key == "ingest.keyword_mode") c.keyword_mode = v;
    else if (key == "ingest.exclude_users") c.exclude_users = split_list(v);
    else if (key == "ingest.strict") c.strict = parse_bool(key, v);
    else if (key == "ingest.require_blocklist") c.require_blocklist = parse_bool(key, v);
    else if (key == "ingest.embedding_dim") c.embedding_dim = static_cast<int>(parse_int(key, v));
    else if (key == "weaklabel.confidence_threshold") c.confidence_threshold = parse_double(key, v);
    else if (key == "weaklabel.sample_k") c.sample_k = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "weaklabel.threshold_juul") c.threshold_juul = parse_double(key, v);
    else if (key == "weaklabel.threshold_cannabis") c.threshold_cannabis = parse_double(key, v);
    else if (key == "weaklabel.gbm_rounds") c.gbm_rounds = static_cast<int>(parse_int(key, v));
    else if (key == "weaklabel.gbm_depth") c.gbm_depth = static_cast<int>(parse_int(key, v));
    else if (key == "weaklabel.gbm_learning_rate") c.gbm_learning_rate = parse_double(key, v);
    else if (key == "stance.C") c.stance_C = parse_double(key, v);
    else if (key == "stance.calibration_holdout") c.calibration_holdout = parse_double(key, v);
    else if (key == "stance.decay_per_day") c.decay_per_day = parse_double(key, v);
    else if (key == "estimate.treatment_state") c.treatment_state = v;
    else if (key == "estimate.legalization_date") {
      c.legalization_date = parse_date(key, v);
      explicit_legal_date = true;
    } else if (key == "estimate.study_end") c.study_end = parse_date(key, v);
    else if (key == "estimate.horizons") {
      c.horizons.clear();
      for (const auto& h : split_list(v)) c.horizons.push_back(static_cast<int>(parse_int(key, h)));
    } else if (key == "estimate.n_sims") c.n_sims = static_cast<int>(parse_int(key, v));
    else if (key == "estimate.methods") {
      c.methods.clear();
      for (const auto& name : split_list(v)) {
        const auto m = causal::method_from(name);
        if (!m) throw Error("config: estimate.methods: unknown method '" + name + "'");
        c.methods.push_back(*m);
      }
    } else if (key == "estimate.trim_lo") c.trim_lo = parse_double(key, v);
    else if (key == "estimate.trim_hi") c.trim_hi = parse_double(key, v);
    else if (key == "estimate.propensity_C") c.propensity_C = parse_double(key, v);
    else if (key == "estimate.ci_mode") {
      const auto m = causal::ci_mode_from(v);
      if (!m) throw Error("config: estimate.ci_mode: expected paper_literal|standard_error");
      c.ci_mode = *m;
    } else if (key == "estimate.include_retweets") c.include_retweets = parse_bool(key, v);
    else if (key == "estimate.min_group") c.min_group = static_cast<std::size_t>(parse_int(key, v));
    else if (key == "estimate.master_seed")
      c.master_seed = static_cast<std::uint64_t>(parse_int(key, v));
    else throw Error("config: unknown key '" + key + "'");
  }
  if (!explicit_legal_date) {
    const auto d = default_legalization_date(c.treatment_state);
    if (!d)
      throw Error("config: estimate.legalization_date required for treatment state '" +
                  c.treatment_state + "'");
    c.legalization_date = *d;
  }
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (n_sims < 1) throw Error("config: estimate.n_sims must be >= 1");
  if (!(trim_lo >= 0 && trim_lo < trim_hi && trim_hi <= 1))
    throw Error("config: estimate trim bounds must satisfy 0 <= lo < hi <= 1");
  if (horizons.empty()) throw Error("config: estimate.horizons must not be empty");
  for (int h : horizons)
    if (h < 1 || h > 6) throw Error("config: estimate.horizons entries must be in 1..6");
  if (methods.empty()) throw Error("config: estimate.methods must not be empty");
  if (embedding_dim < 1) throw Error("config: ingest.embedding_dim must be >= 1");
  if (!(confidence_threshold >= 0.5 && confidence_threshold < 1))
    throw Error("config: weaklabel.confidence_threshold must be in [0.5, 1)");
  if (keyword_mode != "token" && keyword_mode != "substring")
    throw Error("config: ingest.keyword_mode must be token|substring");
  if (!(calibration_holdout > 0 && calibration_holdout < 1))
    throw Error("config: stance.calibration_holdout must be in (0,1)");
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["paths"] = {{"corpus", corpus.string()},
                {"embeddings", embeddings.string()},
                {"policy_table", policy_table.string()},
                {"gazetteer", gazetteer.string()},
                {"lexicon", lexicon.string()},
                {"blocklist", blocklist.string()},
                {"stance_train_juul", stance_train_juul.string()},
                {"stance_train_cannabis", stance_train_cannabis.string()},
                {"external_scores", external_scores.string()}};
  j["ingest"] = {{"language", language},
                 {"juul_keywords", juul_keywords},
                 {"cannabis_keywords", cannabis_keywords},
                 {"juul_from", juul_from.to_string()},
                 {"juul_to", juul_to.to_string()},
                 {"cannabis_from", cannabis_from.to_string()},
                 {"cannabis_to", cannabis_to.to_string()},
                 {"keyword_mode", keyword_mode},
                 {"exclude_users", exclude_users},
                 {"strict", strict},
                 {"require_blocklist", require_blocklist},
                 {"embedding_dim", embedding_dim}};
  j["weaklabel"] = {{"confidence_threshold", confidence_threshold},
                    {"sample_k", sample_k},
                    {"threshold_juul", threshold_juul},
                    {"threshold_cannabis", threshold_cannabis},
                    {"gbm_rounds", gbm_rounds},
                    {"gbm_depth", gbm_depth},
                    {"gbm_learning_rate", gbm_learning_rate}};
  j["stance"] = {{"C", stance_C},
                 {"calibration_holdout", calibration_holdout},
                 {"decay_per_day", decay_per_day}};
  std::vector<std::string> method_names;
  for (auto m : methods) method_names.push_back(causal::method_name(m));
  j["estimate"] = {{"treatment_state", treatment_state},
                   {"legalization_date", legalization_date.to_string()},
                   {"study_end", study_end.to_string()},
                   {"horizons", horizons},
                   {"n_sims", n_sims},
                   {"methods", method_names},
                   {"trim_lo", trim_lo},
                   {"trim_hi", trim_hi},
                   {"propensity_C", propensity_C},
                   {"ci_mode", causal::ci_mode_name(ci_mode)},
                   {"include_retweets", include_retweets},
                   {"min_group", min_group},
                   {"master_seed", master_seed}};
  j["tool_version"] = kToolVersion;
  return j;
}

std::string RunConfig::config_hash() const { return hex64(fnv1a64(to_json().dump())); }

causal::StudyConfig RunConfig::study_config() const {
  causal::StudyConfig sc;
  sc.treatment_state = treatment_state;
  sc.legalization_date = legalization_date;
  sc.study_end = study_end;
  sc.horizons = horizons;
  sc.methods = methods;
  sc.trim_lo = trim_lo;
  sc.trim_hi = trim_hi;
  sc.propensity_C = propensity_C;
  sc.min_group = min_group;
  sc.master_seed = master_seed;
  sc.n_sims = n_sims;
  return sc;
}

// ---- enriched tweet/user JSONL ----

nlohmann::json tweet_to_json(const corpus::Tweet& t) {
  nlohmann::json j = {{"id", t.id},
                      {"user_id", t.user_id},
                      {"created_at", t.date.to_string()},
                      {"text", t.text},
                      {"lang", t.lang},
                      {"state", t.state},
                      {"dataset", corpus::dataset_name(t.dataset)},
                      {"is_retweet", t.is_retweet},
                      {"x", t.embedding}};
  if (t.p_personal >= 0) {
    j["p_personal"] = t.p_personal;
    j["personal"] = t.personal;
  }
  if (t.has_stance) j["p_stance"] = t.p_stance;
  return j;
}

corpus::Tweet tweet_from_json(const nlohmann::json& j) {
  corpus::Tweet t;
  t.id = j.at("id").get<std::string>();
  t.user_id = j.at("user_id").get<std::string>();
  t.date = *Date::parse(j.at("created_at").get<std::string>());
  t.text = j.at("text").get<std::string>();
  t.lang = j.at("lang").get<std::string>();
  t.state = j.at("state").get<std::string>();
  t.dataset = *corpus::dataset_from(j.at("dataset").get<std::string>());
  t.is_retweet = j.at("is_retweet").get<bool>();
  t.embedding = j.at("x").get<std::vector<double>>();
  if (j.contains("p_personal")) {
    t.p_personal = j.at("p_personal").get<double>();
    t.personal = j.at("personal").get<bool>();
  }
  if (j.contains("p_stance")) {
    const auto v = j.at("p_stance").get<std::vector<double>>();
    if (v.size() != 3) throw Error("tweet json: p_stance must have three entries");
    t.p_stance = {v[0], v[1], v[2]};
    t.has_stance = true;
  }
  return t;
}

void write_tweets(const std::filesystem::path& path, const std::vector<corpus::Tweet>& tweets) {
  std::ostringstream out;
  for (const auto& t : tweets) out << tweet_to_json(t).dump() << '\n';
  write_file(path, out.str());
}

std::vector<corpus::Tweet> read_tweets(const std::filesystem::path& path) {
  std::vector<corpus::Tweet> out;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    out.push_back(tweet_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

void write_users(const std::filesystem::path& path, const std::vector<corpus::UserRecord>& users) {
  std::ostringstream out;
  for (const auto& u : users) {
    nlohmann::json j = {{"id", u.id},
                        {"state", u.state},
                        {"mean_x", u.mean_embedding},
                        {"n_tweets", u.n_tweets}};
    if (u.first_juul) j["first_juul"] = u.first_juul->to_string();
    if (u.first_cannabis) j["first_cannabis"] = u.first_cannabis->to_string();
    out << j.dump() << '\n';
  }
  write_file(path, out.str());
}

std::vector<corpus::UserRecord> read_users(const std::filesystem::path& path) {
  std::vector<corpus::UserRecord> out;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    corpus::UserRecord u;
    u.id = j.at("id").get<std::string>();
    u.state = j.at("state").get<std::string>();
    u.mean_embedding = j.at("mean_x").get<std::vector<double>>();
    u.n_tweets = j.at("n_tweets").get<std::size_t>();
    if (j.contains("first_juul")) u.first_juul = *Date::parse(j.at("first_juul").get<std::string>());
    if (j.contains("first_cannabis"))
      u.first_cannabis = *Date::parse(j.at("first_cannabis").get<std::string>());
    out.push_back(std::move(u));
  }
  return out;
}

// ---- manifests ----

void write_manifest(const std::filesystem::path& stage_dir, const std::string& stage,
                    const RunConfig& config, const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs) {
  nlohmann::json j;
  j["stage"] = stage;
  j["tool_version"] = kToolVersion;
  j["config_hash"] = config.config_hash();
  j["master_seed"] = config.master_seed;
  j["config"] = config.to_json();  // resolved settings, ci_mode included
  for (const auto& p : inputs) j["inputs"][p.filename().string()] = file_digest(p);
  for (const auto& p : outputs) j["outputs"][p.filename().string()] = file_digest(p);
  write_file(stage_dir / "manifest.json", j.dump(2) + "\n");
}

void check_upstream(const std::filesystem::path& stage_dir, const std::string& stage,
                    const RunConfig& config) {
  const auto manifest_path = stage_dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path))
    throw Error("missing upstream artifact: run the '" + stage + "' stage first (" +
                stage_dir.string() + ")");
  const auto j = nlohmann::json::parse(read_file(manifest_path));
  if (j.at("config_hash").get<std::string>() != config.config_hash())
    throw Error("stale upstream artifact: stage '" + stage +
                "' was produced under a different configuration; re-run it");
}

// ---- stages ----

IngestOutput run_ingest(const RunConfig& config) {
  const auto gazetteer = corpus::Gazetteer::load_csv(config.gazetteer);
  const auto table = corpus::EmbeddingTable::load(config.embeddings);
  if (static_cast<int>(table.dim()) != config.embedding_dim)
    throw Error("config: ingest.embedding_dim = " + std::to_string(config.embedding_dim) +
                " but embeddings file has dimension " + std::to_string(table.dim()));
  const auto mode = config.keyword_mode == "token" ? corpus::KeywordFilter::Mode::Token
                                                   : corpus::KeywordFilter::Mode::Substring;
  corpus::IngestFilters filters;
  filters.juul = {corpus::KeywordFilter(config.juul_keywords, mode), config.juul_from,
                  config.juul_to};
  filters.cannabis = {corpus::KeywordFilter(config.cannabis_keywords, mode), config.cannabis_from,
                      config.cannabis_to};
  filters.language = config.language;
  filters.exclude_users = config.exclude_users;
  filters.strict = config.strict;

  IngestOutput out;
  out.tweets = corpus::ingest(config.corpus, filters, gazetteer, table, &out.stats);
  out.users = corpus::build_users(out.tweets);
  const auto blocklist = corpus::load_blocklist(config.blocklist, config.require_blocklist);
  out.bots_removed = corpus::filter_bots(out.users, blocklist);
  return out;
}

namespace {

std::map<std::string, double> load_external_scores(const std::filesystem::path& path) {
  std::map<std::string, double> scores;
  CsvTable t = read_csv(path);
  const int c_id = t.require_column("tweet_id", "external scores");
  const int c_score = t.require_column("score", "external scores");
  for (const auto& row : t.rows)
    scores[row[static_cast<std::size_t>(c_id)]] =
        parse_double("external score", row[static_cast<std::size_t>(c_score)]);
  return scores;
}

}  // namespace

WeaklabelOutput run_weaklabel(const RunConfig& config, std::vector<corpus::Tweet>& tweets) {
  if (tweets.empty()) throw Error("weaklabel: empty corpus");
  const auto lexicon = weaklabel::SubjectivityLexicon::load_csv(config.lexicon);

  std::map<std::string, double> external;
  const bool have_external = !config.external_scores.empty();
  if (have_external) external = load_external_scores(config.external_scores);

  auto votes_with = [&](const std::vector<std::optional<double>>& scores) {
    std::vector<std::vector<weaklabel::LfVote>> votes(tweets.size());
    for (std::size_t i = 0; i < tweets.size(); ++i)
      votes[i] = weaklabel::apply_labeling_functions(tweets[i].text, lexicon, scores[i]);
    return votes;
  };

  std::vector<std::optional<double>> scores(tweets.size());
  if (have_external) {
    for (std::size_t i = 0; i < tweets.size(); ++i) {
      auto it = external.find(tweets[i].id);
      if (it != external.end()) scores[i] = it->second;
    }
  }
  auto votes = votes_with(scores);

  WeaklabelOutput out;
  out.stats["external_scores"] = have_external;

  if (!have_external) {
    // Fallback scorer: positives where LF1 and LF2 both vote Personal,
    // negatives where LF1 votes NonPersonal and LF2 has no contrary signal.
    classify::Mat X;
    std::vector<int> y;
    for (std::size_t i = 0; i < tweets.size(); ++i) {
      const auto& v = votes[i];
      if (v[0] == weaklabel::LfVote::Personal && v[1] == weaklabel::LfVote::Personal) {
        X.push_back(tweets[i].embedding);
        y.push_back(1);
      } else if (v[0] == weaklabel::LfVote::NonPersonal && v[1] == weaklabel::LfVote::Abstain) {
        X.push_back(tweets[i].embedding);
        y.push_back(0);
      }
    }
    const std::size_t pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    if (pos >= 5 && y.size() - pos >= 5) {
      classify::LogisticOptions lo;
      lo.class_weight = classify::ClassWeightMode::Balanced;
      const auto scorer = classify::fit_logistic(X, y, lo);
      for (std::size_t i = 0; i < tweets.size(); ++i)
        scores[i] = scorer.predict_proba(tweets[i].embedding)[1];
      votes = votes_with(scores);
      out.stats["fallback_scorer"] = {{"n_train", y.size()}, {"n_positive", pos}};
    } else {
      out.stats["fallback_scorer"] = "skipped: not enough LF1/LF2 agreement rows";
    }
  }

  out.label_model = weaklabel::fit_label_model(votes);
  const auto weak = weaklabel::infer_weak_labels(votes, out.label_model);

  // Confidence-weighted training sample per dataset, then one classifier.
  classify::Mat X;
  std::vector<int> y;
  classify::Vec w;
  for (corpus::Dataset ds : {corpus::Dataset::Juul, corpus::Dataset::Cannabis}) {
    std::vector<std::size_t> rows;
    std::vector<double> p;
    for (std::size_t i = 0; i < tweets.size(); ++i)
      if (tweets[i].dataset == ds) {
        rows.push_back(i);
        p.push_back(weak[i]);
      }
    if (rows.empty()) continue;
    const auto sample = weaklabel::select_weighted_training(
        p, config.confidence_threshold, config.sample_k,
        Rng::derive(config.master_seed, "weak-sample-" + corpus::dataset_name(ds)));
    for (std::size_t j = 0; j < sample.indices.size(); ++j) {
      const std::size_t i = rows[sample.indices[j]];
      X.push_back(tweets[i].embedding);
      y.push_back(weak[i] >= 0.5 ? 1 : 0);
      w.push_back(sample.weights[j]);
    }
  }
  if (X.empty()) throw Error("weaklabel: no training rows above the confidence threshold");

  classify::GbmOptions go;
  go.rounds = config.gbm_rounds;
  go.depth = config.gbm_depth;
  go.learning_rate = config.gbm_learning_rate;
  go.sample_weights = w;
  out.personal_model = classify::fit_gbm(X, y, go);

  weaklabel::classify_personal(classify::AnyModel(out.personal_model), tweets,
                               {config.threshold_juul, config.threshold_cannabis});
  out.retained_users = weaklabel::retained_users(tweets);

  std::size_t personal = 0;
  for (const auto& t : tweets) personal += t.personal ? 1 : 0;
  out.stats["n_tweets"] = tweets.size();
  out.stats["n_personal"] = personal;
  out.stats["n_retained_users"] = out.retained_users.size();
  out.stats["n_training_rows"] = X.size();
  out.stats["label_model"] = nlohmann::json{{"accuracies", out.label_model.accuracies},
                              {"prior_personal", out.label_model.prior_personal},
                              {"iterations", out.label_model.iterations},
                              {"log_likelihood", out.label_model.log_likelihood},
                              {"low_row_warning", out.label_model.low_row_warning}};
  return out;
}

namespace {

struct AnnotationSet {
  classify::Mat x_train, x_eval;
  std::vector<int> y_train, y_eval;
};

int stance_label_index(const std::string& name) {
  if (name == "favor") return 0;
  if (name == "against") return 1;
  if (name == "neither") return 2;
  throw Error("stance annotations: unknown label '" + name + "' (favor|against|neither)");
}

AnnotationSet load_annotations(const std::filesystem::path& path,
                               const corpus::EmbeddingTable& table) {
  AnnotationSet set;
  CsvTable t = read_csv(path);
  const int c_text = t.require_column("text", "stance annotations");
  const int c_label = t.require_column("label", "stance annotations");
  const int c_split = t.require_column("split", "stance annotations");
  for (const auto& row : t.rows) {
    const auto er = corpus::embed_text(row[static_cast<std::size_t>(c_text)], table);
    if (er.empty) continue;  // nothing to learn from, skip
    const int label = stance_label_index(row[static_cast<std::size_t>(c_label)]);
    const std::string& split = row[static_cast<std::size_t>(c_split)];
    if (split == "train") {
      set.x_train.push_back(er.vec);
      set.y_train.push_back(label);
    } else if (split == "eval") {
      set.x_eval.push_back(er.vec);
      set.y_eval.push_back(label);
    } else {
      throw Error("stance annotations: split must be train|eval");
    }
  }
  if (set.x_train.empty()) throw Error("stance annotations: no train rows in " + path.string());
  return set;
}

}  // namespace

StanceOutput run_stance(const RunConfig& config, std::vector<corpus::Tweet>& tweets,
                        const corpus::EmbeddingTable& table) {
  StanceOutput out;
  for (corpus::Dataset ds : {corpus::Dataset::Juul, corpus::Dataset::Cannabis}) {
    const auto& path =
        ds == corpus::Dataset::Juul ? config.stance_train_juul : config.stance_train_cannabis;
    const AnnotationSet set = load_annotations(path, table);

    classify::TrainFn train = [&](const classify::Mat& X, const std::vector<int>& y) {
      classify::LogisticOptions lo;
      lo.C = config.stance_C;
      lo.class_weight = classify::ClassWeightMode::Balanced;
      return classify::AnyModel(classify::fit_logistic(X, y, lo));
    };
    auto model = classify::calibrate(
        train, set.x_train, set.y_train, config.calibration_holdout,
        Rng::derive(config.master_seed, "stance-calibrate-" + corpus::dataset_name(ds)));

    nlohmann::json eval;
    if (!set.x_eval.empty()) {
      std::vector<std::vector<double>> probs;
      probs.reserve(set.x_eval.size());
      for (const auto& x : set.x_eval) probs.push_back(model.predict_proba(x));
      const auto ev = metrics::evaluate_classifier(set.y_eval, probs);
      eval = {{"macro_f1", ev.macro_f1},
              {"weighted_auc", ev.weighted_auc},
              {"micro_auc", ev.micro_auc},
              {"cross_entropy", ev.cross_entropy},
              {"n_eval", set.x_eval.size()}};
    }
    out.eval[corpus::dataset_name(ds)] = eval;

    for (auto& t : tweets) {
      if (t.dataset != ds || !t.personal) continue;
      t.p_stance = stance::predict_stance(model, t.embedding);
      t.has_stance = true;
    }
    if (ds == corpus::Dataset::Juul) out.model_juul = std::move(model);
    else out.model_cannabis = std::move(model);
  }
  return out;
}

causal::StudyResult run_estimate(const RunConfig& config,
                                 const std::vector<corpus::Tweet>& tweets,
                                 const std::vector<corpus::UserRecord>& users,
                                 const std::set<std::string>& retained) {
  auto policy = cohort::PolicyTable::load_csv(config.policy_table);
  if (!policy.has_state(config.treatment_state))
    throw Error("policy table has no entry for treatment state " + config.treatment_state);
  std::vector<corpus::UserRecord> kept;
  for (const auto& u : users)
    if (retained.count(u.id)) kept.push_back(u);
  const auto sc = config.study_config();
  const auto data = causal::build_study_data(tweets, kept, std::move(policy), sc,
                                             config.include_retweets);
  return causal::run_study(data, sc);
}

// ---- report emission ----

namespace {

std::string group_label(cohort::Group g) { return cohort::group_name(g); }

}  // namespace

std::string sims_csv(const causal::StudyResult& result) {
  std::ostringstream out;
  out << "method,group,horizon_N,sim_index,ate,n_treated,n_control,n_trimmed\n";
  for (const auto& [key, agg] : result.cells) {
    for (std::size_t i = 0; i < agg.sims.size(); ++i)
      out << causal::method_name(key.method) << ',' << group_label(key.group) << ','
          << key.horizon << ',' << agg.sim_indices[i] << ',' << format_double(agg.sims[i]) << ','
          << format_double(agg.mean_n_treated) << ',' << format_double(agg.mean_n_control) << ','
          << format_double(agg.mean_n_trimmed) << '\n';
    for (int s : agg.missing_sims)
      out << causal::method_name(key.method) << ',' << group_label(key.group) << ','
          << key.horizon << ',' << s << ",nan,0,0,0\n";
  }
  return out.str();
}

std::string ate_report_csv(const causal::StudyResult& result, causal::CiMode mode) {
  std::ostringstream out;
  out << "method,group,horizon_N,ate_mean,ate_sd,ci_lo,ci_hi,n_treated,n_control,n_trimmed\n";
  for (const auto& [key, agg] : result.cells) {
    out << causal::method_name(key.method) << ',' << group_label(key.group) << ',' << key.horizon
        << ',';
    if (agg.sims.size() >= 2) {
      const auto s = causal::summarize_ci(agg.sims, mode);
      out << format_double(s.mean) << ',' << format_double(s.sd) << ',' << format_double(s.ci_lo)
          << ',' << format_double(s.ci_hi);
    } else if (agg.sims.size() == 1) {
      out << format_double(agg.sims[0]) << ",nan,nan,nan";
    } else {
      out << "nan,nan,nan,nan";
    }
    out << ',' << format_double(agg.mean_n_treated) << ',' << format_double(agg.mean_n_control)
        << ',' << format_double(agg.mean_n_trimmed) << '\n';
  }
  return out.str();
}

std::string plot_data_csv(const causal::StudyResult& result, causal::CiMode mode) {
  std::ostringstream out;
  out << "method,group,month,ate,ci_lo,ci_hi\n";
  for (const auto& [key, agg] : result.cells) {
    if (agg.sims.size() < 2) continue;
    const auto s = causal::summarize_ci(agg.sims, mode);
    out << causal::method_name(key.method) << ',' << group_label(key.group) << ',' << key.horizon
        << ',' << format_double(s.mean) << ',' << format_double(s.ci_lo) << ','
        << format_double(s.ci_hi) << '\n';
  }
  return out.str();
}

std::string balance_report_csv(const causal::StudyResult& result) {
  std::ostringstream out;
  out << "method,group,dim,asmd_before,asmd_after\n";
  for (const auto& [key, rows] : result.balance) {
    for (std::size_t d = 0; d < rows.size(); ++d)
      out << causal::method_name(key.first) << ',' << group_label(key.second) << ',' << d << ','
          << format_double(rows[d].first) << ',' << format_double(rows[d].second) << '\n';
  }
  return out.str();
}

// ---- file-level commands ----

namespace {

std::filesystem::path stage_dir(const std::filesystem::path& root, const char* stage) {
  return root / stage;
}

void write_ingest_artifacts(const RunConfig& config, const std::filesystem::path& root,
                            const IngestOutput& ing) {
  const auto dir = stage_dir(root, "ingest");
  write_tweets(dir / "tweets.jsonl", ing.tweets);
  write_users(dir / "users.jsonl", ing.users);
  nlohmann::json stats = {{"lines", ing.stats.lines},
                          {"kept", ing.stats.kept},
                          {"bad_lines", ing.stats.bad_lines},
                          {"dropped_language", ing.stats.dropped_language},
                          {"dropped_date", ing.stats.dropped_date},
                          {"dropped_keyword", ing.stats.dropped_keyword},
                          {"dropped_location", ing.stats.dropped_location},
                          {"dropped_excluded_user", ing.stats.dropped_excluded_user},
                          {"dropped_empty_embedding", ing.stats.dropped_empty_embedding},
                          {"bots_removed", ing.bots_removed},
                          {"n_users", ing.users.size()}};
  write_file(dir / "stats.json", stats.dump(2) + "\n");
  write_manifest(dir, "ingest", config, {config.corpus},
                 {dir / "tweets.jsonl", dir / "users.jsonl", dir / "stats.json"});
}

void write_weaklabel_artifacts(const RunConfig& config, const std::filesystem::path& root,
                               const std::vector<corpus::Tweet>& tweets,
                               const WeaklabelOutput& wl) {
  const auto dir = stage_dir(root, "weaklabel");
  write_tweets(dir / "tweets.jsonl", tweets);
  std::ostringstream retained;
  for (const auto& id : wl.retained_users) retained << id << '\n';
  write_file(dir / "retained_users.txt", retained.str());
  write_file(dir / "personal_model.json", classify::to_json(wl.personal_model).dump(2) + "\n");
  write_file(dir / "stats.json", wl.stats.dump(2) + "\n");
  write_manifest(dir, "weaklabel", config, {},
                 {dir / "tweets.jsonl", dir / "retained_users.txt", dir / "personal_model.json",
                  dir / "stats.json"});
}

void write_stance_artifacts(const RunConfig& config, const std::filesystem::path& root,
                            const std::vector<corpus::Tweet>& tweets, const StanceOutput& st) {
  const auto dir = stage_dir(root, "stance");
  write_tweets(dir / "tweets.jsonl", tweets);
  write_file(dir / "stance_model_juul.json", classify::to_json(st.model_juul).dump(2) + "\n");
  write_file(dir / "stance_model_cannabis.json",
             classify::to_json(st.model_cannabis).dump(2) + "\n");
  write_file(dir / "eval.json", st.eval.dump(2) + "\n");
  write_manifest(dir, "stance", config, {},
                 {dir / "tweets.jsonl", dir / "stance_model_juul.json",
                  dir / "stance_model_cannabis.json", dir / "eval.json"});
}

void write_estimate_artifacts(const RunConfig& config, const std::filesystem::path& root,
                              const causal::StudyResult& result) {
  const auto dir = stage_dir(root, "estimate");
  write_file(dir / "sims.csv", sims_csv(result));
  write_file(dir / "balance_report.csv", balance_report_csv(result));
  nlohmann::json groups;
  for (const auto& [g, mean] : result.mean_group_size) {
    groups[cohort::group_name(g)] = {{"mean", mean}, {"sd", result.sd_group_size.at(g)}};
  }
  write_file(dir / "groups.json", groups.dump(2) + "\n");
  write_manifest(dir, "estimate", config, {},
                 {dir / "sims.csv", dir / "balance_report.csv", dir / "groups.json"});
}

void write_report_artifacts(const RunConfig& config, const std::filesystem::path& root,
                            const causal::StudyResult& result) {
  const auto dir = stage_dir(root, "report");
  write_file(dir / "ate_report.csv", ate_report_csv(result, config.ci_mode));
  write_file(dir / "plot_data.csv", plot_data_csv(result, config.ci_mode));
  write_file(dir / "balance_report.csv", balance_report_csv(result));
  write_manifest(dir, "report", config, {},
                 {dir / "ate_report.csv", dir / "plot_data.csv", dir / "balance_report.csv"});
}

std::set<std::string> read_retained(const std::filesystem::path& path) {
  std::set<std::string> out;
  for (const auto& line : read_lines(path))
    if (!line.empty()) out.insert(line);
  return out;
}

// Rebuild a StudyResult from sims.csv rows (file-level report command).
causal::StudyResult study_result_from_sims(const std::filesystem::path& sims_path) {
  causal::StudyResult result;
  CsvTable t = read_csv(sims_path);
  const int c_method = t.require_column("method", "sims.csv");
  const int c_group = t.require_column("group", "sims.csv");
  const int c_h = t.require_column("horizon_N", "sims.csv");
  const int c_sim = t.require_column("sim_index", "sims.csv");
  const int c_ate = t.require_column("ate", "sims.csv");
  const int c_nt = t.require_column("n_treated", "sims.csv");
  const int c_nc = t.require_column("n_control", "sims.csv");
  const int c_ntr = t.require_column("n_trimmed", "sims.csv");
  for (const auto& row : t.rows) {
    const auto method = causal::method_from(row[static_cast<std::size_t>(c_method)]);
    if (!method) throw Error("sims.csv: unknown method " + row[static_cast<std::size_t>(c_method)]);
    cohort::Group group = cohort::Group::C1;
    bool found = false;
    for (auto g : {cohort::Group::Treatment, cohort::Group::C1, cohort::Group::C2,
                   cohort::Group::C3, cohort::Group::C4})
      if (cohort::group_name(g) == row[static_cast<std::size_t>(c_group)]) {
        group = g;
        found = true;
      }
    if (!found) throw Error("sims.csv: unknown group " + row[static_cast<std::size_t>(c_group)]);
    causal::CellKey key{*method, group,
                        static_cast<int>(parse_int("horizon", row[static_cast<std::size_t>(c_h)]))};
    auto& agg = result.cells[key];
    const std::string& ate = row[static_cast<std::size_t>(c_ate)];
    const int sim = static_cast<int>(parse_int("sim_index", row[static_cast<std::size_t>(c_sim)]));
    if (ate == "nan") {
      ++agg.n_missing;
      agg.missing_sims.push_back(sim);
      continue;
    }
    agg.sims.push_back(parse_double("ate", ate));
    agg.sim_indices.push_back(sim);
    agg.mean_n_treated = parse_double("n_treated", row[static_cast<std::size_t>(c_nt)]);
    agg.mean_n_control = parse_double("n_control", row[static_cast<std::size_t>(c_nc)]);
    agg.mean_n_trimmed = parse_double("n_trimmed", row[static_cast<std::size_t>(c_ntr)]);
  }
  return result;
}

}  // namespace

void cmd_ingest(const RunConfig& config, const std::filesystem::path& out_root) {
  write_ingest_artifacts(config, out_root, run_ingest(config));
}

void cmd_weaklabel(const RunConfig& config, const std::filesystem::path& out_root) {
  check_upstream(stage_dir(out_root, "ingest"), "ingest", config);
  auto tweets = read_tweets(stage_dir(out_root, "ingest") / "tweets.jsonl");
  const auto wl = run_weaklabel(config, tweets);
  write_weaklabel_artifacts(config, out_root, tweets, wl);
}

void cmd_stance(const RunConfig& config, const std::filesystem::path& out_root) {
  check_upstream(stage_dir(out_root, "weaklabel"), "weaklabel", config);
  auto tweets = read_tweets(stage_dir(out_root, "weaklabel") / "tweets.jsonl");
  const auto table = corpus::EmbeddingTable::load(config.embeddings);
  const auto st = run_stance(config, tweets, table);
  write_stance_artifacts(config, out_root, tweets, st);
}

void cmd_estimate(const RunConfig& config, const std::filesystem::path& out_root) {
  check_upstream(stage_dir(out_root, "stance"), "stance", config);
  check_upstream(stage_dir(out_root, "ingest"), "ingest", config);
  check_upstream(stage_dir(out_root, "weaklabel"), "weaklabel", config);
  const auto tweets = read_tweets(stage_dir(out_root, "stance") / "tweets.jsonl");
  const auto users = read_users(stage_dir(out_root, "ingest") / "users.jsonl");
  const auto retained = read_retained(stage_dir(out_root, "weaklabel") / "retained_users.txt");
  write_estimate_artifacts(config, out_root, run_estimate(config, tweets, users, retained));
}

void cmd_report(const RunConfig& config, const std::filesystem::path& out_root) {
  check_upstream(stage_dir(out_root, "estimate"), "estimate", config);
  auto result = study_result_from_sims(stage_dir(out_root, "estimate") / "sims.csv");
  // Balance comes through unchanged from the estimate stage.
  const auto balance_src = stage_dir(out_root, "estimate") / "balance_report.csv";
  const auto dir = stage_dir(out_root, "report");
  write_file(dir / "ate_report.csv", ate_report_csv(result, config.ci_mode));
  write_file(dir / "plot_data.csv", plot_data_csv(result, config.ci_mode));
  write_file(dir / "balance_report.csv", read_file(balance_src));
  write_manifest(dir, "report", config, {balance_src},
                 {dir / "ate_report.csv", dir / "plot_data.csv", dir / "balance_report.csv"});
}

void cmd_sensitivity(const RunConfig& config, const std::filesystem::path& out_root) {
  check_upstream(stage_dir(out_root, "stance"), "stance", config);
  check_upstream(stage_dir(out_root, "ingest"), "ingest", config);
  check_upstream(stage_dir(out_root, "weaklabel"), "weaklabel", config);
  const auto tweets = read_tweets(stage_dir(out_root, "stance") / "tweets.jsonl");
  const auto users = read_users(stage_dir(out_root, "ingest") / "users.jsonl");
  const auto retained = read_retained(stage_dir(out_root, "weaklabel") / "retained_users.txt");

  auto policy = cohort::PolicyTable::load_csv(config.policy_table);
  std::vector<corpus::UserRecord> kept;
  for (const auto& u : users)
    if (retained.count(u.id)) kept.push_back(u);
  auto sc = config.study_config();
  const auto with_rt = causal::build_study_data(tweets, kept, policy, sc, true);
  const auto without_rt = causal::build_study_data(tweets, kept, policy, sc, false);
  const auto cells = causal::sensitivity_grid(with_rt, without_rt, sc);

  const auto dir = stage_dir(out_root, "sensitivity");
  std::ostringstream summary;
  summary << "retweets,method,group,horizon_N,ate_mean,ate_sd,ci_lo,ci_hi,n_treated,n_control,"
             "n_trimmed,flag\n";
  std::vector<std::filesystem::path> outputs;
  for (const auto& cell : cells) {
    const std::string sub = cell.retweets_included ? "retweets_included" : "retweets_excluded";
    write_file(dir / sub / "sims.csv", sims_csv(cell.result));
    write_file(dir / sub / "balance_report.csv", balance_report_csv(cell.result));
    write_file(dir / sub / "ate_report.csv", ate_report_csv(cell.result, config.ci_mode));
    outputs.push_back(dir / sub / "sims.csv");
    outputs.push_back(dir / sub / "balance_report.csv");
    outputs.push_back(dir / sub / "ate_report.csv");
    for (const auto& [key, agg] : cell.result.cells) {
      summary << (cell.retweets_included ? "included" : "excluded") << ','
              << causal::method_name(key.method) << ',' << cohort::group_name(key.group) << ','
              << key.horizon << ',';
      if (agg.sims.size() >= 2) {
        const auto s = causal::summarize_ci(agg.sims, config.ci_mode);
        summary << format_double(s.mean) << ',' << format_double(s.sd) << ','
                << format_double(s.ci_lo) << ',' << format_double(s.ci_hi);
      } else {
        summary << "nan,nan,nan,nan";
      }
      summary << ',' << format_double(agg.mean_n_treated) << ','
              << format_double(agg.mean_n_control) << ',' << format_double(agg.mean_n_trimmed)
              << ',' << agg.flag << '\n';
    }
  }
  write_file(dir / "sensitivity_summary.csv", summary.str());
  outputs.push_back(dir / "sensitivity_summary.csv");
  write_manifest(dir, "sensitivity", config, {}, outputs);
}

causal::StudyResult run_full(const RunConfig& config, const std::filesystem::path& out_root) {
  auto ing = run_ingest(config);
  write_ingest_artifacts(config, out_root, ing);
  const auto wl = run_weaklabel(config, ing.tweets);
  write_weaklabel_artifacts(config, out_root, ing.tweets, wl);
  const auto table = corpus::EmbeddingTable::load(config.embeddings);
  const auto st = run_stance(config, ing.tweets, table);
  write_stance_artifacts(config, out_root, ing.tweets, st);
  auto result = run_estimate(config, ing.tweets, ing.users, wl.retained_users);
  write_estimate_artifacts(config, out_root, result);
  write_report_artifacts(config, out_root, result);
  return result;
}

void run_full_sensitivity(const RunConfig& config, const std::filesystem::path& out_root) {
  auto ing = run_ingest(config);
  write_ingest_artifacts(config, out_root, ing);
  const auto wl = run_weaklabel(config, ing.tweets);
  write_weaklabel_artifacts(config, out_root, ing.tweets, wl);
  const auto table = corpus::EmbeddingTable::load(config.embeddings);
  const auto st = run_stance(config, ing.tweets, table);
  write_stance_artifacts(config, out_root, ing.tweets, st);
  cmd_sensitivity(config, out_root);
}

}  // namespace causeway::pipeline
