#include "causeway/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "causeway/io.hpp"
#include "causeway/text.hpp"

namespace causeway::corpus {

std::string dataset_name(Dataset d) { return d == Dataset::Juul ? "JUUL" : "CANNABIS"; }

std::optional<Dataset> dataset_from(std::string_view name) {
  if (name == "JUUL") return Dataset::Juul;
  if (name == "CANNABIS") return Dataset::Cannabis;
  return std::nullopt;
}

// ---- gazetteer ----

Gazetteer Gazetteer::load_csv(const std::filesystem::path& path) {
  Gazetteer g;
  CsvTable t = read_csv(path);
  const int c_pat = t.require_column("pattern", "gazetteer");
  const int c_state = t.require_column("state_code", "gazetteer");
  const int c_kind = t.require_column("kind", "gazetteer");
  for (const auto& row : t.rows)
    g.add(row[static_cast<std::size_t>(c_pat)], row[static_cast<std::size_t>(c_state)],
          row[static_cast<std::size_t>(c_kind)]);
  return g;
}

void Gazetteer::add(const std::string& pattern, const std::string& state_code,
                    const std::string& kind) {
  if (kind == "abbrev") {
    abbrevs_.emplace_back(pattern, state_code);
    return;
  }
  Entry e{tokenize(pattern), state_code};
  if (e.tokens.empty()) throw Error("gazetteer: empty pattern");
  if (kind == "name") names_.push_back(std::move(e));
  else if (kind == "city") cities_.push_back(std::move(e));
  else throw Error("gazetteer: unknown kind '" + kind + "'");
}

std::optional<std::string> Gazetteer::lookup(std::string_view profile_text) const {
  const std::vector<std::string> lower = tokenize(profile_text);
  for (const auto& e : names_)
    if (contains_token_sequence(lower, e.tokens)) return e.state;

  // Abbreviations must appear uppercase in the raw text as their own token.
  std::vector<std::string> raw;
  {
    std::string cur;
    auto flush = [&] {
      if (!cur.empty()) raw.push_back(cur);
      cur.clear();
    };
    for (char ch : profile_text) {
      if (std::isalnum(static_cast<unsigned char>(ch))) cur.push_back(ch);
      else flush();
    }
    flush();
  }
  for (const auto& [pat, state] : abbrevs_)
    for (const auto& tok : raw)
      if (tok == pat) return state;

  for (const auto& e : cities_)
    if (contains_token_sequence(lower, e.tokens)) return e.state;
  return std::nullopt;
}

std::optional<std::string> parse_location(std::string_view profile_text, const Gazetteer& gaz) {
  return gaz.lookup(profile_text);
}

// ---- embeddings ----

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file " + path.string());
  EmbeddingTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    std::vector<double> vec;
    double v;
    while (ss >> v) vec.push_back(v);
    if (token.empty() || vec.empty())
      throw Error("embeddings line " + std::to_string(lineno) + ": malformed");
    t.insert(to_lower(token), std::move(vec));
  }
  return t;
}

void EmbeddingTable::insert(std::string token, std::vector<double> vec) {
  if (dim_ == 0) dim_ = vec.size();
  else if (vec.size() != dim_)
    throw Error("embedding dimension mismatch for token '" + token + "'");
  table_[std::move(token)] = std::move(vec);
}

const std::vector<double>* EmbeddingTable::find(std::string_view token) const {
  auto it = table_.find(token);
  return it == table_.end() ? nullptr : &it->second;
}

EmbedResult embed_text(std::string_view text, const EmbeddingTable& table) {
  const std::string cleaned = strip_urls_mentions(text);
  const auto tokens = tokenize(cleaned);
  EmbedResult r;
  r.vec.assign(table.dim(), 0.0);
  std::size_t hits = 0;
  for (const auto& tok : tokens) {
    const auto* v = table.find(tok);
    if (!v) continue;
    for (std::size_t j = 0; j < v->size(); ++j) r.vec[j] += (*v)[j];
    ++hits;
  }
  if (hits == 0) {
    r.empty = true;
    r.vec.clear();
    return r;
  }
  for (double& v : r.vec) v /= static_cast<double>(hits);
  return r;
}

// ---- keyword filter ----

KeywordFilter::KeywordFilter(const std::vector<std::string>& keywords, Mode mode) : mode_(mode) {
  for (const auto& k : keywords) {
    if (mode_ == Mode::Token) {
      auto toks = tokenize(k);
      if (!toks.empty()) token_keys_.push_back(std::move(toks));
    } else {
      substring_keys_.push_back(to_lower(k));
    }
  }
}

bool KeywordFilter::matches(std::string_view text) const {
  if (mode_ == Mode::Token) {
    const auto tokens = tokenize(text);
    for (const auto& key : token_keys_)
      if (contains_token_sequence(tokens, key)) return true;
    return false;
  }
  const std::string lower = to_lower(text);
  for (const auto& key : substring_keys_)
    if (lower.find(key) != std::string::npos) return true;
  return false;
}

// ---- ingest ----

namespace {

bool language_matches(const std::string& lang, const std::string& wanted) {
  if (lang.size() < wanted.size()) return false;
  for (std::size_t i = 0; i < wanted.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(lang[i])) != wanted[i]) return false;
  return lang.size() == wanted.size() || lang[wanted.size()] == '-';
}

}  // namespace

std::vector<Tweet> ingest(const std::filesystem::path& jsonl_path, const IngestFilters& filters,
                          const Gazetteer& gazetteer, const EmbeddingTable& embeddings,
                          IngestStats* stats, std::ostream* log) {
  std::ifstream in(jsonl_path);
  if (!in) throw Error("cannot open corpus file " + jsonl_path.string());
  const std::set<std::string> excluded(filters.exclude_users.begin(), filters.exclude_users.end());

  std::vector<Tweet> out;
  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  std::string line;
  std::size_t lineno = 0;

  auto bad = [&](const std::string& why) {
    ++st.bad_lines;
    if (log) *log << jsonl_path.filename().string() << " line " << lineno << ": " << why << "\n";
    if (filters.strict)
      throw Error(jsonl_path.string() + " line " + std::to_string(lineno) + ": " + why);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ++st.lines;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      bad("invalid JSON");
      continue;
    }
    Tweet t;
    try {
      t.id = j.at("id").get<std::string>();
      t.user_id = j.at("user_id").get<std::string>();
      t.text = j.at("text").get<std::string>();
      t.lang = j.at("lang").get<std::string>();
      t.is_retweet = j.at("is_retweet").get<bool>();
      const auto ds = dataset_from(j.at("dataset").get<std::string>());
      if (!ds) {
        bad("unknown dataset tag");
        continue;
      }
      t.dataset = *ds;
      const auto date = Date::parse(j.at("created_at").get<std::string>());
      if (!date) {
        bad("unparseable created_at");
        continue;
      }
      t.date = *date;

      if (!language_matches(t.lang, filters.language)) {
        ++st.dropped_language;
        continue;
      }
      if (excluded.count(t.user_id)) {
        ++st.dropped_excluded_user;
        continue;
      }
      const DatasetFilter& df = t.dataset == Dataset::Juul ? filters.juul : filters.cannabis;
      if (t.date < df.from || t.date > df.to) {
        ++st.dropped_date;
        continue;
      }
      if (!df.keywords.empty() && !df.keywords.matches(t.text)) {
        ++st.dropped_keyword;
        continue;
      }
      const auto state = parse_location(j.at("user_location").get<std::string>(), gazetteer);
      if (!state) {
        ++st.dropped_location;
        continue;
      }
      t.state = *state;
      EmbedResult er = embed_text(t.text, embeddings);
      if (er.empty) {
        ++st.dropped_empty_embedding;
        if (log) *log << "tweet " << t.id << ": no vocabulary hit, excluded\n";
        continue;
      }
      t.embedding = std::move(er.vec);
    } catch (const nlohmann::json::exception& e) {
      bad(e.what());
      continue;
    }
    ++st.kept;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<UserRecord> build_users(const std::vector<Tweet>& tweets) {
  std::map<std::string, UserRecord> users;
  std::map<std::string, std::size_t> counts;
  for (const auto& t : tweets) {
    auto& u = users[t.user_id];
    if (u.id.empty()) {
      u.id = t.user_id;
      u.state = t.state;
      u.mean_embedding.assign(t.embedding.size(), 0.0);
    }
    if (u.mean_embedding.size() != t.embedding.size())
      throw Error("build_users: inconsistent embedding dimension for user " + t.user_id);
    for (std::size_t j = 0; j < t.embedding.size(); ++j) u.mean_embedding[j] += t.embedding[j];
    ++counts[t.user_id];
    auto& first = t.dataset == Dataset::Juul ? u.first_juul : u.first_cannabis;
    if (!first || t.date < *first) first = t.date;
  }
  std::vector<UserRecord> out;
  out.reserve(users.size());
  for (auto& [id, u] : users) {
    const double n = static_cast<double>(counts[id]);
    for (double& v : u.mean_embedding) v /= n;
    u.n_tweets = counts[id];
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<std::string> load_blocklist(const std::filesystem::path& path, bool required) {
  if (!std::filesystem::exists(path)) {
    if (required) throw Error("blocklist file missing: " + path.string());
    return {};
  }
  std::vector<std::string> ids;
  for (auto& line : read_lines(path)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (!line.empty() && line[0] != '#') ids.push_back(line);
  }
  return ids;
}

std::size_t filter_bots(std::vector<UserRecord>& users, const std::vector<std::string>& blocklist) {
  const std::set<std::string> bots(blocklist.begin(), blocklist.end());
  const std::size_t before = users.size();
  std::erase_if(users, [&](const UserRecord& u) { return bots.count(u.id) > 0; });
  return before - users.size();
}

}  // namespace causeway::corpus
