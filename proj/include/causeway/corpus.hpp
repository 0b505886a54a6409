#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "causeway/date.hpp"

namespace causeway::corpus {

enum class Dataset { Juul, Cannabis };
std::string dataset_name(Dataset d);
std::optional<Dataset> dataset_from(std::string_view name);

struct Tweet {
  std::string id;
  std::string user_id;
  Date date;
  std::string text;
  std::vector<double> embedding;
  Dataset dataset = Dataset::Juul;
  bool is_retweet = false;
  std::string lang;
  std::string state;  // resolved from the user profile location at ingest
  double p_personal = -1;                      // filled by the weak-label stage
  bool personal = false;                       // p_personal >= dataset threshold
  std::array<double, 3> p_stance{-1, -1, -1};  // InFavor, Against, Neither
  bool has_stance = false;
};

struct UserRecord {
  std::string id;
  std::string state;
  std::vector<double> mean_embedding;  // arithmetic mean over retained tweets
  std::optional<Date> first_juul;      // earliest JUUL tweet date
  std::optional<Date> first_cannabis;  // earliest cannabis tweet date
  std::size_t n_tweets = 0;
};

/// State/city lookup table. Precedence: state name > abbreviation > city;
/// within a kind the file order decides. Names and cities match
/// case-insensitively as token sequences; abbreviations only as uppercase
/// whole tokens (lowercase "in"/"or"/"me" are ordinary English words).
class Gazetteer {
 public:
  static Gazetteer load_csv(const std::filesystem::path& path);
  void add(const std::string& pattern, const std::string& state_code, const std::string& kind);
  std::optional<std::string> lookup(std::string_view profile_text) const;
  std::size_t size() const { return names_.size() + abbrevs_.size() + cities_.size(); }

 private:
  struct Entry {
    std::vector<std::string> tokens;
    std::string state;
  };
  std::vector<Entry> names_, cities_;
  std::vector<std::pair<std::string, std::string>> abbrevs_;  // pattern -> state
};

std::optional<std::string> parse_location(std::string_view profile_text, const Gazetteer& gaz);

/// token -> vector table, all rows the same dimension, lookups case-folded.
class EmbeddingTable {
 public:
  static EmbeddingTable load(const std::filesystem::path& path);
  void insert(std::string token, std::vector<double> vec);
  const std::vector<double>* find(std::string_view token) const;  // token already lowercase
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::vector<double>, std::less<>> table_;
  std::size_t dim_ = 0;
};

struct EmbedResult {
  std::vector<double> vec;
  bool empty = false;  // no token hit the vocabulary
};

/// Mean vector over in-vocabulary tokens; URLs and @mentions stripped first,
/// tokens lowercased and split on non-alphanumeric bytes.
EmbedResult embed_text(std::string_view text, const EmbeddingTable& table);

class KeywordFilter {
 public:
  enum class Mode { Token, Substring };
  KeywordFilter() = default;
  KeywordFilter(const std::vector<std::string>& keywords, Mode mode = Mode::Token);
  bool matches(std::string_view text) const;
  bool empty() const { return token_keys_.empty() && substring_keys_.empty(); }

 private:
  Mode mode_ = Mode::Token;
  std::vector<std::vector<std::string>> token_keys_;
  std::vector<std::string> substring_keys_;
};

struct DatasetFilter {
  KeywordFilter keywords;
  Date from;
  Date to;  // inclusive
};

struct IngestFilters {
  DatasetFilter juul;
  DatasetFilter cannabis;
  std::string language = "en";  // primary BCP-47 subtag
  std::vector<std::string> exclude_users;
  bool strict = false;  // abort on malformed lines instead of skipping
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t kept = 0;
  std::size_t bad_lines = 0;
  std::size_t dropped_language = 0;
  std::size_t dropped_date = 0;
  std::size_t dropped_keyword = 0;
  std::size_t dropped_location = 0;
  std::size_t dropped_excluded_user = 0;
  std::size_t dropped_empty_embedding = 0;
};

/// Reads JSON Lines tweet records and applies language, keyword, date and
/// location filters. Malformed lines are reported with their line number and
/// skipped (or abort the run in strict mode). Tweets whose text hits no
/// vocabulary token are flagged empty and dropped here so they cannot skew
/// user means.
std::vector<Tweet> ingest(const std::filesystem::path& jsonl_path, const IngestFilters& filters,
                          const Gazetteer& gazetteer, const EmbeddingTable& embeddings,
                          IngestStats* stats = nullptr, std::ostream* log = nullptr);

std::vector<UserRecord> build_users(const std::vector<Tweet>& tweets);

std::vector<std::string> load_blocklist(const std::filesystem::path& path, bool required = true);

/// Removes users whose id is on the blocklist; returns the removal count.
std::size_t filter_bots(std::vector<UserRecord>& users, const std::vector<std::string>& blocklist);

}  // namespace causeway::corpus
