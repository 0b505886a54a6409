#include <doctest.h>

#include <fstream>

#include "causeway/corpus.hpp"
#include "causeway/io.hpp"

using namespace causeway;
using namespace causeway::corpus;

namespace {

Gazetteer test_gazetteer() {
  Gazetteer g;
  g.add("California", "CA", "name");
  g.add("New York", "NY", "name");
  g.add("Maine", "ME", "name");
  g.add("Illinois", "IL", "name");
  g.add("Washington", "WA", "name");
  g.add("CA", "CA", "abbrev");
  g.add("NY", "NY", "abbrev");
  g.add("ME", "ME", "abbrev");
  g.add("IL", "IL", "abbrev");
  g.add("Chicago", "IL", "city");
  g.add("Portland", "OR", "city");
  g.add("Washington", "DC", "city");
  return g;
}

EmbeddingTable tiny_table() {
  EmbeddingTable t;
  t.insert("juul", {1.0, 0.0});
  t.insert("weed", {0.0, 1.0});
  t.insert("love", {2.0, 2.0});
  return t;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("parse_location precedence and matching rules") {
  const auto g = test_gazetteer();
  CHECK(*parse_location("California", g) == "CA");
  CHECK(!parse_location("somewhere on earth", g));
  CHECK(*parse_location("Chicago, IL", g) == "IL");
  // abbreviation beats the city of another state
  CHECK(*parse_location("Portland, ME", g) == "ME");
  // lowercase two-letter tokens are English words, not abbreviations
  CHECK(!parse_location("me and my dog", g));
  // state name beats a city with the same pattern
  CHECK(*parse_location("Washington", g) == "WA");
  // city alone resolves
  CHECK(*parse_location("portland", g) == "OR");
  // multiword state name as a token sequence
  CHECK(*parse_location("new york city vibes", g) == "NY");
  // determinism
  for (int i = 0; i < 5; ++i) CHECK(*parse_location("Chicago, IL", g) == "IL");
}

TEST_CASE("embed_text averages in-vocabulary tokens") {
  const auto t = tiny_table();
  auto r = embed_text("JUUL", t);
  CHECK(!r.empty);
  CHECK(r.vec == std::vector<double>{1.0, 0.0});
  r = embed_text("juul weed", t);
  CHECK(r.vec[0] == doctest::Approx(0.5));
  CHECK(r.vec[1] == doctest::Approx(0.5));
  r = embed_text("zzqx9 qqpl0", t);
  CHECK(r.empty);
  // URLs and mentions stripped before lookup
  r = embed_text("@friend juul https://love.example", t);
  CHECK(r.vec == std::vector<double>{1.0, 0.0});
}

TEST_CASE("keyword filter token and substring modes") {
  const KeywordFilter tok({"juul", "mary jane"}, KeywordFilter::Mode::Token);
  CHECK(tok.matches("my JUUL died"));
  CHECK(tok.matches("pure Mary Jane vibes"));
  CHECK(!tok.matches("juuling all day"));  // whole-token mode
  const KeywordFilter sub({"juul"}, KeywordFilter::Mode::Substring);
  CHECK(sub.matches("juuling all day"));
}

TEST_CASE("ingest applies language, keyword, date and location filters") {
  const auto path = temp_path("causeway_ingest.jsonl");
  std::ofstream out(path);
  const char* lines[] = {
      // kept: JUUL keyword, english, in range, known location
      R"({"id":"1","user_id":"u1","created_at":"2017-05-01","text":"my juul died","lang":"en","user_location":"California","is_retweet":false,"dataset":"JUUL"})",
      // dropped: spanish
      R"({"id":"2","user_id":"u1","created_at":"2017-05-01","text":"mi juul","lang":"es","user_location":"California","is_retweet":false,"dataset":"JUUL"})",
      // dropped: out of the JUUL window
      R"({"id":"3","user_id":"u1","created_at":"2015-05-01","text":"my juul died","lang":"en","user_location":"California","is_retweet":false,"dataset":"JUUL"})",
      // dropped: no keyword
      R"({"id":"4","user_id":"u1","created_at":"2017-05-01","text":"nothing to see","lang":"en","user_location":"California","is_retweet":false,"dataset":"JUUL"})",
      // dropped: unknown location
      R"({"id":"5","user_id":"u2","created_at":"2017-05-01","text":"my juul died","lang":"en","user_location":"mars","is_retweet":false,"dataset":"JUUL"})",
      // kept: cannabis within its wider window
      R"({"id":"6","user_id":"u3","created_at":"2015-03-01","text":"weed is legal","lang":"en","user_location":"NY","is_retweet":true,"dataset":"CANNABIS"})",
      // dropped: excluded brand account
      R"({"id":"7","user_id":"brand","created_at":"2017-05-01","text":"my juul died","lang":"en","user_location":"California","is_retweet":false,"dataset":"JUUL"})",
      // malformed JSON
      "{not json",
  };
  for (const auto* l : lines) out << l << "\n";
  out.close();

  IngestFilters f;
  f.juul = {KeywordFilter({"juul"}), Date::from_ymd(2016, 1, 1), Date::from_ymd(2018, 12, 31)};
  f.cannabis = {KeywordFilter({"weed"}), Date::from_ymd(2014, 1, 1), Date::from_ymd(2018, 12, 31)};
  f.exclude_users = {"brand"};
  IngestStats st;
  const auto tweets = ingest(path, f, test_gazetteer(), tiny_table(), &st);
  REQUIRE(tweets.size() == 2);
  CHECK(tweets[0].id == "1");
  CHECK(tweets[0].state == "CA");
  CHECK(tweets[0].dataset == Dataset::Juul);
  CHECK(tweets[1].id == "6");
  CHECK(tweets[1].is_retweet);
  CHECK(st.bad_lines == 1);
  CHECK(st.dropped_language == 1);
  CHECK(st.dropped_date == 1);
  CHECK(st.dropped_keyword == 1);
  CHECK(st.dropped_location == 1);
  CHECK(st.dropped_excluded_user == 1);

  f.strict = true;
  CHECK_THROWS_AS(ingest(path, f, test_gazetteer(), tiny_table()), Error);
  std::filesystem::remove(path);
}

TEST_CASE("ingest filters are idempotent on already filtered output") {
  const auto path = temp_path("causeway_idem.jsonl");
  {
    std::ofstream out(path);
    out << R"({"id":"1","user_id":"u1","created_at":"2017-05-01","text":"my juul died","lang":"en","user_location":"CA","is_retweet":false,"dataset":"JUUL"})"
        << "\n";
  }
  IngestFilters f;
  f.juul = {KeywordFilter({"juul"}), Date::from_ymd(2016, 1, 1), Date::from_ymd(2018, 12, 31)};
  f.cannabis = {KeywordFilter({"weed"}), Date::from_ymd(2014, 1, 1), Date::from_ymd(2018, 12, 31)};
  const auto g = test_gazetteer();
  const auto table = tiny_table();
  const auto first = ingest(path, f, g, table);
  REQUIRE(first.size() == 1);

  // Re-serialize the kept tweet as an input record and ingest again.
  const auto path2 = temp_path("causeway_idem2.jsonl");
  {
    std::ofstream out(path2);
    out << R"({"id":"1","user_id":"u1","created_at":"2017-05-01","text":"my juul died","lang":"en","user_location":"CA","is_retweet":false,"dataset":"JUUL"})"
        << "\n";
  }
  const auto second = ingest(path2, f, g, table);
  REQUIRE(second.size() == 1);
  CHECK(second[0].id == first[0].id);
  CHECK(second[0].embedding == first[0].embedding);
  std::filesystem::remove(path);
  std::filesystem::remove(path2);
}

TEST_CASE("build_users aggregates means and first dates") {
  Tweet a;
  a.id = "1";
  a.user_id = "u";
  a.date = Date::from_ymd(2017, 3, 1);
  a.embedding = {2.0, 0.0};
  a.dataset = Dataset::Juul;
  Tweet b = a;
  b.id = "2";
  b.date = Date::from_ymd(2016, 5, 2);
  b.embedding = {0.0, 2.0};
  Tweet c = a;
  c.id = "3";
  c.user_id = "v";
  c.dataset = Dataset::Cannabis;
  c.embedding = {4.0, 4.0};

  const auto users = build_users({a, b, c});
  REQUIRE(users.size() == 2);
  const auto& u = users[0].id == "u" ? users[0] : users[1];
  const auto& v = users[0].id == "v" ? users[0] : users[1];
  CHECK(u.mean_embedding[0] == doctest::Approx(1.0));
  CHECK(u.mean_embedding[1] == doctest::Approx(1.0));
  CHECK(*u.first_juul == Date::from_ymd(2016, 5, 2));
  CHECK(!u.first_cannabis);
  CHECK(*v.first_cannabis == Date::from_ymd(2017, 3, 1));
  CHECK(!v.first_juul);

  // mean-embedding linearity: identical vectors average to themselves
  Tweet d = a;
  d.id = "4";
  const auto same = build_users({a, d});
  CHECK(same[0].mean_embedding == a.embedding);
}

TEST_CASE("filter_bots removes exactly the listed users") {
  std::vector<UserRecord> users(3);
  users[0].id = "a";
  users[1].id = "b";
  users[2].id = "c";
  auto copy = users;
  CHECK(filter_bots(copy, {}) == 0);
  CHECK(copy.size() == 3);
  copy = users;
  CHECK(filter_bots(copy, {"b"}) == 1);
  CHECK(copy.size() == 2);
  copy = users;
  CHECK(filter_bots(copy, {"zz", "yy"}) == 0);

  CHECK_THROWS_AS(load_blocklist(temp_path("missing_blocklist.txt"), true), Error);
  CHECK(load_blocklist(temp_path("missing_blocklist.txt"), false).empty());
}

TEST_CASE("shipped gazetteer and policy table load cleanly") {
  const auto g = Gazetteer::load_csv(std::filesystem::path(TEST_DATA_DIR) / "gazetteer.csv");
  CHECK(g.size() > 200);
  CHECK(*parse_location("California", g) == "CA");
  CHECK(*parse_location("Burlington", g) == "VT");
  CHECK(!parse_location("nowhere special", g));
}
