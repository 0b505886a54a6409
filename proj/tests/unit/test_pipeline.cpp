#include <doctest.h>

#include <fstream>

#include "causeway/io.hpp"
#include "causeway/pipeline.hpp"
#include "causeway/synth.hpp"

using namespace causeway;
using namespace causeway::pipeline;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

synth::GeneratorSpec micro_spec(std::uint64_t seed = 11) {
  synth::GeneratorSpec spec;
  spec.n_users = 120;
  spec.embedding_dim = 4;
  spec.n_annotations = 80;
  spec.gamma = 0.5;
  spec.tau = 0.5;
  spec.seed = seed;
  spec.retweet_share = 0.15;
  return spec;
}

RunConfig micro_config(const std::filesystem::path& corpus_dir, int n_sims = 3) {
  RunConfig c = RunConfig::from_ini(corpus_dir / "run_config.ini");
  c.n_sims = n_sims;
  c.min_group = 2;
  c.sample_k = 500;
  c.gbm_rounds = 20;
  return c;
}

}  // namespace

TEST_CASE("ini parsing maps sections and reports bad keys with a path") {
  const auto dir = temp_dir("pipe_ini");
  write_file(dir / "a.ini",
             "[estimate]\n"
             "n_sims = 7\n"
             "treatment_state = VT\n"
             "# comment line\n"
             "methods = iptw_lr, nnm\n");
  auto kv = parse_ini(dir / "a.ini");
  CHECK(kv.at("estimate.n_sims") == "7");
  const auto c = RunConfig::from_kv(kv, dir);
  CHECK(c.n_sims == 7);
  CHECK(c.treatment_state == "VT");
  CHECK(c.legalization_date == Date::from_ymd(2018, 7, 1));  // VT preset
  REQUIRE(c.methods.size() == 2);
  CHECK(c.methods[1] == causal::Method::Nnm);

  write_file(dir / "bad.ini", "[estimate]\nn_simz = 7\n");
  CHECK_THROWS_WITH_AS(RunConfig::from_kv(parse_ini(dir / "bad.ini"), dir),
                       doctest::Contains("estimate.n_simz"), Error);
  write_file(dir / "bad2.ini", "[estimate]\nn_sims = many\n");
  CHECK_THROWS_AS(RunConfig::from_kv(parse_ini(dir / "bad2.ini"), dir), Error);
  write_file(dir / "bad3.ini", "[estimate]\ntreatment_state = TX\n");
  CHECK_THROWS_WITH_AS(RunConfig::from_kv(parse_ini(dir / "bad3.ini"), dir),
                       doctest::Contains("legalization_date"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config hash is stable and sensitive") {
  const auto dir = temp_dir("pipe_hash");
  write_file(dir / "a.ini", "[estimate]\nn_sims = 7\n");
  const auto c1 = RunConfig::from_kv(parse_ini(dir / "a.ini"), dir);
  const auto c2 = RunConfig::from_kv(parse_ini(dir / "a.ini"), dir);
  CHECK(c1.config_hash() == c2.config_hash());
  auto c3 = c1;
  c3.n_sims = 8;
  CHECK(c1.config_hash() != c3.config_hash());
  std::filesystem::remove_all(dir);
}

TEST_CASE("full pipeline runs on a synthetic micro corpus") {
  const auto corpus_dir = temp_dir("pipe_corpus");
  synth::generate(micro_spec(), corpus_dir);
  const auto cfg = micro_config(corpus_dir);
  const auto work = temp_dir("pipe_work");
  const auto result = run_full(cfg, work);

  CHECK(std::filesystem::exists(work / "ingest" / "tweets.jsonl"));
  CHECK(std::filesystem::exists(work / "weaklabel" / "retained_users.txt"));
  CHECK(std::filesystem::exists(work / "stance" / "stance_model_juul.json"));
  CHECK(std::filesystem::exists(work / "estimate" / "sims.csv"));
  CHECK(std::filesystem::exists(work / "report" / "ate_report.csv"));

  // at least the C1 contrast produced simulations at every horizon
  bool found = false;
  for (const auto& [key, agg] : result.cells)
    if (key.group == cohort::Group::C1 && !agg.sims.empty()) found = true;
  CHECK(found);
  std::filesystem::remove_all(corpus_dir);
  std::filesystem::remove_all(work);
}

TEST_CASE("staged commands chain through manifests and detect staleness") {
  const auto corpus_dir = temp_dir("pipe_stage_corpus");
  synth::generate(micro_spec(17), corpus_dir);
  const auto cfg = micro_config(corpus_dir, 2);
  const auto work = temp_dir("pipe_stage_work");

  // estimate before ingest fails with a stage name
  CHECK_THROWS_WITH_AS(cmd_weaklabel(cfg, work), doctest::Contains("ingest"), Error);

  cmd_ingest(cfg, work);
  cmd_weaklabel(cfg, work);
  cmd_stance(cfg, work);
  cmd_estimate(cfg, work);
  cmd_report(cfg, work);
  CHECK(std::filesystem::exists(work / "report" / "plot_data.csv"));

  // a changed config makes downstream stages refuse stale artifacts
  auto cfg2 = cfg;
  cfg2.n_sims = 5;
  CHECK_THROWS_WITH_AS(cmd_estimate(cfg2, work), doctest::Contains("different configuration"),
                       Error);
  std::filesystem::remove_all(corpus_dir);
  std::filesystem::remove_all(work);
}

TEST_CASE("same seed twice produces byte-identical reports") {
  const auto corpus_dir = temp_dir("pipe_det_corpus");
  synth::generate(micro_spec(23), corpus_dir);
  const auto cfg = micro_config(corpus_dir);
  const auto w1 = temp_dir("pipe_det_w1");
  const auto w2 = temp_dir("pipe_det_w2");
  run_full(cfg, w1);
  run_full(cfg, w2);
  for (const char* rel : {"report/ate_report.csv", "report/plot_data.csv",
                          "report/balance_report.csv", "estimate/sims.csv"}) {
    CHECK(read_file(w1 / rel) == read_file(w2 / rel));
  }
  std::filesystem::remove_all(corpus_dir);
  std::filesystem::remove_all(w1);
  std::filesystem::remove_all(w2);
}

TEST_CASE("retweet exclusion never grows the population") {
  const auto corpus_dir = temp_dir("pipe_rt_corpus");
  synth::generate(micro_spec(29), corpus_dir);
  auto cfg = micro_config(corpus_dir, 2);
  const auto w_in = temp_dir("pipe_rt_in");
  const auto w_out = temp_dir("pipe_rt_out");
  const auto with_rt = run_full(cfg, w_in);
  cfg.include_retweets = false;
  const auto without_rt = run_full(cfg, w_out);

  for (auto g : {cohort::Group::Treatment, cohort::Group::C1, cohort::Group::C2,
                 cohort::Group::C3, cohort::Group::C4}) {
    const auto a = with_rt.mean_group_size.find(g);
    const auto b = without_rt.mean_group_size.find(g);
    if (a != with_rt.mean_group_size.end() && b != without_rt.mean_group_size.end())
      CHECK(b->second <= a->second + 1e-9);
  }
  std::filesystem::remove_all(corpus_dir);
  std::filesystem::remove_all(w_in);
  std::filesystem::remove_all(w_out);
}

TEST_CASE("external scores feed LF4 when the column is configured") {
  const auto corpus_dir = temp_dir("pipe_ext_corpus");
  synth::generate(micro_spec(37), corpus_dir);
  auto cfg = micro_config(corpus_dir, 2);

  auto ing = run_ingest(cfg);
  REQUIRE(!ing.tweets.empty());
  // Scores above 0.6 vote Personal, below 0.1 NonPersonal.
  std::ostringstream scores;
  scores << "tweet_id,score\n";
  for (std::size_t i = 0; i < ing.tweets.size(); ++i)
    scores << ing.tweets[i].id << ',' << (i % 2 ? "0.95" : "0.05") << '\n';
  write_file(corpus_dir / "external_scores.csv", scores.str());
  cfg.external_scores = corpus_dir / "external_scores.csv";

  auto tweets = ing.tweets;
  const auto wl = run_weaklabel(cfg, tweets);
  CHECK(wl.stats.at("external_scores").get<bool>());
  // LF4 now has real signal, so its accuracy moved off the 0.7 start.
  CHECK(wl.label_model.no_signal_lfs.empty());
  std::filesystem::remove_all(corpus_dir);
}

TEST_CASE("sensitivity grid emits five methods times two retweet cells") {
  const auto corpus_dir = temp_dir("pipe_sens_corpus");
  synth::generate(micro_spec(31), corpus_dir);
  auto cfg = micro_config(corpus_dir, 2);
  const auto work = temp_dir("pipe_sens_work");
  run_full_sensitivity(cfg, work);
  const auto summary = read_file(work / "sensitivity" / "sensitivity_summary.csv");
  for (const char* m : {"nnm", "psm_lr", "psm_gbm", "iptw_lr", "iptw_gbm"})
    CHECK(summary.find(m) != std::string::npos);
  CHECK(summary.find("included") != std::string::npos);
  CHECK(summary.find("excluded") != std::string::npos);
  CHECK(std::filesystem::exists(work / "sensitivity" / "retweets_included" / "sims.csv"));
  CHECK(std::filesystem::exists(work / "sensitivity" / "retweets_excluded" / "balance_report.csv"));
  std::filesystem::remove_all(corpus_dir);
  std::filesystem::remove_all(work);
}
