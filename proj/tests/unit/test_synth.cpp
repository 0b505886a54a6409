#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "causeway/io.hpp"
#include "causeway/synth.hpp"

using namespace causeway;
using namespace causeway::synth;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p;
}

GeneratorSpec small_spec() {
  GeneratorSpec spec;
  spec.n_users = 80;
  spec.embedding_dim = 4;
  spec.n_annotations = 60;
  spec.seed = 7;
  return spec;
}

}  // namespace

TEST_CASE("generator validates infeasible specs") {
  auto bad = small_spec();
  bad.tau = 1.5;
  CHECK_THROWS_AS(generate(bad, temp_dir("synth_bad1")), Error);
  bad = small_spec();
  bad.gamma = -0.1;
  CHECK_THROWS_AS(generate(bad, temp_dir("synth_bad2")), Error);
  bad = small_spec();
  bad.tiers = {};
  bad.tiers.push_back({cohort::Policy::Illegal, 0.0, 0.0, {"ID"}});
  CHECK_THROWS_AS(generate(bad, temp_dir("synth_bad3")), Error);
  bad = small_spec();
  bad.tiers = default_tiers();
  bad.tiers[0].states.push_back("CA");  // treatment state inside a control tier
  CHECK_THROWS_AS(generate(bad, temp_dir("synth_bad4")), Error);
}

TEST_CASE("same seed produces byte-identical corpora") {
  const auto d1 = temp_dir("synth_det1");
  const auto d2 = temp_dir("synth_det2");
  generate(small_spec(), d1);
  generate(small_spec(), d2);
  for (const char* name : {"tweets.jsonl", "embeddings.txt", "policy.csv", "gazetteer.csv",
                           "stance_juul.csv", "stance_cannabis.csv", "ground_truth.json",
                           "true_propensity.csv"}) {
    CHECK(read_file(d1 / name) == read_file(d2 / name));
  }
  auto other = small_spec();
  other.seed = 8;
  const auto d3 = temp_dir("synth_det3");
  generate(other, d3);
  CHECK(read_file(d1 / "tweets.jsonl") != read_file(d3 / "tweets.jsonl"));
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
  std::filesystem::remove_all(d3);
}

TEST_CASE("generated dates stay inside the study window") {
  const auto dir = temp_dir("synth_dates");
  const auto spec = small_spec();
  generate(spec, dir);
  for (const auto& line : read_lines(dir / "tweets.jsonl")) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    const auto d = Date::parse(j.at("created_at").get<std::string>());
    REQUIRE(d.has_value());
    CHECK(*d >= spec.study_start);
    CHECK(*d <= spec.study_end);
    if (j.at("dataset") == "CANNABIS") CHECK(*d >= spec.legalization);
    else CHECK(*d < spec.legalization);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("ground truth quadrature sanity") {
  // gamma = 0, tau on the logit scale: ATE = sigmoid(b+tau) - sigmoid(b)
  GeneratorSpec spec = small_spec();
  spec.gamma = 0;
  spec.tau = 0.5;
  spec.tiers = default_tiers();
  const double got = quadrature_ate(spec, spec.tiers[0], 1);
  const double b = spec.base_logit;
  const double expect = 1.0 / (1.0 + std::exp(-(b + 0.5))) - 1.0 / (1.0 + std::exp(-b));
  CHECK(got == doctest::Approx(expect).epsilon(1e-9));

  // tau = 0 gives a zero effect at every horizon and tier
  spec.tau = 0;
  spec.gamma = 1.5;
  for (const auto& tier : spec.tiers)
    for (int n = 1; n <= 6; ++n) CHECK(quadrature_ate(spec, tier, n) == doctest::Approx(0.0));

  // confounding tilts the naive contrast away from zero while the ATE stays 0
  const auto dir = temp_dir("synth_truth");
  spec.n_users = 50;
  const auto corpus = generate(spec, dir);
  CHECK(corpus.truth.ate.at("C1")[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::fabs(corpus.truth.naive.at("C1")[5]) > 0.02);
  std::filesystem::remove_all(dir);
}

TEST_CASE("policy gradient fixture orders tier offsets") {
  GeneratorSpec spec = small_spec();
  spec.tau = 0.8;
  spec = policy_gradient_fixture(spec);
  double prev = -1;
  for (auto policy : {cohort::Policy::Illegal, cohort::Policy::MedicalLimitedThc,
                      cohort::Policy::Medical, cohort::Policy::Recreational}) {
    for (const auto& t : spec.tiers)
      if (t.policy == policy) {
        CHECK(t.outcome_offset >= prev);
        prev = t.outcome_offset;
      }
  }
  for (const auto& t : spec.tiers)
    if (t.policy == cohort::Policy::Recreational)
      CHECK(t.outcome_offset == doctest::Approx(spec.tau));
}

TEST_CASE("zero uptake spec emits no cannabis tweets") {
  auto spec = small_spec();
  spec.base_logit = -40;  // drives every uptake probability to zero
  const auto dir = temp_dir("synth_zero");
  const auto corpus = generate(spec, dir);
  for (const auto& line : read_lines(dir / "tweets.jsonl")) {
    if (line.empty()) continue;
    CHECK(nlohmann::json::parse(line).at("dataset") == "JUUL");
  }
  for (int n = 0; n < 6; ++n)
    CHECK(corpus.truth.ate.at("C1")[static_cast<std::size_t>(n)] ==
          doctest::Approx(0.0).epsilon(1e-6));
  std::filesystem::remove_all(dir);
}
