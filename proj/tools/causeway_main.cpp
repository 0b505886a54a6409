#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "causeway/io.hpp"
#include "causeway/pipeline.hpp"
#include "causeway/synth.hpp"

namespace {

using causeway::pipeline::RunConfig;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<long long> seed;
  std::optional<std::string> treatment_state;
  std::optional<int> n_sims;
  std::optional<std::string> methods;
  std::optional<std::string> ci_mode;
  std::optional<bool> include_retweets;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "run configuration (INI)");
  if (config_required) opt->required();
  cmd->add_option("--out-dir", args.out_dir, "artifact root directory");
  cmd->add_option("--seed", args.seed, "override estimate.master_seed");
  cmd->add_option("--treatment-state", args.treatment_state, "override estimate.treatment_state");
  cmd->add_option("--n-sims", args.n_sims, "override estimate.n_sims");
  cmd->add_option("--methods", args.methods, "override estimate.methods (comma separated)");
  cmd->add_option("--ci-mode", args.ci_mode, "paper_literal | standard_error");
  cmd->add_option("--include-retweets", args.include_retweets,
                  "override estimate.include_retweets");
}

RunConfig load_config(const CommonArgs& args) {
  RunConfig c = RunConfig::from_ini(args.config_path);
  if (args.seed) c.master_seed = static_cast<std::uint64_t>(*args.seed);
  if (args.treatment_state) {
    c.treatment_state = *args.treatment_state;
    const auto d = causeway::pipeline::default_legalization_date(c.treatment_state);
    if (d) c.legalization_date = *d;
  }
  if (args.n_sims) c.n_sims = *args.n_sims;
  if (args.methods) {
    c.methods.clear();
    std::string cur;
    for (char ch : *args.methods + ",") {
      if (ch == ',') {
        if (!cur.empty()) {
          const auto m = causeway::causal::method_from(cur);
          if (!m) throw causeway::Error("unknown method '" + cur + "'");
          c.methods.push_back(*m);
          cur.clear();
        }
      } else if (ch != ' ') {
        cur.push_back(ch);
      }
    }
  }
  if (args.ci_mode) {
    const auto m = causeway::causal::ci_mode_from(*args.ci_mode);
    if (!m) throw causeway::Error("--ci-mode must be paper_literal or standard_error");
    c.ci_mode = *m;
  }
  if (args.include_retweets) c.include_retweets = *args.include_retweets;
  c.validate();
  return c;
}

struct SynthArgs {
  std::string preset = "confounded";
  std::string out_dir = "corpus";
  std::string config_path;  // optional: overrides appended to run_config.ini
  long long seed = 1;
  long long n_users = -1;
  double tau = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  int dim = -1;
  int n_annotations = -1;
};

// Appends the user's non-[paths] sections to the generated run_config.ini;
// later keys win when the config is parsed, so user settings override the
// generated defaults while the corpus paths stay intact.
void merge_user_config(const std::filesystem::path& run_config,
                       const std::filesystem::path& user_config) {
  std::istringstream in(causeway::read_file(user_config));
  std::ostringstream keep;
  std::string line, section;
  while (std::getline(in, line)) {
    std::string t = line;
    while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.erase(t.begin());
    if (!t.empty() && t.front() == '[') section = t;
    if (section == "[paths]") continue;
    keep << line << '\n';
  }
  causeway::write_file(run_config,
                       causeway::read_file(run_config) + "\n# user overrides\n" + keep.str());
}

causeway::synth::GeneratorSpec preset_spec(const SynthArgs& args) {
  causeway::synth::GeneratorSpec spec;
  spec.seed = static_cast<std::uint64_t>(args.seed);
  if (args.preset == "confounded") {
    spec.n_users = 5000;
    spec.embedding_dim = 25;
    spec.gamma = 1.5;
    spec.tau = 0.15;
    spec.stance_noise = 0.0;
  } else if (args.preset == "null") {
    spec.n_users = 1000;
    spec.embedding_dim = 8;
    spec.gamma = 0.0;
    spec.tau = 0.0;
    spec.stance_noise = 0.3;
    spec.everyone_posts_outcome = true;
    spec.tiers = {{causeway::cohort::Policy::Illegal, 0.5, 0.0, {"ID", "KS", "NE", "SD"}}};
    spec.treatment_share = 0.5;
  } else if (args.preset == "policy-gradient") {
    spec.n_users = 2000;
    spec.embedding_dim = 8;
    spec.gamma = 0.8;
    spec.tau = 1.0;
    spec.stance_noise = 0.0;
    spec = causeway::synth::policy_gradient_fixture(spec);
  } else {
    throw causeway::Error("unknown synth preset '" + args.preset +
                          "' (confounded | null | policy-gradient)");
  }
  if (args.n_users > 0) spec.n_users = static_cast<std::size_t>(args.n_users);
  if (!std::isnan(args.tau)) spec.tau = args.tau;
  if (!std::isnan(args.gamma)) spec.gamma = args.gamma;
  if (args.dim > 0) spec.embedding_dim = args.dim;
  if (args.n_annotations > 0) spec.n_annotations = static_cast<std::size_t>(args.n_annotations);
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"observational causal-effect pipeline for social-media stance data"};
  app.require_subcommand(1);

  CommonArgs args;
  SynthArgs synth_args;

  auto* c_ingest = app.add_subcommand("ingest", "filter tweet records, embed, aggregate users");
  auto* c_weak = app.add_subcommand("weaklabel", "weakly supervised personal-tweet filtering");
  auto* c_stance = app.add_subcommand("stance", "train stance classifiers, fill probabilities");
  auto* c_estimate = app.add_subcommand("estimate", "simulate and estimate treatment effects");
  auto* c_sens = app.add_subcommand("sensitivity", "estimator grid with retweet toggle");
  auto* c_report = app.add_subcommand("report", "summarize simulations into report CSVs");
  auto* c_full = app.add_subcommand("full", "run ingest through report in one pass");
  for (auto* cmd : {c_ingest, c_weak, c_stance, c_estimate, c_sens, c_report, c_full})
    add_common(cmd, args);

  auto* c_synth = app.add_subcommand("synth", "generate a synthetic corpus with known effects");
  c_synth->add_option("--preset", synth_args.preset, "confounded | null | policy-gradient");
  c_synth->add_option("--out-dir", synth_args.out_dir, "corpus output directory");
  c_synth->add_option("--config", synth_args.config_path,
                      "optional run config whose non-path settings are merged into the "
                      "emitted run_config.ini");
  c_synth->add_option("--seed", synth_args.seed, "generator seed");
  c_synth->add_option("--n-users", synth_args.n_users, "override user count");
  c_synth->add_option("--tau", synth_args.tau, "override treatment effect (logit scale)");
  c_synth->add_option("--gamma", synth_args.gamma, "override confounding strength");
  c_synth->add_option("--dim", synth_args.dim, "override embedding dimension");
  c_synth->add_option("--n-annotations", synth_args.n_annotations,
                      "override stance annotation count per dataset");

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "synth") {
      const auto spec = preset_spec(synth_args);
      const auto corpus = causeway::synth::generate(spec, synth_args.out_dir);
      if (!synth_args.config_path.empty())
        merge_user_config(corpus.dir / "run_config.ini", synth_args.config_path);
      nlohmann::json j = {{"corpus_dir", corpus.dir.string()},
                          {"n_tweets", corpus.n_tweets},
                          {"run_config", (corpus.dir / "run_config.ini").string()}};
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    const RunConfig config = load_config(args);
    const std::filesystem::path out(args.out_dir);
    if (name == "ingest") causeway::pipeline::cmd_ingest(config, out);
    else if (name == "weaklabel") causeway::pipeline::cmd_weaklabel(config, out);
    else if (name == "stance") causeway::pipeline::cmd_stance(config, out);
    else if (name == "estimate") causeway::pipeline::cmd_estimate(config, out);
    else if (name == "sensitivity") causeway::pipeline::cmd_sensitivity(config, out);
    else if (name == "report") causeway::pipeline::cmd_report(config, out);
    else if (name == "full") causeway::pipeline::run_full(config, out);
    std::cout << nlohmann::json({{"command", name}, {"out_dir", args.out_dir}}).dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", e.what()}, {"command", name}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
