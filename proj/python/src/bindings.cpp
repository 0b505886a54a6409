#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "causeway/causal.hpp"
#include "causeway/io.hpp"
#include "causeway/classify.hpp"
#include "causeway/metrics.hpp"
#include "causeway/pipeline.hpp"
#include "causeway/stance.hpp"
#include "causeway/synth.hpp"
#include "causeway/weaklabel.hpp"

namespace py = pybind11;
using namespace causeway;

namespace {

synth::GeneratorSpec spec_from_kwargs(std::size_t n_users, int embedding_dim, double tau,
                                      double gamma, double stance_noise, std::uint64_t seed,
                                      bool everyone_posts_outcome, bool policy_gradient) {
  synth::GeneratorSpec spec;
  spec.n_users = n_users;
  spec.embedding_dim = embedding_dim;
  spec.tau = tau;
  spec.gamma = gamma;
  spec.stance_noise = stance_noise;
  spec.seed = seed;
  spec.everyone_posts_outcome = everyone_posts_outcome;
  if (policy_gradient) spec = synth::policy_gradient_fixture(spec);
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "observational causal-effect pipeline: estimators, learners, metrics";
  m.attr("__version__") = pipeline::kToolVersion;

  py::register_exception<Error>(m, "CausewayError");

  // ---- metrics ----
  auto metrics_mod = m.def_submodule("metrics");
  metrics_mod.def("binary_auc", &metrics::binary_auc, py::arg("scores"), py::arg("labels"));
  metrics_mod.def(
      "evaluate_classifier",
      [](const std::vector<int>& y_true, const std::vector<std::vector<double>>& y_prob) {
        const auto ev = metrics::evaluate_classifier(y_true, y_prob);
        py::dict d;
        d["macro_f1"] = ev.macro_f1;
        d["weighted_auc"] = ev.weighted_auc;
        d["micro_auc"] = ev.micro_auc;
        d["cross_entropy"] = ev.cross_entropy;
        d["skipped_auc_classes"] = ev.skipped_auc_classes;
        return d;
      },
      py::arg("y_true"), py::arg("y_prob"));
  metrics_mod.def("krippendorff_alpha", &metrics::krippendorff_alpha, py::arg("annotations"),
                  "nominal-data alpha; -1 marks a missing annotation");
  metrics_mod.def("observed_agreement", &metrics::observed_agreement, py::arg("annotations"));

  // ---- classify ----
  auto classify_mod = m.def_submodule("classify");
  py::class_<classify::LinearModel>(classify_mod, "LinearModel")
      .def_readonly("n_classes", &classify::LinearModel::n_classes)
      .def_readonly("weights", &classify::LinearModel::weights)
      .def_readonly("bias", &classify::LinearModel::bias)
      .def_readonly("converged", &classify::LinearModel::converged)
      .def_readonly("iterations", &classify::LinearModel::iterations)
      .def("predict_proba", &classify::LinearModel::predict_proba, py::arg("x"));
  py::class_<classify::BoostedModel>(classify_mod, "BoostedModel")
      .def_readonly("learning_rate", &classify::BoostedModel::learning_rate)
      .def_readonly("init_log_odds", &classify::BoostedModel::init_log_odds)
      .def_readonly("train_loss", &classify::BoostedModel::train_loss)
      .def("predict_proba", &classify::BoostedModel::predict_proba, py::arg("x"));
  classify_mod.def(
      "fit_logistic",
      [](const classify::Mat& X, const std::vector<int>& y, const std::string& class_weight,
         double C, const classify::Vec& sample_weights) {
        classify::LogisticOptions opt;
        opt.C = C;
        if (class_weight == "balanced") opt.class_weight = classify::ClassWeightMode::Balanced;
        else if (class_weight != "none")
          throw Error("class_weight must be 'balanced' or 'none'");
        opt.sample_weights = sample_weights;
        return classify::fit_logistic(X, y, opt);
      },
      py::arg("X"), py::arg("y"), py::arg("class_weight") = "none", py::arg("C") = 1.0,
      py::arg("sample_weights") = classify::Vec{});
  classify_mod.def(
      "fit_gbm",
      [](const classify::Mat& X, const std::vector<int>& y, int rounds, int depth,
         double learning_rate, const classify::Vec& sample_weights) {
        classify::GbmOptions opt;
        opt.rounds = rounds;
        opt.depth = depth;
        opt.learning_rate = learning_rate;
        opt.sample_weights = sample_weights;
        return classify::fit_gbm(X, y, opt);
      },
      py::arg("X"), py::arg("y"), py::arg("rounds") = 100, py::arg("depth") = 3,
      py::arg("learning_rate") = 0.1, py::arg("sample_weights") = classify::Vec{});

  // ---- causal ----
  auto causal_mod = m.def_submodule("causal");
  causal_mod.def("cosine_distance", &causal::cosine_distance, py::arg("x"), py::arg("y"));
  causal_mod.def(
      "nnm_match",
      [](const causal::Mat& treated, const causal::Mat& controls, const std::string& metric) {
        const auto m2 = causal::nnm_match(treated, controls,
                                          metric == "euclidean"
                                              ? causal::NnmMetric::SquaredEuclidean
                                              : causal::NnmMetric::Cosine);
        return std::make_pair(m2.pairs, m2.distances);
      },
      py::arg("treated"), py::arg("controls"), py::arg("metric") = "cosine");
  causal_mod.def(
      "fit_propensity",
      [](const causal::Mat& X, const std::vector<int>& treated, const std::string& model) {
        causal::PropensityOptions opt;
        opt.model = model == "gbm" ? causal::PropensityModel::GBM : causal::PropensityModel::LR;
        return causal::fit_propensity(X, treated, opt);
      },
      py::arg("X"), py::arg("treated"), py::arg("model") = "lr");
  causal_mod.def(
      "iptw_weights",
      [](const causal::Vec& e, const std::vector<int>& treated, double lo, double hi) {
        const auto tw = causal::iptw_weights(e, treated, lo, hi);
        py::dict d;
        d["weights"] = tw.weights;
        d["kept"] = tw.kept;
        d["n_trimmed"] = tw.n_trimmed;
        return d;
      },
      py::arg("e"), py::arg("treated"), py::arg("lo") = 0.05, py::arg("hi") = 0.95);
  causal_mod.def(
      "ate_iptw",
      [](const causal::Vec& e, const std::vector<int>& treated, const causal::Vec& y, double lo,
         double hi) {
        return causal::ate_iptw(causal::iptw_weights(e, treated, lo, hi), treated, y);
      },
      py::arg("e"), py::arg("treated"), py::arg("y"), py::arg("lo") = 0.05, py::arg("hi") = 0.95);
  causal_mod.def(
      "ate_matched",
      [](const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
         const causal::Vec& y_treated, const causal::Vec& y_control) {
        causal::MatchResult mr;
        mr.pairs = pairs;
        return causal::ate_matched(mr, y_treated, y_control);
      },
      py::arg("pairs"), py::arg("y_treated"), py::arg("y_control"));
  causal_mod.def(
      "asmd",
      [](const causal::Vec& treated, const causal::Vec& control,
         const std::optional<causal::Vec>& wt, const std::optional<causal::Vec>& wc) {
        return causal::asmd(treated, control, wt ? &*wt : nullptr, wc ? &*wc : nullptr);
      },
      py::arg("treated"), py::arg("control"), py::arg("treated_weights") = std::nullopt,
      py::arg("control_weights") = std::nullopt);
  causal_mod.def(
      "summarize_ci",
      [](const causal::Vec& sims, const std::string& mode) {
        const auto md = causal::ci_mode_from(mode);
        if (!md) throw Error("mode must be paper_literal or standard_error");
        const auto s = causal::summarize_ci(sims, *md);
        py::dict d;
        d["mean"] = s.mean;
        d["sd"] = s.sd;
        d["n_sims"] = s.n_sims;
        d["ci_lo"] = s.ci_lo;
        d["ci_hi"] = s.ci_hi;
        return d;
      },
      py::arg("per_sim_ates"), py::arg("mode") = "paper_literal");

  // ---- stance ----
  auto stance_mod = m.def_submodule("stance");
  stance_mod.def(
      "sample_stance",
      [](const std::array<double, 3>& p, double u) {
        return static_cast<int>(stance::sample_stance(p, u));
      },
      py::arg("p_s"), py::arg("u"), "returns the polarity: +1 in favor, -1 against, 0 neither");
  stance_mod.def(
      "user_polarity",
      [](const std::vector<int>& polarities) {
        std::vector<stance::StanceLabel> labels;
        for (int p : polarities) {
          if (p != 1 && p != -1 && p != 0) throw Error("polarities must be +1/-1/0");
          labels.push_back(static_cast<stance::StanceLabel>(p));
        }
        const auto us = stance::user_polarity(labels);
        py::dict d;
        d["polarity_sum"] = us.polarity_sum;
        d["verdict"] = us.verdict;
        d["empty"] = us.empty_flag;
        return d;
      },
      py::arg("polarities"));

  // ---- weak supervision ----
  auto weak_mod = m.def_submodule("weaklabel");
  weak_mod.def(
      "domain_select",
      [](const classify::Mat& source, const classify::Mat& target, std::size_t k) {
        return weaklabel::domain_select(source, target, k);
      },
      py::arg("source"), py::arg("target"), py::arg("k"));

  // ---- synth + pipeline ----
  auto synth_mod = m.def_submodule("synth");
  synth_mod.def(
      "generate",
      [](const std::filesystem::path& out_dir, std::size_t n_users, int embedding_dim, double tau,
         double gamma, double stance_noise, std::uint64_t seed, bool everyone_posts_outcome,
         bool policy_gradient) {
        const auto spec = spec_from_kwargs(n_users, embedding_dim, tau, gamma, stance_noise, seed,
                                           everyone_posts_outcome, policy_gradient);
        const auto corpus = synth::generate(spec, out_dir);
        py::dict d;
        d["dir"] = corpus.dir;
        d["n_tweets"] = corpus.n_tweets;
        py::dict truth;
        for (const auto& [label, arr] : corpus.truth.ate) truth[label.c_str()] = arr;
        d["true_ate"] = truth;
        return d;
      },
      py::arg("out_dir"), py::arg("n_users") = 500, py::arg("embedding_dim") = 8,
      py::arg("tau") = 0.0, py::arg("gamma") = 0.0, py::arg("stance_noise") = 0.0,
      py::arg("seed") = 1, py::arg("everyone_posts_outcome") = false,
      py::arg("policy_gradient") = false);

  auto pipeline_mod = m.def_submodule("pipeline");
  pipeline_mod.def(
      "run_full",
      [](const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
         std::optional<int> n_sims, std::optional<std::uint64_t> seed) {
        auto cfg = pipeline::RunConfig::from_ini(config_path);
        if (n_sims) cfg.n_sims = *n_sims;
        if (seed) cfg.master_seed = *seed;
        cfg.min_group = 2;
        const auto result = pipeline::run_full(cfg, out_dir);
        py::dict cells;
        for (const auto& [key, agg] : result.cells) {
          if (agg.sims.size() < 2) continue;
          const auto s = causal::summarize_ci(agg.sims, cfg.ci_mode);
          py::tuple k = py::make_tuple(causal::method_name(key.method),
                                       cohort::group_name(key.group), key.horizon);
          py::dict v;
          v["ate_mean"] = s.mean;
          v["ate_sd"] = s.sd;
          v["ci_lo"] = s.ci_lo;
          v["ci_hi"] = s.ci_hi;
          v["n_treated"] = agg.mean_n_treated;
          v["n_control"] = agg.mean_n_control;
          cells[k] = v;
        }
        return cells;
      },
      py::arg("config_path"), py::arg("out_dir"), py::arg("n_sims") = std::nullopt,
      py::arg("seed") = std::nullopt);
}
