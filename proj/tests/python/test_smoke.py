"""Smoke tests for the python bindings: spot-check the main operations
against numpy re-implementations and run a miniature end-to-end pipeline."""

import math
import os
import subprocess
import tempfile

import numpy as np
import pytest

import causeway


def test_version_and_modules():
    assert causeway.__version__
    for mod in ("causal", "classify", "metrics", "pipeline", "stance", "synth"):
        assert hasattr(causeway, mod)


def test_metrics_against_hand_values():
    auc = causeway.metrics.binary_auc([0.9, 0.8, 0.4, 0.3], [1, 0, 1, 0])
    assert abs(auc - 0.75) < 1e-12

    # ten-unit nominal fixture -> alpha = 73/107
    ten = [[0, 0], [0, 0], [0, 1], [1, 1], [1, 1], [2, 2], [2, 1], [0, 0], [2, 2], [0, -1]]
    assert abs(causeway.metrics.krippendorff_alpha(ten) - 73.0 / 107.0) < 1e-9
    assert abs(causeway.metrics.observed_agreement(ten) - 700.0 / 9.0) < 1e-9

    ev = causeway.metrics.evaluate_classifier(
        [0, 1, 2], [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    )
    assert ev["macro_f1"] == pytest.approx(1.0)
    assert ev["cross_entropy"] == pytest.approx(0.0, abs=1e-9)


def test_ate_iptw_matches_hand_fixture():
    # (T, e, Y) = (1,0.8,1), (1,0.4,0), (0,0.5,1), (0,0.2,0) -> -11/39
    ate = causeway.causal.ate_iptw([0.8, 0.4, 0.5, 0.2], [1, 1, 0, 0], [1, 0, 1, 0])
    assert abs(ate - (-11.0 / 39.0)) < 1e-12


def test_nnm_match_against_numpy():
    rng = np.random.default_rng(7)
    treated = rng.normal(size=(20, 4))
    controls = rng.normal(size=(60, 4))
    pairs, dists = causeway.causal.nnm_match(treated.tolist(), controls.tolist())
    tn = treated / np.linalg.norm(treated, axis=1, keepdims=True)
    cn = controls / np.linalg.norm(controls, axis=1, keepdims=True)
    expected = np.argmin(1.0 - tn @ cn.T, axis=1)
    assert [c for _, c in pairs] == expected.tolist()
    assert all(d >= 0 for d in dists)


def test_asmd_and_summarize_ci():
    assert causeway.causal.asmd([0.0, 2.0], [-1.0, 1.0]) == pytest.approx(1.0)
    s = causeway.causal.summarize_ci([0.0, 1.0], mode="paper_literal")
    assert s["mean"] == pytest.approx(0.5)
    assert s["ci_hi"] - s["mean"] == pytest.approx(1.96 * math.sqrt(0.5) / 2.0)
    s = causeway.causal.summarize_ci([0.0, 1.0], mode="standard_error")
    assert s["ci_hi"] - s["mean"] == pytest.approx(0.98)


def test_logistic_orders_separable_data():
    model = causeway.classify.fit_logistic([[-1.0], [1.0]], [0, 1])
    assert model.predict_proba([1.0])[1] > 0.5 > model.predict_proba([-1.0])[1]
    assert model.converged

    with pytest.raises(causeway.CausewayError):
        causeway.classify.fit_logistic([[1.0], [2.0]], [1, 1])


def test_gbm_learns_xor():
    X = [[0, 0], [0, 1], [1, 0], [1, 1]]
    y = [0, 1, 1, 0]
    model = causeway.classify.fit_gbm(X, y, rounds=50, depth=2)
    preds = [1 if model.predict_proba(x)[1] >= 0.5 else 0 for x in X]
    assert preds == y
    losses = model.train_loss
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_stance_sampling_frequencies():
    rng = np.random.default_rng(5)
    draws = [causeway.stance.sample_stance([0.5, 0.3, 0.2], u) for u in rng.random(20000)]
    freqs = np.array([draws.count(1), draws.count(-1), draws.count(0)]) / 20000
    assert np.allclose(freqs, [0.5, 0.3, 0.2], atol=0.02)

    res = causeway.stance.user_polarity([1, 1, -1])
    assert res["polarity_sum"] == 1 and res["verdict"] == 1


def test_synth_and_pipeline_end_to_end(tmp_path):
    corpus = causeway.synth.generate(
        str(tmp_path / "corpus"), n_users=150, embedding_dim=4,
        tau=0.5, gamma=0.5, seed=3,
    )
    assert corpus["n_tweets"] > 150
    cells = causeway.pipeline.run_full(
        str(tmp_path / "corpus" / "run_config.ini"), str(tmp_path / "run"), n_sims=2
    )
    assert any(k[1] == "C1" for k in cells)
    for v in cells.values():
        assert v["ci_lo"] <= v["ate_mean"] <= v["ci_hi"]
    assert (tmp_path / "run" / "report" / "ate_report.csv").exists()


def test_cli_binary_if_available(tmp_path):
    cli = os.environ.get("CAUSEWAY_CLI")
    if not cli or not os.path.exists(cli):
        pytest.skip("CLI binary not exported")
    out = subprocess.run(
        [cli, "synth", "--preset", "null", "--n-users", "80", "--out-dir", str(tmp_path / "c")],
        capture_output=True, text=True,
    )
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "c" / "ground_truth.json").exists()
