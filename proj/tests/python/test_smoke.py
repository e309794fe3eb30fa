import math
from pathlib import Path

import numpy as np
import pytest

import wse

DATA = Path(__file__).resolve().parents[1] / "data"


def test_single_exemplar_scores_coincide():
    ex = np.array([[0.3, -0.7]])
    h = np.array([1.0, 2.0])
    for kernel in ("dot", "neg_sq_euclidean"):
        assert wse.exemplar_score(ex, h, kernel) == wse.prototype_score(ex, h, kernel)


def test_exemplar_score_is_log_mean_exp():
    ex = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert wse.exemplar_score(ex, np.array([1.0, 0.0])) == pytest.approx(math.log((math.e + 1) / 2))


def test_unknown_kernel_raises():
    with pytest.raises(wse.UsageError):
        wse.prototype_score(np.ones((1, 2)), np.ones(2), "cosine")


def test_typevec_unit_norm():
    v = wse.typevec("bank", 16, 0)
    assert np.linalg.norm(v) == pytest.approx(1.0)


def test_corpus_stats_on_toy_fixture():
    s = wse.corpus_stats(str(DATA / "toy_corpus.jsonl"))
    assert s == {"word_types": 5, "usages": 107, "mean_senses": 2.0}


def test_wu_palmer():
    tree = {"a": "root", "b": "a", "c": "root"}
    assert wse.wu_palmer(tree, "a", "b") == pytest.approx(0.8)
    assert wse.wu_palmer(tree, "a", "c") == pytest.approx(0.5)


def test_cli_build(tmp_path):
    code, out, err = wse.run(
        ["build", "--out", str(tmp_path), "-s", f"corpus={DATA / 'toy_corpus.jsonl'}"]
    )
    assert code == 0, err
    assert "word_types" in out
    assert len(list(tmp_path.glob("manifest_*.jsonl"))) == 5
    code, _, _ = wse.run(["build", "-s", "nonsense=1"])
    assert code == 1
