import csv
import json

import numpy as np
import pytest

from affectseq import analysis as an
from affectseq.corpus import EOS

from conftest import tiny_model


def test_perplexity_uniform_model_equals_vocab_size():
    m = tiny_model(word_dim=4, hidden_dim=3)
    m.params["out_W"].data[:] = 0.0
    m.params["out_b"].data[:] = 0.0
    pairs = [([4], [5]), ([5], [4, 6])]
    report = an.perplexity(m, pairs, dataset_id="toy")
    assert report.perplexity == pytest.approx(len(m.vocab), abs=1e-6)
    assert report.token_count == 5  # 3 words + 2 EOS
    assert report.mean_nll == pytest.approx(np.log(len(m.vocab)))
    loaded = json.loads(report.to_json())
    assert loaded["dataset_id"] == "toy"
    assert set(loaded) == {"dataset_id", "token_count", "mean_nll", "perplexity"}


def test_perplexity_ignores_delta_weighting():
    m = tiny_model(word_dim=4, hidden_dim=3, delta=2.0)
    pairs = [([4], [5])]
    a = an.perplexity(m, pairs)
    m.cfg.delta = 0.0
    b = an.perplexity(m, pairs)
    assert a.perplexity == b.perplexity


def test_count_affect_rich_counts_types_not_tokens():
    norms = {"rage": 3.5, "good": 2.1, "it": 0.0}
    responses = [["rage", "rage", "it"], ["good", "rage"]]
    f = norms.__getitem__
    assert an.count_affect_rich(responses, f, 3.0) == 1
    assert an.count_affect_rich(responses, f, 2.0) == 2
    assert an.count_affect_rich(responses, f, 0.0) == 2
    with pytest.raises(ValueError):
        an.count_affect_rich(responses, f, -1.0)


def test_affect_word_report_counts_nonincreasing():
    norms = {"rage": 3.5, "good": 2.1, "it": 0.5}
    gen = (r for r in [["rage", "good"], ["it"]])  # generator consumed once
    rep = an.affect_word_report(gen, norms.__getitem__)
    assert rep.thresholds == [1.0, 2.0, 3.0]
    assert rep.counts == [2, 2, 1]
    assert rep.responses == 2
    assert rep.counts == sorted(rep.counts, reverse=True)


def test_decode_alignment_shape():
    m = tiny_model(word_dim=4, hidden_dim=3, seed=2)
    tokens, matrix = an.decode_alignment(m, [4, 5, 6], beam_size=2, max_len=4)
    assert tokens[-1] == EOS
    assert matrix.shape == (len(tokens), 3)
    assert np.allclose(matrix.sum(axis=1), 1.0)


def test_export_attention_csv_layout(tmp_path):
    m = tiny_model(word_dim=4, hidden_dim=3, seed=2)
    path = tmp_path / "att.csv"
    matrix = an.export_attention(m, ["good", "it"], str(path))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["output_token", "good", "it"]
    assert len(rows) - 1 == matrix.shape[0]
    for row in rows[1:]:
        assert len(row) == 3
        assert sum(float(v) for v in row[1:]) == pytest.approx(1.0, abs=1e-6)


def test_export_beta_skips_oov(tmp_path):
    m = tiny_model()
    path = tmp_path / "beta.csv"
    betas, skipped = an.export_beta(m, ["not", "zzz"], str(path))
    assert set(betas) == {"not"}
    assert skipped == ["zzz"]
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["word", "beta_v", "beta_a", "beta_d"]
    assert rows[1][0] == "not"


def test_sweep_records_failures_and_continues(tmp_path):
    def train_fn(lam, gamma, delta, mode):
        if gamma > 1:
            raise RuntimeError("boom")
        return "model"

    def eval_fn(model):
        return 12.5, [3, 2, 1]

    grid = [(0.1, 0.5, 0.0, "ui"), (0.1, 5.0, 0.0, "li")]
    rows = an.sweep(grid, train_fn, eval_fn)
    assert rows[0].perplexity == 12.5
    assert rows[0].affect_counts == [3, 2, 1]
    assert rows[0].error is None
    assert rows[1].error == "RuntimeError: boom"
    assert rows[1].perplexity is None
    path = tmp_path / "sweep.jsonl"
    an.write_sweep(rows, str(path))
    lines = [json.loads(l) for l in path.read_text().splitlines()]
    assert len(lines) == 2
    assert lines[0]["mode"] == "ui"
    with pytest.raises(ValueError):
        an.sweep([], train_fn, eval_fn)
