"""Perplexity, affect-rich word statistics, attention/beta exports, sweeps."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .decoding import beam_search, length_normalize
from .model import Model
from .training import evaluate_nll


@dataclass
class EvalReport:
    dataset_id: str
    token_count: int
    mean_nll: float
    perplexity: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def perplexity(model: Model, pairs_ids, dataset_id: str = "eval",
               batch_size: int = 64) -> EvalReport:
    """exp(mean per-token NLL) of reference responses, teacher-forced.

    Always unweighted, so fluency numbers are comparable across delta.
    """
    stats = evaluate_nll(model, pairs_ids, batch_size=batch_size)
    nll = stats.per_token_unweighted
    return EvalReport(dataset_id, stats.tokens, nll, float(np.exp(nll)))


def count_affect_rich(responses, affect_norm_of, threshold: float) -> int:
    """Distinct word types with VAD norm above ``threshold`` in a response set.

    ``responses`` is an iterable of token lists, ``affect_norm_of`` maps a
    token to its normalized-VAD l2 norm.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    types = set()
    for resp in responses:
        for tok in resp:
            if tok not in types and affect_norm_of(tok) > threshold:
                types.add(tok)
    return len(types)


@dataclass
class AffectWordReport:
    thresholds: list[float]
    counts: list[int]
    responses: int


def affect_word_report(responses, affect_norm_of,
                       thresholds=(1.0, 2.0, 3.0)) -> AffectWordReport:
    responses = list(responses)
    counts = [count_affect_rich(responses, affect_norm_of, t) for t in thresholds]
    return AffectWordReport(list(thresholds), counts, len(responses))


def decode_alignment(model: Model, src_ids: list[int], beam_size: int = 4,
                     max_len: int = 20):
    """Greedy/beam decode and return (response ids, T'xT alignment matrix)."""
    hyps = beam_search(model, src_ids, beam_size, max_len)
    length_normalize(hyps)
    best = hyps[0]
    matrix = np.stack(best.alignments, axis=0)  # (T', T)
    return best.tokens, matrix


def export_attention(model: Model, sentence_tokens: list[str], path: str,
                     beam_size: int = 4) -> np.ndarray:
    """CSV alignment export: header = input tokens, one row per decode step."""
    src_ids = model.vocab.encode(sentence_tokens)
    out_ids, matrix = decode_alignment(model, src_ids, beam_size,
                                       model.cfg.max_len)
    out_tokens = [model.vocab.token_of(i) for i in out_ids]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["output_token"] + sentence_tokens)
        for tok, row in zip(out_tokens, matrix):
            writer.writerow([tok] + [f"{v:.10g}" for v in row])
    return matrix


def export_beta(model: Model, words: list[str], path: str | None = None):
    """Per-word learned scaling triples; OOV words reported and skipped."""
    betas = model.export_beta(words)
    skipped = [w for w in words if w not in betas]
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["word", "beta_v", "beta_a", "beta_d"])
            for w, (bv, ba, bd) in betas.items():
                writer.writerow([w, f"{bv:.10g}", f"{ba:.10g}", f"{bd:.10g}"])
    return betas, skipped


@dataclass
class SweepRow:
    lam: float
    gamma: float
    delta: float
    mode: str
    perplexity: float | None = None
    affect_counts: list[int] = field(default_factory=list)
    error: str | None = None


def sweep(grid, train_fn, eval_fn) -> list[SweepRow]:
    """Train/evaluate one model per (lam, gamma, delta, mode) grid point.

    ``train_fn(lam, gamma, delta, mode)`` returns a trained Model;
    ``eval_fn(model)`` returns (perplexity, affect counts per threshold).
    Individual failures are recorded and the sweep continues.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("sweep needs a non-empty grid")
    rows = []
    for lam, gamma, delta, mode in grid:
        row = SweepRow(lam, gamma, delta, mode)
        try:
            model = train_fn(lam, gamma, delta, mode)
            ppl, counts = eval_fn(model)
            row.perplexity = ppl
            row.affect_counts = list(counts)
        except Exception as exc:  # keep sweeping past individual failures
            row.error = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def write_sweep(rows: list[SweepRow], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(asdict(row), sort_keys=True) + "\n")
