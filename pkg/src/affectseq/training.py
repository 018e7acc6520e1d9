"""Affect-weighted cross-entropy objective, Adam, and the training loop."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .model import Batch, Model, make_batch

PROB_FLOOR = 1e-12


def compute_weights(vad_norm: np.ndarray, delta: float) -> np.ndarray:
    """Per-vocabulary loss weights |V|(1 + d*n) / sum(1 + d*n).

    ``vad_norm`` is the (V, 3) normalized VAD table; n is its row-wise l2
    norm. The mean weight is exactly 1, so the overall gradient scale is
    unchanged versus the unweighted loss.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    norms = np.linalg.norm(vad_norm, axis=1)
    raw = 1.0 + delta * norms
    return raw * (len(raw) / raw.sum())


@dataclass
class LossStats:
    weighted_nll: float = 0.0
    unweighted_nll: float = 0.0
    tokens: int = 0
    clamped: int = 0

    def merge(self, other: "LossStats") -> None:
        self.weighted_nll += other.weighted_nll
        self.unweighted_nll += other.unweighted_nll
        self.tokens += other.tokens
        self.clamped += other.clamped

    @property
    def per_token(self) -> float:
        return self.weighted_nll / max(self.tokens, 1)

    @property
    def per_token_unweighted(self) -> float:
        return self.unweighted_nll / max(self.tokens, 1)


def affective_loss(step_log_probs: list[T.Tensor], targets: np.ndarray,
                   tgt_mask: np.ndarray, weights: np.ndarray):
    """Weighted negative log-likelihood over teacher-forced steps.

    ``step_log_probs[t]`` holds (B, V) log-probabilities at step t. PAD
    positions are masked out. Returns (objective tensor = batch-mean of
    per-sequence weighted NLL sums, LossStats for reporting).
    """
    B = targets.shape[0]
    stats = LossStats()
    pieces = []
    for t, lp in enumerate(step_log_probs):
        ids = targets[:, t]
        m = tgt_mask[:, t]
        tok_lp = T.row_take(lp, ids)  # (B,)
        floor = np.log(PROB_FLOOR)
        clamp_hits = int(((tok_lp.data < floor) & (m > 0)).sum())
        stats.clamped += clamp_hits
        w = weights[ids] * m
        pieces.append(T.mul(tok_lp, T.Tensor(-w)))
        stats.unweighted_nll += float(-(np.maximum(tok_lp.data, floor) * m).sum())
        stats.weighted_nll += float(-(np.maximum(tok_lp.data, floor) * w).sum())
        stats.tokens += int(m.sum())
    total = T.tsum(T.stack(pieces, axis=0))
    objective = T.mul(total, 1.0 / B)
    return objective, stats


def forward_batch(model: Model, batch: Batch, weights: np.ndarray):
    """Teacher-forced forward pass; returns (objective, stats)."""
    H, s0 = model.encode(batch.src, batch.src_mask)
    eta = model.affect_bias(batch.src, batch.src_mask)
    s, c = model.initial_decoder_state(s0)
    step_lps = []
    for t in range(batch.dec_in.shape[1]):
        s, c, _, _, logits = model.decode_step(
            batch.dec_in[:, t], s, c, H, eta, batch.src_mask)
        step_lps.append(T.log_softmax(logits, axis=-1))
    return affective_loss(step_lps, batch.dec_tgt, batch.tgt_mask, weights)


@dataclass
class AdamState:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    skipped: int = 0


def adam_step(params: dict[str, T.Tensor], grads: dict[str, np.ndarray],
              state: AdamState) -> None:
    """Standard Adam with bias correction; skips non-finite gradients."""
    if any(not np.isfinite(g).all() for g in grads.values()):
        state.skipped += 1
        return
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** state.step
    correction2 = 1.0 - b2 ** state.step
    for name, p in params.items():
        g = grads[name]
        if name not in state.m:
            state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = state.m[name] / correction1
        v_hat = state.v[name] / correction2
        p.data = p.data - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def clip_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> float:
    total = float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for name in grads:
            grads[name] = grads[name] * scale
    return total


@dataclass
class TrainRunConfig:
    epochs: int = 5
    batch_size: int = 64
    lr: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    clip_norm: float = 5.0
    shuffle: bool = True
    val_fraction: float = 0.1
    seed: int = 0


class TrainingDiverged(RuntimeError):
    pass


def evaluate_nll(model: Model, pairs_ids, weights=None, batch_size: int = 64):
    """Mean per-token NLL over a pair set (unweighted unless given weights)."""
    if not pairs_ids:
        raise ValueError("empty evaluation set")
    w = weights if weights is not None else np.ones(len(model.vocab))
    stats = LossStats()
    for start in range(0, len(pairs_ids), batch_size):
        batch = make_batch(pairs_ids[start:start + batch_size])
        _, s = forward_batch(model, batch, w)
        stats.merge(s)
    return stats


def train(model: Model, train_pairs_ids, run: TrainRunConfig,
          val_pairs_ids=None, checkpoint_path: str | None = None,
          metrics_path: str | None = None, log=None):
    """Teacher-forced training; keeps the best-validation parameters.

    ``train_pairs_ids`` holds (src ids, tgt ids) tuples. Returns a list of
    per-epoch metric dicts; the best-validation snapshot is left in the
    model (and written to ``checkpoint_path`` when given).
    """
    from .model import save_checkpoint

    weights = compute_weights(model.vad_norm, model.cfg.delta)
    state = AdamState(lr=run.lr, beta1=run.adam_beta1, beta2=run.adam_beta2)
    rng = np.random.default_rng(run.seed)
    order = np.arange(len(train_pairs_ids))
    if val_pairs_ids is None:
        n_val = max(1, int(len(train_pairs_ids) * run.val_fraction))
        val_pairs_ids = train_pairs_ids[-n_val:]
    history = []
    best_val = float("inf")
    best_snapshot = None
    metrics_fh = open(metrics_path, "w", encoding="utf-8") if metrics_path else None
    try:
        for epoch in range(1, run.epochs + 1):
            t0 = time.monotonic()
            if run.shuffle:
                rng.shuffle(order)
            epoch_stats = LossStats()
            for start in range(0, len(order), run.batch_size):
                idx = order[start:start + run.batch_size]
                batch = make_batch([train_pairs_ids[i] for i in idx])
                with T.Tape() as tape:
                    objective, stats = forward_batch(model, batch, weights)
                    if not np.isfinite(objective.data):
                        raise TrainingDiverged(
                            f"non-finite loss at epoch {epoch}, batch {start // run.batch_size}"
                        )
                    grads = tape.backward(objective, params=model.params)
                epoch_stats.merge(stats)
                clip_global_norm(grads, run.clip_norm)
                adam_step(model.params, grads, state)
            val_stats = evaluate_nll(model, val_pairs_ids)
            val_ppl = float(np.exp(val_stats.per_token_unweighted))
            record = {
                "epoch": epoch,
                "train_loss": epoch_stats.per_token,
                "val_ppl": val_ppl,
                "wall_time_s": time.monotonic() - t0,
            }
            history.append(record)
            if metrics_fh:
                metrics_fh.write(json.dumps(record) + "\n")
                metrics_fh.flush()
            if log:
                log(record)
            if val_ppl < best_val:
                best_val = val_ppl
                best_snapshot = {n: p.data.copy() for n, p in model.params.items()}
    finally:
        if metrics_fh:
            metrics_fh.close()
    if best_snapshot is not None:
        for n, p in model.params.items():
            p.data = best_snapshot[n]
    if checkpoint_path:
        save_checkpoint(model, checkpoint_path)
    return history
