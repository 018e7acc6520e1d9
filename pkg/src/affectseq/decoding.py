"""Inference: beam search, anti-LM rescoring, and affect re-ranking."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import EOS, SOS, UNK
from .model import Model


@dataclass
class BeamHypothesis:
    tokens: list[int]                 # generated ids, EOS-terminated when done
    log_prob: float
    done: bool = False
    mmi_score: float = 0.0
    affect_score: float = 0.0
    alignments: list[np.ndarray] = field(default_factory=list)

    def content_tokens(self) -> list[int]:
        return [t for t in self.tokens if t not in (SOS, EOS)]


@dataclass
class DecodeSettings:
    beam_size: int = 20
    max_len: int = 20
    mmi_weight: float = 0.25
    mmi_first_k: int = 5
    rerank: bool = True


class _StepState:
    def __init__(self, s, c):
        self.s = s  # (n, h) ndarray
        self.c = c


def _encode_for_decode(model: Model, src_ids: list[int]):
    ids = np.asarray([src_ids], dtype=np.int64)
    mask = np.ones_like(ids, dtype=np.float64)
    H, s0 = model.encode(ids, mask)
    eta = model.affect_bias(ids, mask)
    return H.data, s0.data, eta.data, mask


def _step(model: Model, prev_ids, s, c, H, eta, mask):
    """Batched inference step over n live hypotheses (no tape)."""
    import affectseq.tensor as T

    n = len(prev_ids)
    Hn = T.Tensor(np.repeat(H, n, axis=0))
    etan = T.Tensor(np.repeat(eta, n, axis=0))
    maskn = np.repeat(mask, n, axis=0)
    s_t, c_t = T.Tensor(s), T.Tensor(c)
    s_new, c_new, _, alpha, logits = model.decode_step(
        np.asarray(prev_ids, dtype=np.int64), s_t, c_t, Hn, etan, maskn)
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return s_new.data, c_new.data, alpha.data, log_probs


def beam_search(model: Model, src_ids: list[int], beam_size: int = 20,
                max_len: int = 20) -> list[BeamHypothesis]:
    """Length-capped beam search; returns up to beam_size completed
    hypotheses sorted by log-probability (EOS forced at max_len)."""
    if beam_size < 1:
        raise ValueError("beam_size must be >= 1")
    H, s0, eta, mask = _encode_for_decode(model, src_ids)
    h_dim = model.cfg.hidden_dim
    live = [BeamHypothesis(tokens=[], log_prob=0.0)]
    states = _StepState(s0.copy(), np.zeros((1, h_dim)))
    completed: list[BeamHypothesis] = []
    for step in range(max_len + 1):
        prev = [hyp.tokens[-1] if hyp.tokens else SOS for hyp in live]
        s_new, c_new, alpha, log_probs = _step(
            model, prev, states.s, states.c, H, eta, mask)
        candidates = []
        for i, hyp in enumerate(live):
            if step >= max_len:
                # budget exhausted: force EOS
                fin = BeamHypothesis(
                    tokens=hyp.tokens + [EOS],
                    log_prob=hyp.log_prob + float(log_probs[i, EOS]),
                    done=True,
                    alignments=hyp.alignments + [alpha[i].copy()],
                )
                completed.append(fin)
                continue
            top = np.argsort(-log_probs[i])[: beam_size + 1]
            for tok in top:
                cand = BeamHypothesis(
                    tokens=hyp.tokens + [int(tok)],
                    log_prob=hyp.log_prob + float(log_probs[i, tok]),
                    done=(int(tok) == EOS),
                    alignments=hyp.alignments + [alpha[i].copy()],
                )
                candidates.append((i, cand))
        if step >= max_len or not candidates:
            break
        candidates.sort(key=lambda p: -p[1].log_prob)
        next_live, src_rows = [], []
        for i, cand in candidates:
            if cand.done:
                # every finished candidate is kept so the result set
                # dominates the b-th best sequence at enumerable scale
                completed.append(cand)
            elif len(next_live) < beam_size:
                next_live.append(cand)
                src_rows.append(i)
        if not next_live:
            break
        live = next_live
        states = _StepState(s_new[src_rows], c_new[src_rows])
    completed.sort(key=lambda h: -h.log_prob)
    return completed[:beam_size]


def sequence_log_probs(model: Model, src_ids: list[int], tokens: list[int],
                       limit: int | None = None) -> list[float]:
    """Stepwise log p(y_t | y_<t, X) for a fixed output sequence."""
    H, s0, eta, mask = _encode_for_decode(model, src_ids)
    import affectseq.tensor as T

    s, c = T.Tensor(s0), T.Tensor(np.zeros((1, model.cfg.hidden_dim)))
    prev = SOS
    out = []
    n = len(tokens) if limit is None else min(limit, len(tokens))
    for t in range(n):
        s, c, _, _, logits = model.decode_step(
            np.asarray([prev]), s, c, T.Tensor(H), T.Tensor(eta), mask)
        row = logits.data[0]
        shifted = row - row.max()
        lp = shifted - np.log(np.exp(shifted).sum())
        out.append(float(lp[tokens[t]]))
        prev = tokens[t]
    return out


def length_normalize(hyps: list[BeamHypothesis]) -> None:
    """Divide log-probabilities by token count (short-response bias fix)."""
    for h in hyps:
        n = max(len(h.tokens), 1)
        h.log_prob = h.log_prob / n


def mmi_rescore(hyps: list[BeamHypothesis], anti_lm, weight: float,
                first_k: int) -> list[BeamHypothesis]:
    """Reorder by log p(Y|X) - weight * sum_{t<=k} log p_anti(y_t).

    ``anti_lm(tokens, k)`` returns stepwise anti-LM log-probs for the
    first k tokens. weight=0 or first_k=0 leaves the ordering unchanged.
    """
    if weight < 0:
        raise ValueError("mmi weight must be nonnegative")
    for h in hyps:
        penalty = 0.0
        if weight > 0.0 and first_k > 0:
            penalty = sum(anti_lm(h.tokens, first_k))
        h.mmi_score = h.log_prob - weight * penalty
    return sorted(hyps, key=lambda h: -h.mmi_score)


def affect_rerank(hyps: list[BeamHypothesis], vad_norm: np.ndarray) -> list[BeamHypothesis]:
    """Stable sort by mean per-token VAD norm (desc), then MMI, then logp."""
    if not hyps:
        raise ValueError("affect_rerank needs a non-empty hypothesis set")
    norms = np.linalg.norm(vad_norm, axis=1)
    for h in hyps:
        content = h.content_tokens()
        h.affect_score = float(np.mean([norms[t] for t in content])) if content else 0.0
    return sorted(hyps, key=lambda h: (-h.affect_score, -h.mmi_score, -h.log_prob))


def make_anti_lm(model: Model):
    """Anti-LM: the same decoder conditioned on a single-UNK input."""
    def anti_lm(tokens: list[int], first_k: int) -> list[float]:
        return sequence_log_probs(model, [UNK], tokens, limit=first_k)

    return anti_lm


def respond(model: Model, src_ids: list[int],
            settings: DecodeSettings | None = None) -> BeamHypothesis:
    """Full inference pipeline: beam -> length norm -> MMI -> affect re-rank."""
    st = settings or DecodeSettings()
    hyps = beam_search(model, src_ids, st.beam_size, st.max_len)
    length_normalize(hyps)
    hyps = mmi_rescore(hyps, make_anti_lm(model), st.mmi_weight, st.mmi_first_k)
    if st.rerank:
        hyps = affect_rerank(hyps, model.vad_norm)
    return hyps[0]
