"""Attentional encoder-decoder with affect-extended embeddings, an
affect-biased attention energy, and a learned previous-word scaling of
each token's VAD triple.

Shapes: batch B, source length T, word dim m, hidden dim h, vocab V.
All parameters are float64 tensors; the encoder is bidirectional with its
concatenated states linearly projected to h so dot-product attention
against the unidirectional decoder conforms.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field, asdict

import numpy as np

from . import tensor as T
from .corpus import PAD, SOS, EOS, UNK, Vocabulary
from .lexicon import VadLexicon, FrequencyTable

DEFAULT_GAMMA = {"ui": 0.5, "gi": 1.0, "li": 5.0}
CHECKPOINT_MAGIC = b"AFSQ"
CHECKPOINT_VERSION = 1
ATTENTION_MASK_BIAS = -1e9


@dataclass
class ModelConfig:
    vocab_size: int
    word_dim: int = 64
    hidden_dim: int = 64
    encoder_layers: int = 1
    lam: float = 0.1
    gamma: float = DEFAULT_GAMMA["li"]
    delta: float = 0.15
    importance_mode: str = "li"
    gi_a: float = 1e-3
    li_epsilon: float = 1e-8
    max_len: int = 20
    init_scale: float = 0.08
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0 or self.gamma < 0 or self.delta < 0:
            raise ValueError("lambda, gamma, delta must be nonnegative")
        if self.word_dim <= 0 or self.hidden_dim <= 0 or self.encoder_layers <= 0:
            raise ValueError("dimensions must be positive")
        if self.importance_mode not in ("ui", "gi", "li"):
            raise ValueError(f"unknown importance mode {self.importance_mode!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def init_params(cfg: ModelConfig) -> dict[str, T.Tensor]:
    """Uniform init in [-init_scale, init_scale], fixed name order, seeded."""
    rng = np.random.default_rng(cfg.seed)
    m, h, V = cfg.word_dim, cfg.hidden_dim, cfg.vocab_size
    shapes: dict[str, tuple[int, ...]] = {"emb": (V, m)}
    for layer in range(cfg.encoder_layers):
        in_dim = (m + 3) if layer == 0 else 2 * h
        for d in ("f", "b"):
            shapes[f"enc{layer}_{d}_W"] = (in_dim + h, 4 * h)
            shapes[f"enc{layer}_{d}_b"] = (4 * h,)
    shapes["proj_W"] = (2 * h, h)
    shapes["proj_b"] = (h,)
    shapes["dec_W"] = (m + 3 + h, 4 * h)
    shapes["dec_b"] = (4 * h,)
    shapes["att_W"] = (2 * h, h)
    shapes["att_b"] = (h,)
    shapes["out_W"] = (h, V)
    shapes["out_b"] = (V,)
    shapes["mod_W"] = (3, m)
    return {
        name: T.Tensor(
            rng.uniform(-cfg.init_scale, cfg.init_scale, size=shape),
            requires_grad=True,
        )
        for name, shape in shapes.items()
    }


class Model:
    """Parameters plus the frozen per-vocabulary affect and frequency data."""

    def __init__(
        self,
        cfg: ModelConfig,
        vocab: Vocabulary,
        vad_norm: np.ndarray,
        token_freq: np.ndarray,
        params: dict[str, T.Tensor] | None = None,
    ):
        if len(vocab) != cfg.vocab_size:
            raise ValueError("vocab size disagrees with config")
        self.cfg = cfg
        self.vocab = vocab
        self.vad_norm = np.asarray(vad_norm, dtype=np.float64)  # (V, 3), normalized
        self.token_freq = np.asarray(token_freq, dtype=np.float64)  # (V,), p(x)
        self.params = params if params is not None else init_params(cfg)

    @classmethod
    def build(cls, cfg: ModelConfig, vocab: Vocabulary, lex: VadLexicon,
              freqs: FrequencyTable) -> "Model":
        vad = np.zeros((len(vocab), 3))
        p = np.zeros(len(vocab))
        for i, tok in enumerate(vocab.tokens):
            if i >= 4:  # specials stay neutral / zero-frequency
                vad[i] = lex.normalized(tok)
                p[i] = freqs.p(tok)
        return cls(cfg, vocab, vad, p)

    # ---- forward pieces -------------------------------------------------

    def embed_ids(self, ids: np.ndarray) -> T.Tensor:
        """(N,) token ids -> (N, m+3) affective embeddings [word; lam*VAD]."""
        ids = np.asarray(ids, dtype=np.int64)
        words = T.gather_rows(self.params["emb"], ids)
        vad = T.Tensor(self.cfg.lam * self.vad_norm[ids])
        return T.concat([words, vad], axis=1)

    def importance(self, ids: np.ndarray, mask: np.ndarray) -> np.ndarray:
        """Per-position term importance mu in [0, 1]; zero at padding."""
        cfg = self.cfg
        p = self.token_freq[ids]
        if cfg.importance_mode == "ui":
            mu = np.ones_like(p)
        elif cfg.importance_mode == "gi":
            mu = cfg.gi_a / (cfg.gi_a + p)
        else:  # li
            logs = np.log(1.0 / (p + cfg.li_epsilon)) * mask
            denom = logs.sum(axis=1, keepdims=True)
            denom[denom == 0.0] = 1.0
            mu = logs / denom
        return mu * mask

    def affect_bias(self, ids: np.ndarray, mask: np.ndarray) -> T.Tensor:
        """(B, T) attention bias eta >= 0 per source position.

        eta_t = gamma * || mu_t (1 + beta_t) (x) VAD(x_t) ||^2 where
        beta_t = tanh(Wb . word_vector(x_{t-1})) and beta_1 = 0.
        """
        B, L = ids.shape
        mu = self.importance(ids, mask)
        mod_Wt = T.transpose(self.params["mod_W"])  # (m, 3)
        cols = []
        for t in range(L):
            vad_mu = T.Tensor(self.vad_norm[ids[:, t]] * mu[:, t:t + 1])  # (B,3)
            if self.cfg.gamma == 0.0:
                cols.append(T.Tensor(np.zeros(B)))
                continue
            if t == 0:
                scaled = vad_mu
            else:
                prev_words = T.gather_rows(self.params["emb"], ids[:, t - 1])
                beta = T.tanh(T.matmul(prev_words, mod_Wt))  # (B,3)
                scaled = T.mul(T.add(beta, 1.0), vad_mu)
            eta_t = T.mul(T.tsum(T.mul(scaled, scaled), axis=1), self.cfg.gamma)
            cols.append(eta_t)
        return T.stack(cols, axis=1)  # (B, T)

    def encode(self, ids: np.ndarray, mask: np.ndarray):
        """Run the bidirectional encoder.

        Returns (H, s0) with H (B, T, h) projected states and s0 (B, h)
        the projected final state used to start the decoder.
        """
        ids = np.asarray(ids, dtype=np.int64)
        mask = np.asarray(mask, dtype=np.float64)
        B, L = ids.shape
        if L == 0:
            raise ValueError("cannot encode an empty sequence")
        h_dim = self.cfg.hidden_dim
        inputs = [self.embed_ids(ids[:, t]) for t in range(L)]
        for layer in range(self.cfg.encoder_layers):
            Wf = self.params[f"enc{layer}_f_W"]
            bf = self.params[f"enc{layer}_f_b"]
            Wb = self.params[f"enc{layer}_b_W"]
            bb = self.params[f"enc{layer}_b_b"]
            fwd = self._run_direction(inputs, mask, Wf, bf, range(L), B, h_dim)
            bwd = self._run_direction(inputs, mask, Wb, bb, range(L - 1, -1, -1), B, h_dim)
            inputs = [T.concat([fwd[t], bwd[t]], axis=1) for t in range(L)]
        proj = [
            T.add(T.matmul(x, self.params["proj_W"]), self.params["proj_b"])
            for x in inputs
        ]
        H = T.stack(proj, axis=1)  # (B, T, h)
        final = T.concat([fwd[L - 1], bwd[0]], axis=1)
        s0 = T.add(T.matmul(final, self.params["proj_W"]), self.params["proj_b"])
        return H, s0

    def _run_direction(self, inputs, mask, W, b, order, B, h_dim):
        h = T.Tensor(np.zeros((B, h_dim)))
        c = T.Tensor(np.zeros((B, h_dim)))
        states: dict[int, T.Tensor] = {}
        for t in order:
            h_new, c_new = T.lstm_cell(inputs[t], h, c, W, b)
            m = T.Tensor(mask[:, t:t + 1])
            keep = T.Tensor(1.0 - mask[:, t:t + 1])
            h = T.add(T.mul(m, h_new), T.mul(keep, h))
            c = T.add(T.mul(m, c_new), T.mul(keep, c))
            states[t] = h
        return states

    def attend(self, s: T.Tensor, H: T.Tensor, eta: T.Tensor, mask: np.ndarray):
        """Dot-product attention with additive affect bias.

        Returns (context (B, h), alignment (B, T))."""
        energies = T.add(T.bdot(H, s), eta)
        energies = T.add(energies, T.Tensor((1.0 - mask) * ATTENTION_MASK_BIAS))
        alpha = T.softmax(energies, axis=-1)
        ctx = T.bweight(H, alpha)
        return ctx, alpha

    def decode_step(self, prev_ids: np.ndarray, s: T.Tensor, c: T.Tensor,
                    H: T.Tensor, eta: T.Tensor, mask: np.ndarray):
        """One decoder step. Returns (s', c', attentional state, alignment, logits)."""
        e_prev = self.embed_ids(prev_ids)
        s_new, c_new = T.lstm_cell(e_prev, s, c, self.params["dec_W"], self.params["dec_b"])
        ctx, alpha = self.attend(s_new, H, eta, mask)
        pre = T.add(T.matmul(T.concat([ctx, s_new], axis=1), self.params["att_W"]),
                    self.params["att_b"])
        s_hat = T.tanh(pre)
        logits = T.add(T.matmul(s_hat, self.params["out_W"]), self.params["out_b"])
        return s_new, c_new, s_hat, alpha, logits

    def initial_decoder_state(self, s0: T.Tensor):
        B = s0.data.shape[0]
        return s0, T.Tensor(np.zeros((B, self.cfg.hidden_dim)))

    def export_beta(self, words) -> dict[str, tuple[float, float, float]]:
        """Learned previous-word scaling triple per word; OOV words skipped."""
        out = {}
        Wb = self.params["mod_W"].data  # (3, m)
        for w in words:
            idx = self.vocab.id_of(w)
            if idx == UNK and w != self.vocab.token_of(UNK):
                continue
            vec = self.params["emb"].data[idx]
            out[w] = tuple(np.tanh(Wb @ vec))
        return out


# ---- batching -----------------------------------------------------------

@dataclass
class Batch:
    src: np.ndarray        # (B, T) ids
    src_mask: np.ndarray   # (B, T) 1.0 at real tokens
    dec_in: np.ndarray     # (B, T'+1), starts with SOS
    dec_tgt: np.ndarray    # (B, T'+1), ends with EOS
    tgt_mask: np.ndarray   # (B, T'+1)


def make_batch(pairs_ids: list[tuple[list[int], list[int]]]) -> Batch:
    """Pad a list of (src ids, tgt ids) to a dense teacher-forcing batch."""
    B = len(pairs_ids)
    Ls = max(len(s) for s, _ in pairs_ids)
    Lt = max(len(t) for _, t in pairs_ids) + 1  # room for EOS
    src = np.full((B, Ls), PAD, dtype=np.int64)
    src_mask = np.zeros((B, Ls))
    dec_in = np.full((B, Lt), PAD, dtype=np.int64)
    dec_tgt = np.full((B, Lt), PAD, dtype=np.int64)
    tgt_mask = np.zeros((B, Lt))
    for i, (s, t) in enumerate(pairs_ids):
        src[i, :len(s)] = s
        src_mask[i, :len(s)] = 1.0
        dec_in[i, 0] = SOS
        dec_in[i, 1:len(t) + 1] = t
        dec_tgt[i, :len(t)] = t
        dec_tgt[i, len(t)] = EOS
        tgt_mask[i, :len(t) + 1] = 1.0
    return Batch(src, src_mask, dec_in, dec_tgt, tgt_mask)


# ---- checkpoint io -------------------------------------------------------

def save_checkpoint(model: Model, path: str) -> None:
    """Versioned header + named float64 little-endian tensors."""
    header = {
        "format_version": CHECKPOINT_VERSION,
        "config": model.cfg.to_dict(),
        "vocab_tokens": model.vocab.tokens,
        "vocab_counts": [model.vocab.counts.get(t, 0) for t in model.vocab.tokens],
        "coverage": model.vocab.coverage,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    names = sorted(model.params)
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        tensors = [(n, model.params[n].data) for n in names]
        tensors.append(("_vad_norm", model.vad_norm))
        tensors.append(("_token_freq", model.token_freq))
        fh.write(struct.pack("<I", len(tensors)))
        for name, arr in tensors:
            nb = name.encode("utf-8")
            fh.write(struct.pack("<H", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<B", arr.ndim))
            for d in arr.shape:
                fh.write(struct.pack("<I", d))
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path: str) -> Model:
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)
    if buf.read(4) != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    (version,) = struct.unpack("<I", buf.read(4))
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    (blen,) = struct.unpack("<Q", buf.read(8))
    header = json.loads(buf.read(blen).decode("utf-8"))
    cfg = ModelConfig(**header["config"])
    tokens = header["vocab_tokens"]
    counts = dict(zip(tokens, header["vocab_counts"]))
    vocab = Vocabulary(tokens, counts, header.get("coverage", 1.0))
    (ntensors,) = struct.unpack("<I", buf.read(4))
    arrays: dict[str, np.ndarray] = {}
    for _ in range(ntensors):
        (nlen,) = struct.unpack("<H", buf.read(2))
        name = buf.read(nlen).decode("utf-8")
        (ndim,) = struct.unpack("<B", buf.read(1))
        shape = tuple(struct.unpack("<I", buf.read(4))[0] for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(buf.read(count * 8), dtype="<f8").reshape(shape)
        arrays[name] = np.array(arr)
    vad = arrays.pop("_vad_norm")
    freq = arrays.pop("_token_freq")
    params = {n: T.Tensor(a, requires_grad=True) for n, a in arrays.items()}
    return Model(cfg, vocab, vad, freq, params)


@dataclass
class RunManifest:
    """Reproducibility record written beside every checkpoint."""

    config: dict
    seed: int
    corpus_digest: str
    lexicon_digest: str
    checkpoint_path: str
    extra: dict = field(default_factory=dict)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "RunManifest":
        with open(path, encoding="utf-8") as fh:
            return cls(**json.load(fh))
