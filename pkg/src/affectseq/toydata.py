"""Synthetic desk-scale corpora and lexicons for demos and verification.

Three generators:
  * trend corpus — templated contexts whose responses mix neutral fillers
    with context-specific affect words at varying rates, so the effect of
    the loss coefficient delta on generated affect words is measurable;
  * negator corpus — echo task where "not" before an affect word flips
    the response to a neutral one, giving the modifier-scaling parameter
    a learnable signal;
  * a small VAD lexicon covering every affect word the corpora emit.
"""

from __future__ import annotations

import csv

import numpy as np

NEUTRAL_FILLERS = ["okay", "fine", "alright", "usual", "plain"]

# normalized-triple prototypes per affect tier (l2 norms ~1.3 / ~2.5 / ~3.6)
TIER_TRIPLES = {
    1: [(1.0, 0.6, 0.5), (-1.0, 0.7, -0.4), (0.9, 0.8, -0.6)],
    2: [(1.8, 1.2, 0.9), (-1.7, 1.4, -0.8), (1.5, 1.6, 1.0)],
    3: [(2.0, 2.8, 1.2), (-1.9, 2.9, -1.1), (1.8, 3.0, 0.9)],
}


def affect_words(n: int):
    """n synthetic affect words with raw [1,9]-scale VAD triples."""
    out = {}
    for i in range(n):
        tier = (i % 3) + 1
        proto = TIER_TRIPLES[tier][(i // 3) % len(TIER_TRIPLES[tier])]
        jitter = 0.05 * ((i * 7) % 5 - 2)  # deterministic small spread
        v, a, d = proto[0] + jitter, proto[1], proto[2]
        out[f"aff{i:03d}"] = (v + 5.0, a + 3.0, d + 5.0)  # raw = normalized + neutral
    return out


def write_lexicon_csv(entries: dict[str, tuple[float, float, float]], path: str,
                      include_nice: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lemma", "valence", "arousal", "dominance"])
        if include_nice:
            writer.writerow(["nice", "6.95", "3.53", "6.47"])
        for lemma in sorted(entries):
            v, a, d = entries[lemma]
            writer.writerow([lemma, f"{v:.4f}", f"{a:.4f}", f"{d:.4f}"])


def make_trend_corpus(n_pairs: int = 4200, n_templates: int = 60,
                      n_neutral_vocab: int = 600, seed: int = 7,
                      q_lo: float = 0.12, q_hi: float = 0.48):
    """(pairs, lexicon entries): affect-word usage rate varies per template.

    Template i pairs the context word ctx{i} with its own affect word; the
    response uses that word with probability q_i in [q_lo, q_hi] and the
    template's fixed neutral filler otherwise. Extra one-shot pairs inflate
    the vocabulary with neutral words so the mean-normalized loss weights
    behave the way they do on a realistic (mostly neutral) vocabulary.
    """
    rng = np.random.default_rng(seed)
    words = affect_words(n_templates)
    names = sorted(words)
    qs = np.linspace(q_lo, q_hi, n_templates)
    pairs = []
    for j in range(n_pairs):
        i = j % n_templates
        src = ["tell", "me", "about", f"ctx{i:03d}"]
        if rng.random() < qs[i]:
            filler = names[i]
        else:
            filler = NEUTRAL_FILLERS[i % len(NEUTRAL_FILLERS)]
        pairs.append((src, ["it", "was", filler]))
    for k in range(n_neutral_vocab):
        pairs.append((["say", f"w{k:03d}"], [f"w{k:03d}", "said"]))
    return pairs, words


def trend_inputs(n_templates: int = 60) -> list[list[str]]:
    """The distinct decode inputs of the trend corpus templates."""
    return [["tell", "me", "about", f"ctx{i:03d}"] for i in range(n_templates)]


def make_overfit_corpus(n_pairs: int = 50):
    """Deterministic distinct pairs for memorization checks."""
    words = affect_words(n_pairs)
    names = sorted(words)
    pairs = [
        (["what", "about", f"ctx{i:03d}"], ["very", names[i], "indeed"])
        for i in range(n_pairs)
    ]
    return pairs, words


def make_negator_corpus(n_pairs: int = 3000, n_affect: int = 12, seed: int = 11):
    """(pairs, lexicon entries) echo task with systematically inverted affect.

    "it is <aff>"        -> "<aff> indeed"
    "it is not <aff>"    -> "calm indeed"
    "it is very <aff>"   -> "<aff> <aff>"
    """
    rng = np.random.default_rng(seed)
    words = affect_words(n_affect)
    names = sorted(words)
    pairs = []
    for j in range(n_pairs):
        w = names[int(rng.integers(n_affect))]
        form = int(rng.integers(3))
        if form == 0:
            pairs.append((["it", "is", w], [w, "indeed"]))
        elif form == 1:
            pairs.append((["it", "is", "not", w], ["calm", "indeed"]))
        else:
            pairs.append((["it", "is", "very", w], [w, w]))
    return pairs, words


def write_pairs_tsv(pairs, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for src, tgt in pairs:
            fh.write(" ".join(src) + "\t" + " ".join(tgt) + "\n")
