"""VAD affect lexicon: loading, synonym extension, clipping, lookups.

Raw annotations live on a [1, 9] scale per dimension. Entries are clipped
to [3, 7] at finalization and lookups return triples normalized by the
neutral point [5, 3, 5], so valence/dominance land in [-2, 2] and arousal
in [0, 4]. Unknown tokens resolve to the neutral (0, 0, 0).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

NEUTRAL = (5.0, 3.0, 5.0)
CLIP_LO, CLIP_HI = 3.0, 7.0
RAW_LO, RAW_HI = 1.0, 9.0

DEFAULT_GI_A = 1e-3
DEFAULT_LI_EPS = 1e-8


class LexiconError(ValueError):
    pass


@dataclass
class VadLexicon:
    """Lemma -> VAD triple plus a token -> lemma map."""

    entries: dict[str, tuple[float, float, float]] = field(default_factory=dict)
    lemma_map: dict[str, str] = field(default_factory=dict)
    finalized: bool = False
    duplicate_rows: int = 0

    def lemma_of(self, token: str) -> str:
        return self.lemma_map.get(token, token)

    def clipped(self, token: str) -> tuple[float, float, float]:
        if not self.finalized:
            raise LexiconError("lexicon not finalized; call finalize() first")
        return self.entries.get(self.lemma_of(token), NEUTRAL)

    def normalized(self, token: str) -> tuple[float, float, float]:
        v, a, d = self.clipped(token)
        return (v - NEUTRAL[0], a - NEUTRAL[1], d - NEUTRAL[2])

    def affect_norm(self, token: str) -> float:
        v, a, d = self.normalized(token)
        return math.sqrt(v * v + a * a + d * d)


def load_lexicon(path: str) -> VadLexicon:
    """Parse a lemma,valence,arousal,dominance CSV with raw [1, 9] values."""
    lex = VadLexicon()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != [
            "lemma", "valence", "arousal", "dominance",
        ]:
            raise LexiconError(f"{path}: expected header lemma,valence,arousal,dominance")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise LexiconError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            lemma = row[0].strip()
            try:
                triple = tuple(float(v) for v in row[1:])
            except ValueError as exc:
                raise LexiconError(f"{path}:{lineno}: non-numeric VAD value") from exc
            if not all(RAW_LO <= v <= RAW_HI for v in triple):
                raise LexiconError(f"{path}:{lineno}: VAD values outside [1, 9]: {triple}")
            if lemma in lex.entries:
                lex.duplicate_rows += 1
            lex.entries[lemma] = triple
    return lex


def load_lemma_map(path: str) -> dict[str, str]:
    """Parse a token,lemma CSV (no header) into an exact-match map."""
    out: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise LexiconError(f"{path}:{lineno}: expected token,lemma")
            out[row[0].strip()] = row[1].strip()
    return out


def load_synonym_map(path: str) -> dict[str, list[str]]:
    """Parse a lemma,syn1;syn2;... CSV (no header)."""
    out: dict[str, list[str]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise LexiconError(f"{path}:{lineno}: expected lemma,syn1;syn2;...")
            syns = [s.strip() for s in row[1].split(";") if s.strip()]
            out[row[0].strip()] = syns
    return out


def extend_with_synonyms(lex: VadLexicon, synonym_map: dict[str, list[str]]) -> int:
    """Fill absent lemmas with the mean raw triple of their present synonyms.

    Existing entries are never overwritten. Returns the number of skipped
    lemmas (no synonym present in the base lexicon).
    """
    if lex.finalized:
        raise LexiconError("cannot extend a finalized lexicon")
    base = dict(lex.entries)
    skipped = 0
    for lemma, syns in sorted(synonym_map.items()):
        if lemma in base:
            continue
        triples = [base[s] for s in syns if s in base]
        if not triples:
            skipped += 1
            continue
        n = len(triples)
        lex.entries[lemma] = tuple(sum(t[k] for t in triples) / n for k in range(3))
    return skipped


def finalize(lex: VadLexicon) -> VadLexicon:
    """Clamp every entry elementwise to [3, 7] and freeze the lexicon."""
    lex.entries = {
        lemma: tuple(min(max(v, CLIP_LO), CLIP_HI) for v in triple)
        for lemma, triple in lex.entries.items()
    }
    lex.finalized = True
    return lex


@dataclass
class FrequencyTable:
    """Relative token frequencies over the training corpus."""

    freqs: dict[str, float]
    total_tokens: int

    def p(self, token: str) -> float:
        return self.freqs.get(token, 0.0)


def term_frequency(corpus) -> FrequencyTable:
    """Relative frequency p(x) over an iterable of token sequences."""
    counts: dict[str, int] = {}
    total = 0
    for sent in corpus:
        for tok in sent:
            counts[tok] = counts.get(tok, 0) + 1
            total += 1
    if total == 0:
        raise LexiconError("term_frequency: empty corpus")
    return FrequencyTable({t: c / total for t, c in counts.items()}, total)


def term_importance(
    token: str,
    mode: str,
    freqs: FrequencyTable,
    sentence=None,
    a: float = DEFAULT_GI_A,
    epsilon: float = DEFAULT_LI_EPS,
) -> float:
    """Term importance in [0, 1]: uniform, global (smoothed inverse
    frequency), or local (log inverse frequency, normalized per sentence)."""
    if mode == "ui":
        return 1.0
    if mode == "gi":
        return a / (a + freqs.p(token))
    if mode == "li":
        if not sentence:
            raise LexiconError("li importance needs the enclosing sentence")
        denom = sum(math.log(1.0 / (freqs.p(t) + epsilon)) for t in sentence)
        return math.log(1.0 / (freqs.p(token) + epsilon)) / denom
    raise LexiconError(f"unknown importance mode: {mode!r}")


def sentence_importance(
    sentence,
    mode: str,
    freqs: FrequencyTable,
    a: float = DEFAULT_GI_A,
    epsilon: float = DEFAULT_LI_EPS,
) -> list[float]:
    """Per-token importance for a whole sentence (one denominator pass)."""
    if mode == "ui":
        return [1.0] * len(sentence)
    if mode == "gi":
        return [a / (a + freqs.p(t)) for t in sentence]
    if mode == "li":
        if not sentence:
            raise LexiconError("li importance needs a non-empty sentence")
        logs = [math.log(1.0 / (freqs.p(t) + epsilon)) for t in sentence]
        denom = sum(logs)
        return [v / denom for v in logs]
    raise LexiconError(f"unknown importance mode: {mode!r}")


def save_lexicon(lex: VadLexicon, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lemma", "valence", "arousal", "dominance"])
        for lemma in sorted(lex.entries):
            v, a, d = lex.entries[lemma]
            writer.writerow([lemma, f"{v:.6g}", f"{a:.6g}", f"{d:.6g}"])
