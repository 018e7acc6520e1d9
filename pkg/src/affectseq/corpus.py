"""Pair-corpus ingestion, text preprocessing, and vocabulary building."""

from __future__ import annotations

import re
from dataclasses import dataclass

PAD, SOS, EOS, UNK = 0, 1, 2, 3
SPECIAL_TOKENS = ["<pad>", "<sos>", "<eos>", "<unk>"]
DEFAULT_MAX_LEN = 20

# contraction table applied after lowercasing, longest keys first
CONTRACTIONS = {
    "isn't": "is not", "aren't": "are not", "wasn't": "was not",
    "weren't": "were not", "don't": "do not", "doesn't": "does not",
    "didn't": "did not", "can't": "can not", "cannot": "can not",
    "couldn't": "could not", "shouldn't": "should not", "wouldn't": "would not",
    "won't": "will not", "shan't": "shall not", "mustn't": "must not",
    "haven't": "have not", "hasn't": "has not", "hadn't": "had not",
    "ain't": "is not", "i'm": "i am", "i've": "i have", "i'll": "i will",
    "i'd": "i would", "you're": "you are", "you've": "you have",
    "you'll": "you will", "you'd": "you would", "he's": "he is",
    "he'll": "he will", "he'd": "he would", "she's": "she is",
    "she'll": "she will", "she'd": "she would", "it's": "it is",
    "it'll": "it will", "we're": "we are", "we've": "we have",
    "we'll": "we will", "we'd": "we would", "they're": "they are",
    "they've": "they have", "they'll": "they will", "they'd": "they would",
    "that's": "that is", "there's": "there is", "what's": "what is",
    "who's": "who is", "where's": "where is", "how's": "how is",
    "let's": "let us", "y'all": "you all",
}

_WORD_RE = re.compile(r"[a-z']+")
_NUMBER_RE = re.compile(r"^\d+([.,]\d+)*$")
# shouted sound effects like BANG / AARGH in otherwise-cased text
_SOUND_RE = re.compile(r"\b[A-Z]{3,}\b")


class CorpusError(ValueError):
    pass


def preprocess(text: str) -> list[str]:
    """Lowercase, expand contractions, tokenize, drop symbols and numbers."""
    text = _SOUND_RE.sub(" ", text)
    text = text.lower()
    tokens: list[str] = []
    for raw in re.split(r"[^a-z0-9']+", text):
        if not raw or _NUMBER_RE.match(raw):
            continue
        if raw in CONTRACTIONS:
            tokens.extend(CONTRACTIONS[raw].split())
            continue
        for word in _WORD_RE.findall(raw):
            word = word.strip("'")
            if word:
                tokens.append(word)
    return tokens


def read_pairs(path: str) -> list[tuple[str, str]]:
    """Read a TSV pair corpus: input<TAB>response per line."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusError(f"{path}:{lineno}: expected input<TAB>response")
            pairs.append((parts[0], parts[1]))
    return pairs


def preprocess_pairs(raw_pairs) -> list[tuple[list[str], list[str]]]:
    return [(preprocess(a), preprocess(b)) for a, b in raw_pairs]


def filter_pairs(pairs, max_len: int = DEFAULT_MAX_LEN):
    """Drop pairs with an empty side or a side longer than max_len."""
    return [
        (a, b)
        for a, b in pairs
        if a and b and len(a) <= max_len and len(b) <= max_len
    ]


@dataclass
class Vocabulary:
    tokens: list[str]
    counts: dict[str, int]
    coverage: float

    def __post_init__(self):
        self._ids = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def id_of(self, token: str) -> int:
        return self._ids.get(token, UNK)

    def token_of(self, idx: int) -> str:
        return self.tokens[idx]

    def encode(self, tokens) -> list[int]:
        return [self.id_of(t) for t in tokens]

    def decode(self, ids) -> list[str]:
        return [self.tokens[i] for i in ids]


def build_vocab(pairs, size_limit: int) -> Vocabulary:
    """Top size_limit tokens by count (specials included in the limit),
    ties broken lexicographically."""
    if size_limit < 5:
        raise CorpusError("size_limit must leave room for the 4 special tokens")
    if not pairs:
        raise CorpusError("cannot build a vocabulary from an empty pair set")
    counts: dict[str, int] = {}
    total = 0
    for a, b in pairs:
        for tok in a:
            counts[tok] = counts.get(tok, 0) + 1
            total += 1
        for tok in b:
            counts[tok] = counts.get(tok, 0) + 1
            total += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    keep = ranked[: size_limit - len(SPECIAL_TOKENS)]
    covered = sum(c for _, c in keep)
    tokens = SPECIAL_TOKENS + [t for t, _ in keep]
    vocab_counts = {t: counts.get(t, 0) for t in tokens}
    coverage = covered / total if total else 0.0
    return Vocabulary(tokens, vocab_counts, coverage)


def save_vocab(vocab: Vocabulary, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tok in vocab.tokens:
            fh.write(f"{tok}\t{vocab.counts.get(tok, 0)}\n")


def load_vocab(path: str) -> Vocabulary:
    tokens, counts = [], {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            tok, cnt = line.split("\t")
            tokens.append(tok)
            counts[tok] = int(cnt)
    if tokens[: len(SPECIAL_TOKENS)] != SPECIAL_TOKENS:
        raise CorpusError(f"{path}: missing reserved special tokens")
    return Vocabulary(tokens, counts, coverage=1.0)


def write_pairs(pairs, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in pairs:
            fh.write(" ".join(a) + "\t" + " ".join(b) + "\n")


def read_tokenized_pairs(path: str) -> list[tuple[list[str], list[str]]]:
    """Read an already-preprocessed TSV corpus (space-separated tokens)."""
    out = []
    for a, b in read_pairs(path):
        out.append((a.split(), b.split()))
    return out
