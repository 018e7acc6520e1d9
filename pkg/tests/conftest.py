import numpy as np
import pytest

from affectseq import lexicon as lx
from affectseq.corpus import SPECIAL_TOKENS, Vocabulary
from affectseq.model import Model, ModelConfig


@pytest.fixture
def nice_lexicon(tmp_path):
    """Finalized lexicon with the reference word 'nice' plus fixtures."""
    path = tmp_path / "lex.csv"
    path.write_text(
        "lemma,valence,arousal,dominance\n"
        "nice,6.95,3.53,6.47\n"
        "gloom,3.2,4.2,3.9\n"
        "calm,5.0,3.0,5.0\n"
    )
    return lx.finalize(lx.load_lexicon(str(path)))


def tiny_model(gamma=1.0, delta=0.0, lam=0.1, mode="ui", seed=0,
               word_dim=6, hidden_dim=5, extra=None, freqs=None,
               encoder_layers=1, max_len=20):
    """Small model over specials + a few words with hand-set VAD rows.

    ``extra`` maps token -> normalized VAD triple.
    """
    extra = extra or {
        "good": (1.95, 0.53, 1.47),
        "bad": (-1.8, 1.2, -1.1),
        "it": (0.0, 0.0, 0.0),
        "is": (0.0, 0.0, 0.0),
        "not": (0.0, 0.0, 0.0),
    }
    tokens = SPECIAL_TOKENS + list(extra)
    vocab = Vocabulary(tokens, {t: 1 for t in tokens}, 1.0)
    vad = np.zeros((len(tokens), 3))
    for i, t in enumerate(extra, start=4):
        vad[i] = extra[t]
    p = np.zeros(len(tokens))
    if freqs:
        for t, val in freqs.items():
            p[vocab.id_of(t)] = val
    cfg = ModelConfig(
        vocab_size=len(tokens), word_dim=word_dim, hidden_dim=hidden_dim,
        encoder_layers=encoder_layers, lam=lam, gamma=gamma, delta=delta,
        importance_mode=mode, seed=seed, max_len=max_len,
    )
    return Model(cfg, vocab, vad, p)
