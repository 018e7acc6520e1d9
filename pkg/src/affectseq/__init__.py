"""Affect-aware attentional seq2seq: lexicon, model, training, decoding, serving."""

__version__ = "0.1.0"
