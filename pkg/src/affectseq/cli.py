"""Command line entry point: train, eval, chat, serve, sweep, inspect, prep."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import analysis, corpus, decoding, lexicon as lexmod, toydata, training
from .model import (DEFAULT_GAMMA, Model, ModelConfig, RunManifest,
                    load_checkpoint)

CONFIG_ENV = "AFFECTSEQ_CONFIG"

CONFIG_DEFAULTS = {
    "word_dim": 64,
    "hidden_dim": 64,
    "encoder_layers": 1,
    "lam": 0.1,
    "gamma": None,  # per-mode default when unset
    "delta": 0.15,
    "importance_mode": "li",
    "gi_a": 1e-3,
    "li_epsilon": 1e-8,
    "max_len": 20,
    "init_scale": 0.08,
    "seed": 0,
    "vocab_limit": 30000,
    "epochs": 5,
    "batch_size": 64,
    "lr": 1e-4,
    "adam_beta1": 0.9,
    "adam_beta2": 0.999,
    "clip_norm": 5.0,
    "shuffle": True,
    "val_fraction": 0.1,
    "beam_size": 20,
    "mmi_weight": 0.25,
    "mmi_first_k": 5,
}


class CliError(SystemExit):
    def __init__(self, msg: str):
        print(f"error: {msg}", file=sys.stderr)
        super().__init__(2)


def read_config(path: str | None) -> dict:
    """Flat key = value config file; unknown keys are rejected."""
    cfg = dict(CONFIG_DEFAULTS)
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    if not path:
        return cfg
    if not os.path.exists(path):
        raise CliError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key not in CONFIG_DEFAULTS:
                raise CliError(f"{path}:{lineno}: unknown config key {key!r}")
            default = CONFIG_DEFAULTS[key]
            if key == "importance_mode":
                cfg[key] = value
            elif key == "shuffle":
                cfg[key] = value.lower() in ("1", "true", "yes")
            elif isinstance(default, int) and not isinstance(default, bool):
                cfg[key] = int(value)
            else:
                cfg[key] = float(value)
    return cfg


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_lexicon(args) -> lexmod.VadLexicon:
    lex = lexmod.load_lexicon(args.lexicon)
    if getattr(args, "synonyms", None):
        lexmod.extend_with_synonyms(lex, lexmod.load_synonym_map(args.synonyms))
    if getattr(args, "lemma_map", None):
        lex.lemma_map = lexmod.load_lemma_map(args.lemma_map)
    return lexmod.finalize(lex)


def _prepare(args, cfg):
    """Shared train/sweep setup: corpus -> vocab -> model inputs."""
    raw = corpus.read_tokenized_pairs(args.pairs)
    pairs = corpus.filter_pairs(raw, cfg["max_len"])
    if not pairs:
        raise CliError("no usable pairs after filtering")
    vocab = corpus.build_vocab(pairs, cfg["vocab_limit"])
    lex = _load_lexicon(args)
    freqs = lexmod.term_frequency([p[0] for p in pairs] + [p[1] for p in pairs])
    pairs_ids = [(vocab.encode(a), vocab.encode(b)) for a, b in pairs]
    return pairs, pairs_ids, vocab, lex, freqs


def _model_config(cfg, vocab_size: int, lam=None, gamma=None, delta=None,
                  mode=None) -> ModelConfig:
    mode = mode if mode is not None else cfg["importance_mode"]
    gamma = gamma if gamma is not None else cfg["gamma"]
    if gamma is None:
        gamma = DEFAULT_GAMMA[mode]
    return ModelConfig(
        vocab_size=vocab_size,
        word_dim=cfg["word_dim"],
        hidden_dim=cfg["hidden_dim"],
        encoder_layers=cfg["encoder_layers"],
        lam=cfg["lam"] if lam is None else lam,
        gamma=gamma,
        delta=cfg["delta"] if delta is None else delta,
        importance_mode=mode,
        gi_a=cfg["gi_a"],
        li_epsilon=cfg["li_epsilon"],
        max_len=cfg["max_len"],
        init_scale=cfg["init_scale"],
        seed=cfg["seed"],
    )


def _run_config(cfg) -> training.TrainRunConfig:
    return training.TrainRunConfig(
        epochs=cfg["epochs"], batch_size=cfg["batch_size"], lr=cfg["lr"],
        adam_beta1=cfg["adam_beta1"], adam_beta2=cfg["adam_beta2"],
        clip_norm=cfg["clip_norm"], shuffle=bool(cfg["shuffle"]),
        val_fraction=cfg["val_fraction"], seed=cfg["seed"],
    )


def cmd_train(args) -> int:
    cfg = read_config(args.config)
    _, pairs_ids, vocab, lex, freqs = _prepare(args, cfg)
    mcfg = _model_config(cfg, len(vocab))
    model = Model.build(mcfg, vocab, lex, freqs)
    val_ids = None
    if args.val_pairs:
        val_raw = corpus.read_tokenized_pairs(args.val_pairs)
        val_ids = [(vocab.encode(a), vocab.encode(b))
                   for a, b in corpus.filter_pairs(val_raw, cfg["max_len"])]
    history = training.train(
        model, pairs_ids, _run_config(cfg), val_pairs_ids=val_ids,
        checkpoint_path=args.checkpoint, metrics_path=args.metrics,
        log=None if args.quiet else lambda r: print(json.dumps(r)),
    )
    manifest = RunManifest(
        config=mcfg.to_dict(), seed=cfg["seed"],
        corpus_digest=_digest(args.pairs), lexicon_digest=_digest(args.lexicon),
        checkpoint_path=args.checkpoint,
        extra={"epochs_run": len(history), "run": vars(_run_config(cfg))},
    )
    manifest.save(args.checkpoint + ".manifest.json")
    return 0


def cmd_eval(args) -> int:
    model = load_checkpoint(args.checkpoint)
    raw = corpus.read_tokenized_pairs(args.pairs)
    pairs = corpus.filter_pairs(raw, model.cfg.max_len)
    pairs_ids = [(model.vocab.encode(a), model.vocab.encode(b)) for a, b in pairs]
    report = analysis.perplexity(model, pairs_ids, dataset_id=args.pairs)
    print(report.to_json())
    return 0


def cmd_chat(args) -> int:
    model = load_checkpoint(args.checkpoint)
    settings = decoding.DecodeSettings(beam_size=args.beam_size)
    for line in sys.stdin:
        tokens = corpus.preprocess(line)
        if not tokens:
            print("")
            continue
        ids = model.vocab.encode(tokens[: model.cfg.max_len])
        best = decoding.respond(model, ids, settings)
        print(" ".join(model.vocab.decode(best.content_tokens())))
        sys.stdout.flush()
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .decoding import DecodeSettings
    from .server import ChatEngine, create_app

    model = load_checkpoint(args.checkpoint)
    engine = ChatEngine(model, DecodeSettings(beam_size=args.beam_size),
                        checkpoint_id=os.path.basename(args.checkpoint))
    app = create_app(engine)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_sweep(args) -> int:
    cfg = read_config(args.config)
    pairs, pairs_ids, vocab, lex, freqs = _prepare(args, cfg)
    lams = [float(v) for v in args.lam.split(",")]
    gammas = [float(v) for v in args.gamma.split(",")]
    deltas = [float(v) for v in args.delta.split(",")]
    modes = args.modes.split(",")
    grid = [(l, g, d, m) for l in lams for g in gammas for d in deltas for m in modes]

    eval_inputs = sorted({tuple(a) for a, _ in pairs})[: args.sample]

    def train_fn(lam, gamma, delta, mode):
        mcfg = _model_config(cfg, len(vocab), lam, gamma, delta, mode)
        model = Model.build(mcfg, vocab, lex, freqs)
        training.train(model, pairs_ids, _run_config(cfg))
        return model

    def eval_fn(model):
        ppl = analysis.perplexity(model, pairs_ids).perplexity
        responses = []
        for toks in eval_inputs:
            hyps = decoding.beam_search(model, vocab.encode(list(toks)),
                                        beam_size=2, max_len=model.cfg.max_len)
            responses.append(model.vocab.decode(hyps[0].content_tokens()))
        counts = analysis.affect_word_report(responses, lex.affect_norm).counts
        return ppl, counts

    rows = analysis.sweep(grid, train_fn, eval_fn)
    analysis.write_sweep(rows, args.out)
    for row in rows:
        print(json.dumps(vars(row), sort_keys=True))
    return 0


def cmd_inspect(args) -> int:
    model = load_checkpoint(args.checkpoint)
    if args.what == "attention":
        tokens = corpus.preprocess(args.sentence)
        matrix = analysis.export_attention(model, tokens, args.out)
        print(f"wrote {matrix.shape[0]}x{matrix.shape[1]} alignment matrix to {args.out}")
    elif args.what == "beta":
        words = args.words.split(",")
        betas, skipped = analysis.export_beta(model, words, args.out)
        for w, b in betas.items():
            print(json.dumps({"word": w, "beta": list(b)}))
        if skipped:
            print(f"skipped out-of-vocabulary words: {','.join(skipped)}", file=sys.stderr)
    elif args.what == "affect-words":
        raw = corpus.read_tokenized_pairs(args.pairs)
        norms = np.linalg.norm(model.vad_norm, axis=1)

        def norm_of(tok):
            return float(norms[model.vocab.id_of(tok)])

        responses = [b for _, b in raw]
        report = analysis.affect_word_report(responses, norm_of)
        print(json.dumps(vars(report)))
    return 0


def cmd_prep(args) -> int:
    if args.what == "corpus":
        raw = corpus.read_pairs(args.input)
        pairs = corpus.filter_pairs(corpus.preprocess_pairs(raw), args.max_len)
        corpus.write_pairs(pairs, args.out)
        vocab = corpus.build_vocab(pairs, args.vocab_limit)
        if args.vocab_out:
            corpus.save_vocab(vocab, args.vocab_out)
        print(json.dumps({"pairs_in": len(raw), "pairs_kept": len(pairs),
                          "vocab": len(vocab), "coverage": vocab.coverage}))
    elif args.what == "lexicon":
        lex = lexmod.load_lexicon(args.input)
        skipped = 0
        if args.synonyms:
            skipped = lexmod.extend_with_synonyms(
                lex, lexmod.load_synonym_map(args.synonyms))
        lexmod.finalize(lex)
        lexmod.save_lexicon(lex, args.out)
        print(json.dumps({"entries": len(lex.entries),
                          "duplicates": lex.duplicate_rows,
                          "synonym_skips": skipped}))
    elif args.what == "toy":
        pairs, words = toydata.make_trend_corpus(args.n_pairs)
        toydata.write_pairs_tsv(pairs, args.out)
        if args.lexicon_out:
            toydata.write_lexicon_csv(words, args.lexicon_out)
        print(json.dumps({"pairs": len(pairs), "affect_words": len(words)}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="affectseq",
        description="Affect-aware attentional seq2seq: training, inference, analysis.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", default=None,
                       help=f"flat key=value config file (default ${CONFIG_ENV})")

    p = sub.add_parser("train", help="train a model from a tokenized pair TSV")
    add_config(p)
    p.add_argument("--pairs", required=True)
    p.add_argument("--val-pairs", default=None)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--synonyms", default=None)
    p.add_argument("--lemma-map", default=None)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--metrics", default=None)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="perplexity report on a pair TSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--pairs", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("chat", help="line-per-line REPL against a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--beam-size", type=int, default=20)
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("serve", help="HTTP inference service")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--lexicon", default=None)
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--beam-size", type=int, default=20)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("sweep", help="hyper-parameter sensitivity sweep")
    add_config(p)
    p.add_argument("--pairs", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--synonyms", default=None)
    p.add_argument("--lemma-map", default=None)
    p.add_argument("--lam", default="0.1")
    p.add_argument("--gamma", default="5")
    p.add_argument("--delta", default="0,0.5,1,2")
    p.add_argument("--modes", default="li")
    p.add_argument("--sample", type=int, default=200,
                   help="decoded inputs per grid point for affect-word counts")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("inspect", help="attention / beta / affect-word exports")
    p.add_argument("what", choices=["attention", "beta", "affect-words"])
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--sentence", default="")
    p.add_argument("--words", default="")
    p.add_argument("--pairs", default=None)
    p.add_argument("--out", default="inspect.csv")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("prep", help="preprocess corpora and lexicons")
    p.add_argument("what", choices=["corpus", "lexicon", "toy"])
    p.add_argument("--input", default=None)
    p.add_argument("--synonyms", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--vocab-out", default=None)
    p.add_argument("--lexicon-out", default=None)
    p.add_argument("--max-len", type=int, default=20)
    p.add_argument("--vocab-limit", type=int, default=30000)
    p.add_argument("--n-pairs", type=int, default=5000)
    p.set_defaults(func=cmd_prep)

    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
