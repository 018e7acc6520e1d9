"""HTTP inference service: single-turn chat over a frozen checkpoint."""

from __future__ import annotations

import time

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .corpus import preprocess
from .decoding import DecodeSettings, affect_rerank, beam_search, \
    length_normalize, make_anti_lm, mmi_rescore
from .model import Model, load_checkpoint


class ChatRequest(BaseModel):
    message: str
    beam_size: int | None = None
    rerank: bool | None = None
    include_attention: bool = True


class ChatEngine:
    """Frozen model plus the decode pipeline; safe for concurrent reads."""

    def __init__(self, model: Model, settings: DecodeSettings | None = None,
                 checkpoint_id: str = "unnamed"):
        self.model = model
        self.settings = settings or DecodeSettings()
        self.checkpoint_id = checkpoint_id
        self._norms = np.linalg.norm(model.vad_norm, axis=1)

    def respond(self, req: ChatRequest) -> tuple[int, dict]:
        t0 = time.monotonic()
        tokens = preprocess(req.message)
        if not tokens:
            return 422, {"error": "message empty after preprocessing"}
        truncated = len(tokens) > self.model.cfg.max_len
        tokens = tokens[: self.model.cfg.max_len]
        src_ids = self.model.vocab.encode(tokens)
        st = self.settings
        beam = req.beam_size if req.beam_size and req.beam_size > 0 else st.beam_size
        hyps = beam_search(self.model, src_ids, beam, st.max_len)
        length_normalize(hyps)
        hyps = mmi_rescore(hyps, make_anti_lm(self.model), st.mmi_weight, st.mmi_first_k)
        do_rerank = st.rerank if req.rerank is None else req.rerank
        if do_rerank:
            hyps = affect_rerank(hyps, self.model.vad_norm)
        else:
            affect_rerank(list(hyps), self.model.vad_norm)  # fill scores, keep order
        best = hyps[0]
        out_ids = best.content_tokens()
        out_tokens = self.model.vocab.decode(out_ids)
        attention = np.stack(best.alignments, axis=0) if best.alignments else None
        payload = {
            "response": " ".join(out_tokens),
            "tokens": out_tokens,
            "affect_norms": [float(self._norms[i]) for i in out_ids],
            "affect_score": best.affect_score,
            "truncated": truncated,
            "latency_ms": (time.monotonic() - t0) * 1000.0,
        }
        if req.include_attention and attention is not None:
            # one attention row per generated token (EOS row dropped)
            payload["attention"] = attention[: len(out_tokens)].tolist()
        return 200, payload


def create_app(engine: ChatEngine) -> FastAPI:
    app = FastAPI(title="affectseq")

    @app.get("/api/health")
    def health():
        return {"status": "ok", "checkpoint": engine.checkpoint_id}

    @app.post("/api/respond")
    def respond(req: ChatRequest):
        status, payload = engine.respond(req)
        return JSONResponse(status_code=status, content=payload)

    @app.get("/")
    def root():
        return {"service": "affectseq", "endpoints": ["/api/health", "/api/respond"]}

    return app


def app_from_checkpoint(checkpoint_path: str,
                        settings: DecodeSettings | None = None) -> FastAPI:
    model = load_checkpoint(checkpoint_path)
    engine = ChatEngine(model, settings, checkpoint_id=checkpoint_path)
    return create_app(engine)
