"""FastAPI app exposing the four wire-protocol endpoints plus /health.

Malformed requests fail schema validation (422); model-side failures return
500 with an opaque-safe message. Greedy responses are deterministic within a
server process.
"""

from __future__ import annotations

import logging
from typing import Literal

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .config import BridgeConfig, STUB
from .stubs import ConstantEntailment, EchoAbductive, EchoDeductive, OverlapHeuristic
from .training import TrainedAbductive, TrainedDeductive, TrainedSeq2Seq

log = logging.getLogger(__name__)


class DeductiveRequest(BaseModel):
    inputs: list[str] = Field(min_length=2, max_length=2)
    n: int = Field(ge=1)
    mode: Literal["sample", "greedy"]


class AbductiveRequest(BaseModel):
    premise: str
    conclusion: str
    n: int = Field(ge=1)
    mode: Literal["sample", "greedy"]


class GenerationsResponse(BaseModel):
    generations: list[str]


class EntailRequest(BaseModel):
    premise: str
    hypothesis: str


class EntailResponse(BaseModel):
    probability: float = Field(ge=0.0, le=1.0)


class HeuristicRequest(BaseModel):
    kind: Literal["deductive", "abductive"]
    goal: str | None = None
    pairs: list[tuple[str, str]] = Field(min_length=1)


class HeuristicResponse(BaseModel):
    scores: list[float]


def _load_models(config: BridgeConfig) -> dict[str, object]:
    models: dict[str, object] = {}
    temp = config.decode.sample_temperature
    if config.deductive == STUB:
        models["deductive"] = EchoDeductive()
    else:
        models["deductive"] = TrainedDeductive(
            TrainedSeq2Seq.load(config.deductive, device=config.device, temperature=temp)
        )
    if config.abductive == STUB:
        models["abductive"] = EchoAbductive()
    else:
        models["abductive"] = TrainedAbductive(
            TrainedSeq2Seq.load(config.abductive, device=config.device, temperature=temp)
        )
    # Only stub scorers ship with the bridge; the protocol accepts any
    # compatible entailment/heuristic implementation slotted in here.
    for key in ("entailment", "heuristic_d", "heuristic_a"):
        if config.model_spec(key) != STUB:
            raise ValueError(f"no loadable model for {key}; only {STUB!r} is available")
    models["entailment"] = ConstantEntailment()
    models["heuristic_d"] = OverlapHeuristic()
    models["heuristic_a"] = OverlapHeuristic()
    return models


def create_app(config: BridgeConfig | None = None) -> FastAPI:
    config = config or BridgeConfig()
    models = _load_models(config)
    app = FastAPI(title="proofsearch model bridge")

    def guarded(fn, *args):
        try:
            return fn(*args)
        except Exception:
            log.exception("model call failed")
            raise HTTPException(status_code=500, detail="model inference failed")

    @app.get("/health")
    def health() -> dict:
        return {
            "capabilities": ["deduce", "abduce", "entail", "heuristic_d", "heuristic_a"],
            "models": {name: getattr(m, "identifier", type(m).__name__) for name, m in models.items()},
        }

    @app.post("/generate-deductive", response_model=GenerationsResponse)
    def generate_deductive(req: DeductiveRequest) -> GenerationsResponse:
        gens = guarded(
            models["deductive"].generate, req.inputs[0], req.inputs[1], req.n, req.mode == "greedy"
        )
        return GenerationsResponse(generations=gens[: req.n])

    @app.post("/generate-abductive", response_model=GenerationsResponse)
    def generate_abductive(req: AbductiveRequest) -> GenerationsResponse:
        gens = guarded(
            models["abductive"].generate, req.premise, req.conclusion, req.n, req.mode == "greedy"
        )
        return GenerationsResponse(generations=gens[: req.n])

    @app.post("/entail", response_model=EntailResponse)
    def entail(req: EntailRequest) -> EntailResponse:
        prob = guarded(models["entailment"].probability, req.premise, req.hypothesis)
        return EntailResponse(probability=float(prob))

    @app.post("/heuristic", response_model=HeuristicResponse)
    def heuristic(req: HeuristicRequest) -> HeuristicResponse:
        model = models["heuristic_d"] if req.kind == "deductive" else models["heuristic_a"]
        scores = guarded(model.scores, [tuple(p) for p in req.pairs], req.goal)
        if len(scores) != len(req.pairs):
            raise HTTPException(status_code=500, detail="heuristic arity mismatch")
        return HeuristicResponse(scores=[float(s) for s in scores])

    return app
