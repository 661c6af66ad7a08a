"""Bridge configuration: which model backs each capability, decode settings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

STUB = "stub"
CAPABILITY_KEYS = ("deductive", "abductive", "entailment", "heuristic_d", "heuristic_a")


@dataclass(frozen=True)
class DecodeSettings:
    max_length: int = 160
    sample_temperature: float = 1.0  # ignored in greedy mode


@dataclass(frozen=True)
class BridgeConfig:
    """"stub" or a model artifact path per capability; port and device."""

    deductive: str = STUB
    abductive: str = STUB
    entailment: str = STUB
    heuristic_d: str = STUB
    heuristic_a: str = STUB
    port: int = 8787
    device: str = "cpu"
    decode: DecodeSettings = field(default_factory=DecodeSettings)

    @classmethod
    def from_file(cls, path: str | Path) -> "BridgeConfig":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        decode = DecodeSettings(**obj.pop("decode", {}))
        return cls(decode=decode, **obj)

    def model_spec(self, key: str) -> str:
        if key not in CAPABILITY_KEYS:
            raise KeyError(key)
        return getattr(self, key)
