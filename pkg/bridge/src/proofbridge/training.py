"""Fine-tune tiny character-level seq2seq step models with teacher forcing.

Consumes the line-delimited training-example files produced upstream
({kind, inputs:[...], target}); the input list is joined with a separator
token in file order, so for abductive rows the conclusion stays in final
position. Artifacts are self-contained (weights + vocab + settings) and load
back through `TrainedSeq2Seq` for serving.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

log = logging.getLogger(__name__)

PAD, BOS, EOS, SEP, UNK = 0, 1, 2, 3, 4
_SPECIALS = 5
SEP_TEXT = " \x1d "  # unit separator between input statements


@dataclass(frozen=True)
class TrainSettings:
    epochs: int = 60
    lr: float = 5e-3
    hidden: int = 96
    embedding: int = 32
    batch_size: int = 8
    seed: int = 0
    device: str = "cpu"
    max_length: int = 160


class Vocab:
    def __init__(self, chars: list[str]):
        self.chars = chars
        self.index = {c: i + _SPECIALS for i, c in enumerate(chars)}

    @classmethod
    def build(cls, texts: list[str]) -> "Vocab":
        return cls(sorted({c for t in texts for c in t}))

    def __len__(self) -> int:
        return _SPECIALS + len(self.chars)

    def encode(self, text: str) -> list[int]:
        return [self.index.get(c, UNK) for c in text]

    def decode(self, ids: list[int]) -> str:
        return "".join(self.chars[i - _SPECIALS] for i in ids if i >= _SPECIALS)


class CharSeq2Seq(nn.Module):
    def __init__(self, vocab_size: int, embedding: int, hidden: int):
        super().__init__()
        self.embed = nn.Embedding(vocab_size, embedding, padding_idx=PAD)
        self.encoder = nn.GRU(embedding, hidden, batch_first=True)
        self.decoder = nn.GRU(embedding, hidden, batch_first=True)
        self.project = nn.Linear(hidden, vocab_size)

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        _, state = self.encoder(self.embed(src))
        decoded, _ = self.decoder(self.embed(tgt_in), state)
        return self.project(decoded)


def _compose_source(inputs: list[str]) -> str:
    return SEP_TEXT.join(inputs)


def _pad(rows: list[list[int]]) -> torch.Tensor:
    width = max(len(r) for r in rows)
    return torch.tensor([r + [PAD] * (width - len(r)) for r in rows], dtype=torch.long)


def load_rows(path: str | Path, kind: str) -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if not line.strip():
                continue
            obj = json.loads(line)
            if obj.get("kind") == kind:
                rows.append((_compose_source(list(obj["inputs"])), obj["target"]))
    return rows


def finetune(
    kind: str,
    data_path: str | Path,
    out_path: str | Path,
    settings: TrainSettings = TrainSettings(),
) -> dict:
    """Train one step model and save a loadable artifact.

    Returns a summary with the per-epoch loss curve for the training log.
    """
    rows = load_rows(data_path, kind)
    if not rows:
        raise ValueError(f"no rows of kind {kind!r} in {data_path}")
    torch.manual_seed(settings.seed)
    device = torch.device(settings.device)
    vocab = Vocab.build([s for pair in rows for s in pair])
    model = CharSeq2Seq(len(vocab), settings.embedding, settings.hidden).to(device)
    optimizer = torch.optim.Adam(model.parameters(), lr=settings.lr)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)

    sources = [vocab.encode(s) + [EOS] for s, _ in rows]
    targets = [[BOS] + vocab.encode(t) + [EOS] for _, t in rows]

    losses: list[float] = []
    model.train()
    for epoch in range(settings.epochs):
        epoch_loss = 0.0
        order = torch.randperm(len(rows))
        for start in range(0, len(rows), settings.batch_size):
            batch = order[start : start + settings.batch_size].tolist()
            src = _pad([sources[i] for i in batch]).to(device)
            tgt = _pad([targets[i] for i in batch]).to(device)
            logits = model(src, tgt[:, :-1])
            loss = loss_fn(logits.reshape(-1, len(vocab)), tgt[:, 1:].reshape(-1))
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += loss.item()
        losses.append(epoch_loss)
        log.info("epoch %d loss %.4f", epoch, epoch_loss)

    artifact = {
        "kind": kind,
        "chars": vocab.chars,
        "embedding": settings.embedding,
        "hidden": settings.hidden,
        "max_length": settings.max_length,
        "rows_trained": len(rows),
        "losses": losses,
        "state": model.state_dict(),
    }
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(artifact, out_path)
    return {"rows": len(rows), "losses": losses, "artifact": str(out_path)}


class TrainedSeq2Seq:
    """Serving wrapper around a saved artifact; greedy decode is argmax and
    therefore deterministic within a process."""

    def __init__(self, artifact: dict, device: str = "cpu", temperature: float = 1.0):
        self.kind = artifact["kind"]
        self.vocab = Vocab(artifact["chars"])
        self.max_length = artifact["max_length"]
        self.device = torch.device(device)
        self.temperature = temperature
        self.model = CharSeq2Seq(len(self.vocab), artifact["embedding"], artifact["hidden"])
        self.model.load_state_dict(artifact["state"])
        self.model.to(self.device)
        self.model.eval()
        self.identifier = f"trained-{self.kind}-rows{artifact.get('rows_trained', '?')}"
        self._sampler = torch.Generator(device="cpu")

    @classmethod
    def load(cls, path: str | Path, device: str = "cpu", temperature: float = 1.0) -> "TrainedSeq2Seq":
        artifact = torch.load(path, map_location="cpu", weights_only=False)
        return cls(artifact, device=device, temperature=temperature)

    @torch.no_grad()
    def _decode(self, source: str, greedy: bool) -> str:
        src = torch.tensor([self.vocab.encode(source) + [EOS]], dtype=torch.long, device=self.device)
        _, state = self.model.encoder(self.model.embed(src))
        token = torch.tensor([[BOS]], dtype=torch.long, device=self.device)
        out_ids: list[int] = []
        for _ in range(self.max_length):
            step, state = self.model.decoder(self.model.embed(token), state)
            logits = self.model.project(step[:, -1, :]).squeeze(0)
            if greedy:
                next_id = int(logits.argmax())
            else:
                probs = torch.softmax(logits / max(self.temperature, 1e-6), dim=-1)
                next_id = int(torch.multinomial(probs.cpu(), 1, generator=self._sampler))
            if next_id == EOS:
                break
            out_ids.append(next_id)
            token = torch.tensor([[next_id]], dtype=torch.long, device=self.device)
        return self.vocab.decode(out_ids)

    def generate_from_parts(self, parts: list[str], n: int, greedy: bool) -> list[str]:
        if greedy:
            return [self._decode(_compose_source(parts), greedy=True)]
        seen: set[str] = set()
        out: list[str] = []
        for _ in range(n):
            text = self._decode(_compose_source(parts), greedy=False)
            if text and text not in seen:
                seen.add(text)
                out.append(text)
        return out


class TrainedDeductive:
    def __init__(self, inner: TrainedSeq2Seq):
        self.inner = inner
        self.identifier = inner.identifier

    def generate(self, x1: str, x2: str, n: int, greedy: bool) -> list[str]:
        return self.inner.generate_from_parts([x1, x2], n, greedy)


class TrainedAbductive:
    def __init__(self, inner: TrainedSeq2Seq):
        self.inner = inner
        self.identifier = inner.identifier

    def generate(self, premise: str, conclusion: str, n: int, greedy: bool) -> list[str]:
        # conclusion stays in final position, matching the training rows
        return self.inner.generate_from_parts([premise, conclusion], n, greedy)
