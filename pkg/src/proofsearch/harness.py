"""Run search modes over treelet suites and aggregate coverage/tree metrics."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from . import scoring
from .backends import StepBackend
from .errors import ConfigError, IntegrityError, ProofSearchError
from .scoring import EntailDirection
from .search import Mode, SearchConfig, adgv_search
from .trees import ProofTree, Treelet, assemble_proof
from .validators import ValidatorConfig

#: (backward, forward) step budgets per treelet depth; whole-tree runs get
#: the final row.
BUDGET_SCHEDULE: dict[int, tuple[int, int]] = {1: (2, 2), 2: (4, 4), 3: (8, 8), 4: (16, 16)}
FULL_BUDGET: tuple[int, int] = (25, 25)


def budgets_for_depth(depth: int) -> tuple[int, int]:
    return BUDGET_SCHEDULE.get(depth, FULL_BUDGET)


@dataclass(frozen=True)
class SuiteConfig:
    mode: Mode = Mode.ADGV
    t_m: float = scoring.DEFAULT_RECOVERY_THRESHOLD
    entail_direction: EntailDirection = EntailDirection.RIGHTWARD
    validator_config: ValidatorConfig = field(default_factory=ValidatorConfig)
    k_abductive: int = 40
    k_deductive: int = 10
    budget_override: tuple[int, int] | None = None  # (backward, forward)
    seed: int = 0
    workers: int = 1


@dataclass
class HypothesisRow:
    hypothesis_id: str
    text: str
    s_r: float
    s_e: float
    s: float
    recovered: bool
    proof_id: str | None = None
    rerank_score: float | None = None


@dataclass
class TreeletResult:
    treelet_id: str
    depth: int
    covered: bool
    yielded: int
    hypotheses: list[HypothesisRow] = field(default_factory=list)
    proof_count: int = 0
    proof_lengths: list[int] = field(default_factory=list)
    proof_scores: list[float] = field(default_factory=list)
    top_p_recall: float | None = None
    error: str | None = None


@dataclass
class EvalReport:
    mode: str
    seed: int
    backend_identity: str
    coverage_by_depth: dict[int, float]
    coverage_overall: float
    count_mean: float
    len_mean: float
    score_mean: float
    p_recall_mean: float
    rows: list[TreeletResult]
    failed: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "mode": self.mode,
                "seed": self.seed,
                "backend": self.backend_identity,
                "coverage_by_depth": {str(k): v for k, v in sorted(self.coverage_by_depth.items())},
                "coverage_overall": self.coverage_overall,
                "metrics": {
                    "count": self.count_mean,
                    "len": self.len_mean,
                    "score": self.score_mean,
                    "p_recall": self.p_recall_mean,
                },
                "failed": self.failed,
                "treelets": len(self.rows),
            },
            sort_keys=True,
        )

    def summary_table(self) -> str:
        lines = [
            f"mode={self.mode} seed={self.seed} backend={self.backend_identity}",
            "depth  coverage",
        ]
        for depth, cov in sorted(self.coverage_by_depth.items()):
            lines.append(f"{depth:>5}  {cov:8.2%}")
        lines.append(f"  all  {self.coverage_overall:8.2%}")
        lines.append(
            f"count={self.count_mean:.2f} len={self.len_mean:.2f} "
            f"score={self.score_mean:.2%} p_recall={self.p_recall_mean:.2%}"
        )
        if self.failed:
            lines.append(f"FAILED treelets: {self.failed}")
        return "\n".join(lines)


def premise_recall(proof: ProofTree, visible: Sequence) -> float:
    """Fraction of the visible premises appearing as leaves of the proof."""
    if not visible:
        return 0.0
    leaves = proof.leaves()
    used = sum(1 for p in visible if p.id in leaves)
    return used / len(visible)


def run_treelet(
    treelet: Treelet,
    backend: StepBackend,
    config: SuiteConfig,
) -> TreeletResult:
    backward, forward = config.budget_override or budgets_for_depth(treelet.depth)
    search_config = SearchConfig(
        mode=config.mode,
        k_abductive=config.k_abductive,
        k_deductive=config.k_deductive,
        forward_budget=forward,
        backward_budget=backward,
        validator_config=config.validator_config,
    )
    result = adgv_search(treelet.visible_premises, treelet.base.goal, search_config, backend)

    rows: list[HypothesisRow] = []
    recovered_rows: list[tuple[HypothesisRow, str]] = []
    for stmt in result.hypotheses:
        rec = scoring.recovery_score(
            stmt.text,
            treelet.missing.text,
            backend.entail,
            t_m=config.t_m,
            direction=config.entail_direction,
        )
        row = HypothesisRow(
            hypothesis_id=stmt.id,
            text=stmt.text,
            s_r=rec.s_r,
            s_e=rec.s_e,
            s=rec.s,
            recovered=rec.recovered,
        )
        rows.append(row)
        if rec.recovered:
            recovered_rows.append((row, stmt.id))

    proofs: list[ProofTree] = []
    proof_rows: dict[str, HypothesisRow] = {}
    for row, hid in recovered_rows:
        try:
            proof = assemble_proof(hid, result.state.events, result.state.statements)
        except IntegrityError as exc:
            row.proof_id = None
            return TreeletResult(
                treelet_id=treelet.id,
                depth=treelet.depth,
                covered=bool(recovered_rows),
                yielded=len(rows),
                hypotheses=rows,
                error=f"proof assembly failed: {exc}",
            )
        proofs.append(proof)
        proof_rows[hid] = row

    ranked = scoring.rerank_proofs(proofs, backend) if proofs else []
    res = TreeletResult(
        treelet_id=treelet.id,
        depth=treelet.depth,
        covered=bool(recovered_rows),
        yielded=len(rows),
        hypotheses=rows,
        proof_count=len(ranked),
    )
    for i, proof in enumerate(ranked):
        row = proof_rows[proof.recovered]
        row.proof_id = f"{treelet.id}/p{i}"
        row.rerank_score = proof.rerank_score
        res.proof_lengths.append(proof.length)
        res.proof_scores.append(proof.rerank_score or 0.0)
    if ranked:
        res.top_p_recall = premise_recall(ranked[0], treelet.visible_premises)
    return res


def run_suite(
    treelets: Sequence[Treelet],
    backend_for: Callable[[Treelet], StepBackend],
    config: SuiteConfig,
) -> EvalReport:
    """Evaluate every treelet and aggregate the coverage and tree metrics.

    Treelets are independent; with workers > 1 they run in a thread pool and
    results are aggregated in input order, so the report is reproducible for
    a fixed seed and deterministic backends.
    """
    if not treelets:
        raise ConfigError("empty treelet suite")

    identity = backend_for(treelets[0]).identity()

    def worker(treelet: Treelet) -> TreeletResult:
        try:
            return run_treelet(treelet, backend_for(treelet), config)
        except ProofSearchError as exc:
            return TreeletResult(
                treelet_id=treelet.id,
                depth=treelet.depth,
                covered=False,
                yielded=0,
                error=str(exc),
            )

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(worker, treelets))
    else:
        rows = [worker(t) for t in treelets]

    by_depth: dict[int, list[TreeletResult]] = {}
    for row in rows:
        by_depth.setdefault(row.depth, []).append(row)
    coverage_by_depth = {
        depth: sum(1 for r in group if r.covered) / len(group) for depth, group in by_depth.items()
    }
    coverage_overall = sum(1 for r in rows if r.covered) / len(rows)
    all_lengths = [l for r in rows for l in r.proof_lengths]
    all_scores = [s for r in rows for s in r.proof_scores]
    recalls = [r.top_p_recall for r in rows if r.top_p_recall is not None]
    return EvalReport(
        mode=config.mode.value,
        seed=config.seed,
        backend_identity=identity,
        coverage_by_depth=coverage_by_depth,
        coverage_overall=coverage_overall,
        count_mean=sum(r.proof_count for r in rows) / len(rows),
        len_mean=sum(all_lengths) / len(all_lengths) if all_lengths else 0.0,
        score_mean=sum(all_scores) / len(all_scores) if all_scores else 0.0,
        p_recall_mean=sum(recalls) / len(recalls) if recalls else 0.0,
        rows=rows,
        failed=sum(1 for r in rows if r.error),
    )


def write_report(report: EvalReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    summary_txt = out / "summary.txt"
    summary_txt.write_text(report.summary_table() + "\n", encoding="utf-8")
    paths.append(summary_txt)

    summary_json = out / "report.json"
    summary_json.write_text(report.to_json() + "\n", encoding="utf-8")
    paths.append(summary_json)

    details = out / "treelets.jsonl"
    with open(details, "w", encoding="utf-8") as handle:
        for row in report.rows:
            handle.write(
                json.dumps(
                    {
                        "treelet_id": row.treelet_id,
                        "depth": row.depth,
                        "covered": row.covered,
                        "yielded": row.yielded,
                        "proof_count": row.proof_count,
                        "top_p_recall": row.top_p_recall,
                        "error": row.error,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    paths.append(details)

    scores = out / "scores.jsonl"
    with open(scores, "w", encoding="utf-8") as handle:
        for row in report.rows:
            for hyp in row.hypotheses:
                handle.write(
                    json.dumps(
                        {
                            "treelet_id": row.treelet_id,
                            "hypothesis": hyp.text,
                            "s_r": hyp.s_r,
                            "s_e": hyp.s_e,
                            "s": hyp.s,
                            "recovered": hyp.recovered,
                            "proof_id": hyp.proof_id,
                            "rerank_score": hyp.rerank_score,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
    paths.append(scores)
    return paths
