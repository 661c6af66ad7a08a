"""Command-line entry point binding datasets, backends, search and evaluation.

Every command writes only inside its --out directory and drops a manifest
there (config snapshot, input hashes, backend identity, seed, artifact list)
sufficient to replay the run.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import random
import sys
from pathlib import Path

from . import dataset, harness, oracle, scoring
from .backends import RemoteBackend, StepBackend
from .errors import ConfigError, ProofSearchError
from .harness import SuiteConfig
from .oracle import OracleBackend, OracleWorld
from .search import Mode, SearchConfig, adgv_search
from .trees import Treelet, assemble_proof, slice_treelets
from .validators import ValidatorConfig


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_dir: Path, command: str, args: argparse.Namespace,
                    inputs: list[Path], artifacts: list[Path],
                    backend_identity: str | None = None, run: dict | None = None) -> None:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    if run is not None:
        config["resolved"] = run
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "backend": backend_identity,
        "seed": (run or {}).get("seed", getattr(args, "seed", None)),
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "artifacts": [str(p.relative_to(out_dir)) for p in artifacts],
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


def _make_backend(spec: str, world_facts: list[str] | None = None) -> StepBackend:
    if spec.startswith("oracle:"):
        world_file = spec[len("oracle:"):]
        if world_file:
            obj = json.loads(Path(world_file).read_text(encoding="utf-8"))
            return OracleBackend(OracleWorld.from_texts(obj.get("facts", [])))
        return OracleBackend(OracleWorld.from_texts(world_facts or []))
    if spec.startswith("remote:"):
        return RemoteBackend(spec[len("remote:"):])
    raise ConfigError(f"unknown backend spec {spec!r}; use oracle:<world-file> or remote:<url>")


#: run-config keys and their built-in defaults; flags beat the config file,
#: the config file beats these.
_RUN_DEFAULTS = {
    "mode": "adgv",
    "backend": "oracle:",
    "k": 40,
    "k_prime": 10,
    "forward_budget": None,  # None = per-depth schedule
    "backward_budget": None,
    "t_d": 0.7,
    "t_a": 0.7,
    "t_m": 0.7,
    "eta": 1,
    "seed": 0,
    "workers": 1,
}


def _search_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="JSON run-config file; explicit flags win")
    parser.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    parser.add_argument("--backend", default=None, help="oracle:<world-file> or remote:<url>")
    parser.add_argument("--k", type=int, default=None, help="abductive samples per step")
    parser.add_argument("--k-prime", type=int, default=None, help="deductive samples per step")
    parser.add_argument("--forward-budget", type=int, default=None)
    parser.add_argument("--backward-budget", type=int, default=None)
    parser.add_argument("--t-d", type=float, default=None)
    parser.add_argument("--t-a", type=float, default=None)
    parser.add_argument("--t-m", type=float, default=None)
    parser.add_argument("--eta", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)


def _resolve_run_config(args: argparse.Namespace) -> dict:
    from_file = {}
    if getattr(args, "config", None):
        from_file = json.loads(Path(args.config).read_text(encoding="utf-8"))
        unknown = set(from_file) - set(_RUN_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown run-config keys: {sorted(unknown)}")
    resolved = {}
    for key, default in _RUN_DEFAULTS.items():
        flag = getattr(args, key, None)
        resolved[key] = flag if flag is not None else from_file.get(key, default)
    return resolved


def _validator_config(run: dict) -> ValidatorConfig:
    return ValidatorConfig(t_d=run["t_d"], t_a=run["t_a"], eta=run["eta"])


def cmd_import(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    in_path = Path(args.input)
    trees = []
    if args.format == "dsl":
        for record in dataset.read_dsl_records(in_path):
            trees.append(dataset.parse_proof_dsl(record))
    else:
        trees = list(dataset.read_canonical(in_path))
    out_path = out_dir / "trees.jsonl"
    count = dataset.write_canonical(trees, out_path)
    mean_steps = sum(len(t.steps) for t in trees) / count if count else 0.0
    print(f"imported {count} trees, mean steps {mean_steps:.2f}")
    _write_manifest(out_dir, "import", args, [in_path], [out_path])
    return 0


def cmd_slice(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    in_path = Path(args.trees)
    treelets: list[Treelet] = []
    for tree in dataset.read_canonical(in_path):
        treelets.extend(slice_treelets(tree))
    if args.depth is not None:
        treelets = [t for t in treelets if t.depth == args.depth]
    if args.sample is not None:
        if args.sample > len(treelets):
            print(f"error: requested {args.sample} treelets but only {len(treelets)} exist", file=sys.stderr)
            return 1
        rng = random.Random(args.seed)
        treelets = rng.sample(treelets, args.sample)
    out_path = out_dir / "treelets.jsonl"
    count = dataset.write_treelets((dataset.treelet_to_record(t) for t in treelets), out_path)
    print(f"sliced {count} treelets")
    _write_manifest(out_dir, "slice", args, [in_path], [out_path])
    return 0


def _load_treelets(path: Path) -> list[tuple[Treelet, list[str] | None]]:
    return list(dataset.read_treelets(path))


def cmd_search(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    in_path = Path(args.treelets)
    run = _resolve_run_config(args)
    loaded = _load_treelets(in_path)
    vc = _validator_config(run)
    artifacts: list[Path] = []
    hyp_path = out_dir / "hypotheses.jsonl"
    proof_path = out_dir / "proofs.jsonl"
    identity = None
    with open(hyp_path, "w", encoding="utf-8") as hyp_out, open(proof_path, "w", encoding="utf-8") as proof_out:
        for treelet, facts in loaded:
            backend = _make_backend(run["backend"], facts)
            identity = identity or backend.identity()
            backward, forward = harness.budgets_for_depth(treelet.depth)
            config = SearchConfig(
                mode=Mode(run["mode"]),
                k_abductive=run["k"],
                k_deductive=run["k_prime"],
                forward_budget=run["forward_budget"] if run["forward_budget"] is not None else forward,
                backward_budget=run["backward_budget"] if run["backward_budget"] is not None else backward,
                validator_config=vc,
            )
            result = adgv_search(treelet.visible_premises, treelet.base.goal, config, backend)
            event_path = out_dir / f"events-{treelet.id.replace('/', '_')}.jsonl"
            event_path.write_text("\n".join(result.state.event_log_lines()) + "\n", encoding="utf-8")
            artifacts.append(event_path)
            proof_index = 0
            for stmt in result.hypotheses:
                rec = scoring.recovery_score(stmt.text, treelet.missing.text, backend.entail, t_m=run["t_m"])
                hyp_out.write(json.dumps({
                    "treelet_id": treelet.id,
                    "hypothesis": stmt.text,
                    "s_r": rec.s_r,
                    "s_e": rec.s_e,
                    "s": rec.s,
                    "recovered": rec.recovered,
                }, sort_keys=True) + "\n")
                if rec.recovered:
                    proof = assemble_proof(stmt.id, result.state.events, result.state.statements)
                    ranked = scoring.rerank_proofs([proof], backend)[0]
                    proof_out.write(json.dumps({
                        "treelet_id": treelet.id,
                        "proof_id": f"{treelet.id}/p{proof_index}",
                        "recovered": stmt.text,
                        "rerank_score": ranked.rerank_score,
                        "steps": [
                            {
                                "inputs": [ranked.statements[i].text for i in s.inputs],
                                "output": ranked.statements[s.output].text,
                            }
                            for s in ranked.steps
                        ],
                    }, sort_keys=True) + "\n")
                    proof_index += 1
                    print(f"{treelet.id}: recovered premise: {stmt.text!r} (E={rec.s:.3f})")
    artifacts.extend([hyp_path, proof_path])
    _write_manifest(out_dir, "search", args, [in_path], artifacts, backend_identity=identity, run=run)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    in_path = Path(args.treelets)
    run = _resolve_run_config(args)
    loaded = _load_treelets(in_path)
    facts_by_id = {t.id: facts for t, facts in loaded}
    treelets = [t for t, _ in loaded]

    def backend_for(treelet: Treelet) -> StepBackend:
        return _make_backend(run["backend"], facts_by_id.get(treelet.id))

    config = SuiteConfig(
        mode=Mode(run["mode"]),
        t_m=run["t_m"],
        validator_config=_validator_config(run),
        k_abductive=run["k"],
        k_deductive=run["k_prime"],
        budget_override=(
            (run["backward_budget"], run["forward_budget"])
            if run["backward_budget"] is not None and run["forward_budget"] is not None
            else None
        ),
        seed=run["seed"],
        workers=run["workers"],
    )
    report = harness.run_suite(treelets, backend_for, config)
    artifacts = harness.write_report(report, out_dir)
    print(report.summary_table())
    _write_manifest(out_dir, "eval", args, [in_path], artifacts, backend_identity=report.backend_identity, run=run)
    return 1 if report.failed else 0


def cmd_score(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    treelet_path = Path(args.treelets)
    hyp_path = Path(args.hypotheses)
    loaded = _load_treelets(treelet_path)
    by_id = {t.id: (t, facts) for t, facts in loaded}
    out_path = out_dir / "scores.jsonl"
    n = recovered = 0
    with open(hyp_path, encoding="utf-8") as src, open(out_path, "w", encoding="utf-8") as dst:
        for line in src:
            if not line.strip():
                continue
            obj = json.loads(line)
            if obj["treelet_id"] not in by_id:
                print(f"error: unknown treelet {obj['treelet_id']}", file=sys.stderr)
                return 1
            treelet, facts = by_id[obj["treelet_id"]]
            backend = _make_backend(args.backend, facts)
            rec = scoring.recovery_score(obj["hypothesis"], treelet.missing.text, backend.entail, t_m=args.t_m)
            dst.write(json.dumps({
                "treelet_id": treelet.id,
                "hypothesis": obj["hypothesis"],
                "s_r": rec.s_r,
                "s_e": rec.s_e,
                "s": rec.s,
                "recovered": rec.recovered,
                "proof_id": obj.get("proof_id"),
                "rerank_score": obj.get("rerank_score"),
            }, sort_keys=True) + "\n")
            n += 1
            recovered += rec.recovered
    print(f"scored {n} hypotheses, {recovered} recovered at t_m={args.t_m}")
    _write_manifest(out_dir, "score", args, [treelet_path, hyp_path], [out_path])
    return 0


def cmd_make_training_data(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    in_path = Path(args.trees)
    examples = []
    for tree in dataset.read_canonical(in_path):
        if args.kind == "deductive":
            examples.extend(dataset.build_deductive_training_examples(tree))
        elif args.kind == "abductive":
            examples.extend(dataset.build_abductive_training_examples(tree))
        else:
            examples.extend(
                dataset.build_heuristic_training_pairs(tree, args.negatives_per_positive, args.seed)
            )
    out_path = out_dir / f"{args.kind}.jsonl"
    count = dataset.write_training_examples(examples, out_path)
    print(f"wrote {count} {args.kind} training examples")
    _write_manifest(out_dir, "make-training-data", args, [in_path], [out_path])
    return 0


def cmd_gen_oracle_suite(args: argparse.Namespace) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cases = oracle.generate_suite(args.n, args.depth, args.seed)
    out_path = out_dir / "treelets.jsonl"
    count = dataset.write_treelets(
        (dataset.treelet_to_record(c.treelet, world_facts=c.world.fact_texts()) for c in cases),
        out_path,
    )
    print(f"generated {count} depth-{args.depth} oracle treelets")
    _write_manifest(out_dir, "gen-oracle-suite", args, [], [out_path])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proofsearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("import", help="parse a proof-DSL corpus into the canonical tree format")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["dsl", "canonical"], default="dsl")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("slice", help="slice canonical trees into ablated treelets")
    p.add_argument("--trees", required=True)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--sample", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("search", help="run the bidirectional search over a treelet file")
    p.add_argument("--treelets", required=True)
    p.add_argument("--out", required=True)
    _search_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("eval", help="run a mode over a treelet suite and report coverage")
    p.add_argument("--treelets", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    _search_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("score", help="score a hypotheses file against treelet gold premises")
    p.add_argument("--treelets", required=True)
    p.add_argument("--hypotheses", required=True)
    p.add_argument("--backend", default="oracle:")
    p.add_argument("--t-m", type=float, default=0.7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("make-training-data", help="build step-model or heuristic training files")
    p.add_argument("--trees", required=True)
    p.add_argument("--kind", choices=["deductive", "abductive", "heuristic"], required=True)
    p.add_argument("--negatives-per-positive", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_make_training_data)

    p = sub.add_parser("gen-oracle-suite", help="generate a deterministic oracle treelet suite")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--depth", type=int, choices=[1, 2], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_oracle_suite)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProofSearchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
