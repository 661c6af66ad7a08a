"""Bridge command line: serve the endpoints or fine-tune a step model."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import BridgeConfig
from .training import TrainSettings, finetune


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    if args.config:
        config = BridgeConfig.from_file(args.config)
    else:
        config = BridgeConfig(
            deductive=args.deductive,
            abductive=args.abductive,
            port=args.port,
            device=args.device,
        )
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=config.port, log_level="info")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    settings = TrainSettings(
        epochs=args.epochs,
        lr=args.lr,
        hidden=args.hidden,
        seed=args.seed,
        device=args.device,
    )
    summary = finetune(args.kind, args.data, args.out, settings)
    print(json.dumps({"rows": summary["rows"], "final_loss": summary["losses"][-1], "artifact": summary["artifact"]}))
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(prog="proofbridge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="serve the wire protocol")
    p.add_argument("--config", default=None, help="JSON bridge config file")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--deductive", default="stub", help="'stub' or artifact path")
    p.add_argument("--abductive", default="stub", help="'stub' or artifact path")
    p.add_argument("--device", default="cpu")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("train", help="fine-tune a step model on a training-example file")
    p.add_argument("--kind", choices=["deductive-step", "abductive-step"], required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--lr", type=float, default=5e-3)
    p.add_argument("--hidden", type=int, default=96)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--device", default="cpu")
    p.set_defaults(func=cmd_train)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
