"""Run the registry as a local HTTP service.

    python -m outofsite.registry --db registry.sqlite --config config.json

The config file holds reviewer credentials and optional seed offsets:

    {
      "reviewer_tokens": {"s3cret-token": "reviewer-name"},
      "seeds": {"grabyourwallet": {"participants": 12}}
    }
"""
from __future__ import annotations

import argparse
import json
from pathlib import Path

import uvicorn

from .service import create_app
from .store import RegistryStore


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="outofsite-registry", description=__doc__)
    parser.add_argument("--db", default="registry.sqlite", help="sqlite database path")
    parser.add_argument("--config", help="JSON config with reviewer_tokens and seeds")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8400)
    args = parser.parse_args(argv)

    reviewer_tokens = {}
    seeds = {}
    if args.config:
        config = json.loads(Path(args.config).read_text(encoding="utf-8"))
        reviewer_tokens = config.get("reviewer_tokens", {})
        seeds = config.get("seeds", {})

    store = RegistryStore(args.db)
    for campaign_id, offsets in seeds.items():
        store.set_seeds(campaign_id, **offsets)
    app = create_app(store, reviewer_tokens=reviewer_tokens)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
