"""Organizer tooling: graph-driven target expansion, lint, offline replay."""
from .ownership import (
    DEFAULT_EDGE_KINDS,
    Entity,
    GraphParseError,
    OwnershipEdge,
    OwnershipGraph,
    UnknownEntityError,
    expand_targets,
    load_graph,
    parse_graph,
    reachable,
)
from .replay import (
    DEFAULT_STEP,
    REPLAY_EPOCH,
    FixtureResult,
    ReplayReport,
    render_table,
    report_to_payload,
    run_replay,
    serialize_report,
)

__all__ = [
    "DEFAULT_EDGE_KINDS",
    "DEFAULT_STEP",
    "Entity",
    "FixtureResult",
    "GraphParseError",
    "OwnershipEdge",
    "OwnershipGraph",
    "REPLAY_EPOCH",
    "ReplayReport",
    "UnknownEntityError",
    "expand_targets",
    "load_graph",
    "parse_graph",
    "reachable",
    "render_table",
    "report_to_payload",
    "run_replay",
    "serialize_report",
]
