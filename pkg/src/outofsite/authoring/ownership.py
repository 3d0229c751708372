"""Ownership graphs and target expansion.

A graph file is line-oriented UTF-8 with tab-separated records, so dumps from
external data sources convert with a one-line script:

    # comment
    node<TAB>amazon<TAB>Amazon.com<TAB>domains=amazon.com<TAB>aliases=Amazon
    node<TAB>goodreads<TAB>Goodreads<TAB>domains=goodreads.com
    edge<TAB>amazon<TAB>goodreads<TAB>kind=subsidiary

Expansion walks ownership edges from the given roots (cycle-safe) and unions
names, aliases, and normalized domains over everything reached. Edge kinds
narrow which relationships count as ownership; subsidiaries and brands do by
default, so e.g. minority-stake edges can be recorded without being expanded.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from ..matcher import NotAUrlError, normalize_domain
from ..psl import PublicSuffixList, bundled_psl

DEFAULT_EDGE_KINDS = frozenset({"subsidiary", "brand"})


class GraphParseError(ValueError):
    code = "GRAPH_PARSE_ERROR"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class UnknownEntityError(KeyError):
    code = "UNKNOWN_ENTITY"


@dataclass(frozen=True)
class Entity:
    entity_id: str
    name: str
    domains: frozenset[str] = frozenset()
    aliases: frozenset[str] = frozenset()


@dataclass(frozen=True)
class OwnershipEdge:
    parent: str
    child: str
    kind: str = "subsidiary"


@dataclass(frozen=True)
class OwnershipGraph:
    entities: Mapping[str, Entity]
    edges: tuple[OwnershipEdge, ...]

    def children(self, entity_id: str, edge_kinds: frozenset[str]) -> list[str]:
        return [e.child for e in self.edges if e.parent == entity_id and e.kind in edge_kinds]


def _split_kv(fields: list[str], allowed: set[str], line: int) -> dict[str, str]:
    out: dict[str, str] = {}
    for raw in fields:
        key, sep, value = raw.partition("=")
        if not sep or key not in allowed:
            raise GraphParseError(f"expected one of {sorted(allowed)} as key=value, got {raw!r}",
                                  line)
        if key in out:
            raise GraphParseError(f"duplicate key {key!r}", line)
        out[key] = value
    return out


def _csv(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def parse_graph(text: str, psl: PublicSuffixList | None = None) -> OwnershipGraph:
    psl = psl if psl is not None else bundled_psl()
    entities: dict[str, Entity] = {}
    edges: list[OwnershipEdge] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        record = fields[0]
        if record == "node":
            if len(fields) < 3:
                raise GraphParseError("node needs at least id and name", lineno)
            entity_id, name = fields[1], fields[2]
            if not entity_id or not name:
                raise GraphParseError("node id and name must be non-empty", lineno)
            if entity_id in entities:
                raise GraphParseError(f"duplicate node {entity_id!r}", lineno)
            kv = _split_kv(fields[3:], {"domains", "aliases"}, lineno)
            domains = []
            for d in _csv(kv.get("domains", "")):
                try:
                    domains.append(normalize_domain(d, psl))
                except NotAUrlError:
                    raise GraphParseError(f"bad domain {d!r}", lineno) from None
            entities[entity_id] = Entity(
                entity_id=entity_id,
                name=name,
                domains=frozenset(domains),
                aliases=frozenset(_csv(kv.get("aliases", ""))),
            )
        elif record == "edge":
            if len(fields) < 3:
                raise GraphParseError("edge needs parent and child", lineno)
            parent, child = fields[1], fields[2]
            kv = _split_kv(fields[3:], {"kind"}, lineno)
            kind = kv.get("kind", "subsidiary")
            if not kind:
                raise GraphParseError("edge kind must be non-empty", lineno)
            edges.append(OwnershipEdge(parent=parent, child=child, kind=kind))
        else:
            raise GraphParseError(f"unknown record type {record!r}", lineno)
    for e in edges:
        for endpoint in (e.parent, e.child):
            if endpoint not in entities:
                raise GraphParseError(f"edge endpoint {endpoint!r} is not a node", 0)
    return OwnershipGraph(entities=dict(entities), edges=tuple(edges))


def load_graph(path: str | Path, psl: PublicSuffixList | None = None) -> OwnershipGraph:
    return parse_graph(Path(path).read_text(encoding="utf-8"), psl)


def reachable(
    g: OwnershipGraph,
    roots: Iterable[str],
    edge_kinds: frozenset[str] = DEFAULT_EDGE_KINDS,
) -> set[str]:
    """Every entity reachable from the roots via ownership edges, roots
    included. Plain BFS with a seen-set, so cycles terminate."""
    roots = list(roots)
    for root in roots:
        if root not in g.entities:
            raise UnknownEntityError(root)
    seen: set[str] = set()
    frontier = list(roots)
    while frontier:
        current = frontier.pop()
        if current in seen:
            continue
        seen.add(current)
        frontier.extend(g.children(current, edge_kinds))
    return seen


def expand_targets(
    roots: Iterable[str],
    g: OwnershipGraph,
    edge_kinds: frozenset[str] = DEFAULT_EDGE_KINDS,
) -> tuple[frozenset[str], frozenset[str]]:
    """(keywords, domains) for a campaign covering the whole ownership tree."""
    keywords: set[str] = set()
    domains: set[str] = set()
    for entity_id in reachable(g, roots, edge_kinds):
        entity = g.entities[entity_id]
        keywords.add(entity.name)
        keywords.update(entity.aliases)
        domains.update(entity.domains)
    return frozenset(keywords), frozenset(domains)
