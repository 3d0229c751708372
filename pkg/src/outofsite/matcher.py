"""Compiled keyword/domain matching.

Keywords are matched case-insensitively at token boundaries using a
multi-pattern automaton built once per campaign set. Domains are matched at
registrable-domain granularity, so every subdomain of a targeted domain hits
and nothing else does.
"""
from __future__ import annotations

import ipaddress
import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Sequence
from urllib.parse import urlsplit

from .psl import NoRegistrableDomainError, PublicSuffixList, bundled_psl

if TYPE_CHECKING:
    from .campaigns import Campaign


class NotAUrlError(ValueError):
    code = "NOT_A_URL"


class TargetKind(Enum):
    KEYWORD = "keyword"
    DOMAIN = "domain"


@dataclass(frozen=True)
class TargetHit:
    campaign_id: str
    target_label: str
    kind: TargetKind
    offset: int | None = None  # start offset in the case-normalized text; None for domain hits


_LABEL_RE = re.compile(r"[a-z0-9_](?:[a-z0-9_-]*[a-z0-9_])?")
_SCHEME_ONLY_RE = re.compile(r"^[a-zA-Z][a-zA-Z0-9+.\-]*:(?!//)")


def normalize_domain(url: str, psl: PublicSuffixList | None = None) -> str:
    """Reduce any URL-ish string to its lowercase registrable domain.

    Scheme, userinfo, port, path and trailing dots are stripped; IP hosts are
    returned verbatim. Inputs without a scheme are treated as host-first
    ("tommy.com/x"), except scheme-only URIs like "mailto:" which carry no
    host at all.
    """
    rules = psl if psl is not None else bundled_psl()
    s = url.strip()
    if not s:
        raise NotAUrlError("empty URL")
    if "://" in s:
        target = s
    elif _SCHEME_ONLY_RE.match(s) and "." not in s.split(":", 1)[0]:
        raise NotAUrlError(f"no host in {url!r}")
    else:
        target = "//" + s
    try:
        host = urlsplit(target).hostname
    except ValueError as exc:
        raise NotAUrlError(f"unparseable URL {url!r}: {exc}") from None
    if not host:
        raise NotAUrlError(f"no host in {url!r}")
    host = host.rstrip(".")
    if not host:
        raise NotAUrlError(f"no host in {url!r}")
    try:
        ipaddress.ip_address(host)
        return host
    except ValueError:
        pass
    labels = []
    for label in host.split("."):
        if not label:
            raise NotAUrlError(f"empty label in host of {url!r}")
        if not label.isascii():
            try:
                label = label.encode("idna").decode("ascii")
            except UnicodeError:
                raise NotAUrlError(f"undecodable label in {url!r}") from None
        if not _LABEL_RE.fullmatch(label):
            raise NotAUrlError(f"invalid label {label!r} in {url!r}")
        labels.append(label)
    try:
        return rules.registrable_domain(".".join(labels))
    except NoRegistrableDomainError as exc:
        raise NotAUrlError(str(exc)) from None


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


class _AcNode:
    __slots__ = ("goto", "fail", "out")

    def __init__(self) -> None:
        self.goto: dict[str, int] = {}
        self.fail = 0
        self.out: list[int] = []


class KeywordAutomaton:
    """Multi-pattern scanner over case-normalized text."""

    def __init__(self, patterns: Sequence[str]):
        self.patterns = tuple(patterns)
        self._nodes = [_AcNode()]
        for idx, pattern in enumerate(self.patterns):
            self._add(pattern, idx)
        self._link_failures()

    def _add(self, pattern: str, idx: int) -> None:
        state = 0
        for ch in pattern:
            nxt = self._nodes[state].goto.get(ch)
            if nxt is None:
                self._nodes.append(_AcNode())
                nxt = len(self._nodes) - 1
                self._nodes[state].goto[ch] = nxt
            state = nxt
        self._nodes[state].out.append(idx)

    def _link_failures(self) -> None:
        queue: deque[int] = deque()
        for child in self._nodes[0].goto.values():
            self._nodes[child].fail = 0
            queue.append(child)
        while queue:
            state = queue.popleft()
            for ch, child in self._nodes[state].goto.items():
                queue.append(child)
                fail = self._nodes[state].fail
                while fail and ch not in self._nodes[fail].goto:
                    fail = self._nodes[fail].fail
                fail_child = self._nodes[fail].goto.get(ch, 0)
                if fail_child == child:
                    fail_child = 0
                self._nodes[child].fail = fail_child
                self._nodes[child].out.extend(self._nodes[fail_child].out)

    def scan(self, text: str) -> Iterator[tuple[int, int]]:
        """Yield (pattern index, end offset) for every occurrence."""
        state = 0
        for pos, ch in enumerate(text):
            while state and ch not in self._nodes[state].goto:
                state = self._nodes[state].fail
            state = self._nodes[state].goto.get(ch, 0)
            for idx in self._nodes[state].out:
                yield idx, pos + 1


@dataclass(frozen=True)
class CompiledMatcher:
    campaigns: tuple = ()
    psl: PublicSuffixList = field(default_factory=bundled_psl)
    _automaton: KeywordAutomaton = field(default_factory=lambda: KeywordAutomaton(()))
    # owners[i] lists (campaign_id, authored label) for pattern i
    _owners: tuple[tuple[tuple[str, str], ...], ...] = ()
    _domain_index: Mapping[str, tuple[tuple[str, str], ...]] = field(default_factory=dict)

    def with_campaigns(self, extra: Iterable[Campaign]) -> CompiledMatcher:
        return build_matcher(list(self.campaigns) + list(extra), psl=self.psl)

    def text_matches(self, text: str) -> list[TargetHit]:
        low = text.lower()
        if not low or not self._owners:
            return []
        earliest: dict[tuple[str, str], int] = {}
        for idx, end in self._automaton.scan(low):
            start = end - len(self._automaton.patterns[idx])
            if start > 0 and _is_word_char(low[start - 1]):
                continue
            if end < len(low) and _is_word_char(low[end]):
                continue
            for owner in self._owners[idx]:
                if owner not in earliest or start < earliest[owner]:
                    earliest[owner] = start
        hits = [
            TargetHit(cid, label, TargetKind.KEYWORD, offset)
            for (cid, label), offset in earliest.items()
        ]
        hits.sort(key=lambda h: (h.offset, h.campaign_id, h.target_label))
        return hits

    def url_hits(self, url: str) -> list[TargetHit]:
        domain = normalize_domain(url, self.psl)
        owners = self._domain_index.get(domain, ())
        return [TargetHit(cid, label, TargetKind.DOMAIN) for cid, label in owners]

    def url_matches(self, url: str) -> TargetHit | None:
        hits = self.url_hits(url)
        return hits[0] if hits else None


def build_matcher(campaigns: Iterable[Campaign], psl: PublicSuffixList | None = None) -> CompiledMatcher:
    rules = psl if psl is not None else bundled_psl()
    ordered = tuple(sorted(campaigns, key=lambda c: c.id))
    pattern_owners: dict[str, list[tuple[str, str]]] = {}
    domain_owners: dict[str, list[tuple[str, str]]] = {}
    for c in ordered:
        for keyword in sorted(c.keywords):
            pattern_owners.setdefault(keyword.lower(), []).append((c.id, keyword))
        for domain in sorted(c.domains):
            domain_owners.setdefault(domain, []).append((c.id, domain))
    patterns = tuple(sorted(pattern_owners))
    owners = tuple(tuple(sorted(pattern_owners[p])) for p in patterns)
    domain_index = {d: tuple(sorted(v)) for d, v in domain_owners.items()}
    return CompiledMatcher(
        campaigns=ordered,
        psl=rules,
        _automaton=KeywordAutomaton(patterns),
        _owners=owners,
        _domain_index=domain_index,
    )


def text_matches(text: str, m: CompiledMatcher) -> list[TargetHit]:
    return m.text_matches(text)


def url_hits(url: str, m: CompiledMatcher) -> list[TargetHit]:
    return m.url_hits(url)


def url_matches(url: str, m: CompiledMatcher) -> TargetHit | None:
    return m.url_matches(url)
