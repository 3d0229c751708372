"""Surface-typed page representation and the targetability classifier.

The classifier is the anti-filter-bubble guard: news, Wikipedia, and
news-carousel content is never intervened on, and unknown element kinds fall
back to neutral so new page furniture is safe by default.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping

from .campaigns import Surface, canonical_json_bytes
from .matcher import normalize_domain
from .psl import PublicSuffixList


class ElementKind(Enum):
    ORGANIC_RESULT = "organic_result"
    AD = "ad"
    KNOWLEDGE_PANEL = "knowledge_panel"
    LOCAL_MAP_ENTRY = "local_map_entry"
    TWITTER_LINK = "twitter_link"
    NEWS_CAROUSEL_ITEM = "news_carousel_item"
    NEWS_ARTICLE = "news_article"
    WIKIPEDIA_ENTRY = "wikipedia_entry"
    THIRD_PARTY_COMMERCIAL = "third_party_commercial"
    AMAZON_PRODUCT_CARD = "amazon_product_card"
    OTHER = "other"


class Targetability(Enum):
    COMMERCIAL = "commercial"
    PROTECTED = "protected"
    NEUTRAL = "neutral"


CLASSIFICATION: Mapping[ElementKind, Targetability] = {
    ElementKind.ORGANIC_RESULT: Targetability.COMMERCIAL,
    ElementKind.AD: Targetability.COMMERCIAL,
    ElementKind.KNOWLEDGE_PANEL: Targetability.COMMERCIAL,
    ElementKind.LOCAL_MAP_ENTRY: Targetability.COMMERCIAL,
    ElementKind.TWITTER_LINK: Targetability.COMMERCIAL,
    ElementKind.THIRD_PARTY_COMMERCIAL: Targetability.COMMERCIAL,
    ElementKind.AMAZON_PRODUCT_CARD: Targetability.COMMERCIAL,
    ElementKind.NEWS_CAROUSEL_ITEM: Targetability.PROTECTED,
    ElementKind.NEWS_ARTICLE: Targetability.PROTECTED,
    ElementKind.WIKIPEDIA_ENTRY: Targetability.PROTECTED,
    ElementKind.OTHER: Targetability.NEUTRAL,
}


@dataclass(frozen=True)
class PageElement:
    id: str
    kind: ElementKind
    text: str
    urls: tuple[str, ...]
    rank: int


@dataclass(frozen=True)
class PageDoc:
    surface: Surface
    source_url: str
    query: str | None
    elements: tuple[PageElement, ...]


def classify_element(e: PageElement) -> Targetability:
    return CLASSIFICATION[e.kind]


def is_third_party_commercial(
    url: str, platform_list: Iterable[str], psl: PublicSuffixList | None = None
) -> bool:
    """True when the URL's registrable domain is a known listing/review platform."""
    platforms = frozenset(platform_list)
    if not platforms:
        return False
    return normalize_domain(url, psl) in platforms


@lru_cache(maxsize=1)
def bundled_platform_list() -> frozenset[str]:
    text = resources.files("outofsite.data").joinpath("third_party_platforms.txt").read_text("utf-8")
    return parse_platform_list(text)


def parse_platform_list(text: str) -> frozenset[str]:
    domains = set()
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        domains.add(line.lower())
    return frozenset(domains)


class PageDocParseError(ValueError):
    code = "PARSE_ERROR"


_PAGE_FIELDS = {"surface", "source_url", "query", "elements"}
_ELEMENT_FIELDS = {"id", "kind", "text", "urls", "rank"}


def _parse_element(data: Any, index: int) -> PageElement:
    where = f"elements[{index}]"
    if not isinstance(data, Mapping):
        raise PageDocParseError(f"{where} must be an object")
    for key in data:
        if key not in _ELEMENT_FIELDS:
            raise PageDocParseError(f"{where}: unknown field {key!r}")
    for key in sorted(_ELEMENT_FIELDS):
        if key not in data:
            raise PageDocParseError(f"{where}: missing field {key!r}")
    if not isinstance(data["id"], str) or not data["id"]:
        raise PageDocParseError(f"{where}: id must be a non-empty string")
    kinds = {k.value: k for k in ElementKind}
    if data["kind"] not in kinds:
        raise PageDocParseError(f"{where}: unknown element kind {data['kind']!r}")
    if not isinstance(data["text"], str):
        raise PageDocParseError(f"{where}: text must be a string")
    urls = data["urls"]
    if not isinstance(urls, list) or any(not isinstance(u, str) for u in urls):
        raise PageDocParseError(f"{where}: urls must be a list of strings")
    rank = data["rank"]
    if not isinstance(rank, int) or isinstance(rank, bool) or rank < 0:
        raise PageDocParseError(f"{where}: rank must be a non-negative integer")
    return PageElement(
        id=data["id"],
        kind=kinds[data["kind"]],
        text=data["text"],
        urls=tuple(urls),
        rank=rank,
    )


def parse_pagedoc(raw: bytes | str | Mapping) -> PageDoc:
    """Strict fixture decoder; the same structure the live extractor emits."""
    if isinstance(raw, (bytes, str)):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise PageDocParseError(f"invalid JSON: {exc.msg} at {exc.pos}") from None
    else:
        data = raw
    if not isinstance(data, Mapping):
        raise PageDocParseError("page document must be a JSON object")
    for key in data:
        if key not in _PAGE_FIELDS:
            raise PageDocParseError(f"unknown field {key!r}")
    for key in ("surface", "source_url", "elements"):
        if key not in data:
            raise PageDocParseError(f"missing field {key!r}")
    surfaces = {s.value: s for s in Surface}
    if data["surface"] not in surfaces:
        raise PageDocParseError(f"unknown surface {data['surface']!r}")
    if not isinstance(data["source_url"], str):
        raise PageDocParseError("source_url must be a string")
    query = data.get("query")
    if query is not None and not isinstance(query, str):
        raise PageDocParseError("query must be a string or null")
    if not isinstance(data["elements"], list):
        raise PageDocParseError("elements must be a list")
    elements = tuple(_parse_element(e, i) for i, e in enumerate(data["elements"]))
    seen: set[str] = set()
    for e in elements:
        if e.id in seen:
            raise PageDocParseError(f"duplicate element id {e.id!r}")
        seen.add(e.id)
    return PageDoc(
        surface=surfaces[data["surface"]],
        source_url=data["source_url"],
        query=query,
        elements=elements,
    )


def pagedoc_to_payload(p: PageDoc) -> dict:
    payload: dict = {
        "surface": p.surface.value,
        "source_url": p.source_url,
        "elements": [
            {
                "id": e.id,
                "kind": e.kind.value,
                "text": e.text,
                "urls": list(e.urls),
                "rank": e.rank,
            }
            for e in p.elements
        ],
    }
    if p.query is not None:
        payload["query"] = p.query
    return payload


def serialize_pagedoc(p: PageDoc) -> bytes:
    return canonical_json_bytes(pagedoc_to_payload(p))


def load_pagedoc(path: str | Path) -> PageDoc:
    return parse_pagedoc(Path(path).read_bytes())
