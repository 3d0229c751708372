"""Privacy-limited event capture, local counters, batching, and share text.

Events carry no URL, no query, and no element text: only campaign id, surface,
intervention, element kind, a count, and an hour-bucketed timestamp. Batches
are delivered at least once; the server deduplicates by
(install_id, bucket_time, campaign_id, surface, intervention, element_kind),
which is sound because clients only ship closed hour buckets.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from typing import Any, Iterable, Mapping

from .campaigns import Campaign, InterventionType, Surface
from .pages import ElementKind
from .timeutil import ensure_utc, floor_to_hour, parse_rfc3339, rfc3339

SCHEMA_VERSION = 1
FLUSH_INTERVAL = timedelta(hours=24)
BATCH_SPAN_LIMIT = timedelta(hours=24)

# wire value of element_kind for navigation interruptions
NAVIGATION_KIND = "navigation"

COUNTER_FIELDS = ("visits_blocked", "results_altered", "products_hidden")

SHARE_TEMPLATE = (
    "I boycotted {n} websites to support #{campaign_hashtag} using Out of Site "
    "(a Chrome extension). Join me now: {join_url}. "
    "Read about the campaign: {info_url}."
)


@dataclass(frozen=True)
class EventRecord:
    campaign_id: str
    surface: Surface
    intervention: InterventionType
    element_kind: ElementKind | None  # None for navigation interruptions
    count: int
    bucket_time: datetime  # truncated to the hour, UTC

    def element_kind_wire(self) -> str:
        return self.element_kind.value if self.element_kind is not None else NAVIGATION_KIND


@dataclass(frozen=True)
class MetricsBatch:
    install_id: str
    schema_version: int
    events: tuple[EventRecord, ...]
    sent_at: datetime
    enrolled_campaigns: tuple[str, ...] = ()


@dataclass(frozen=True)
class ContributionSummary:
    campaign_id: str
    visits_blocked: int = 0
    results_altered: int = 0
    products_hidden: int = 0


# aggregation key within one install; the server prefixes install_id
EventKey = tuple[datetime, str, str, str, str]


def event_key(e: EventRecord) -> EventKey:
    return (e.bucket_time, e.campaign_id, e.surface.value, e.intervention.value,
            e.element_kind_wire())


def counter_field(e: EventRecord) -> str:
    """Which public counter an event feeds."""
    if e.surface is Surface.NAVIGATION:
        return "visits_blocked"
    if e.surface is Surface.AMAZON_SEARCH and e.intervention is InterventionType.FILTER:
        return "products_hidden"
    return "results_altered"


@dataclass(frozen=True)
class MetricsStore:
    pending: Mapping[EventKey, int] = field(default_factory=dict)
    totals: Mapping[str, ContributionSummary] = field(default_factory=dict)
    last_flush: datetime | None = None


def fresh_store() -> MetricsStore:
    return MetricsStore()


def record(events: Iterable[EventRecord], store: MetricsStore) -> MetricsStore:
    """Fold engine events into pending uploads and lifetime counters."""
    events = tuple(events)
    if not events:
        return store
    pending = dict(store.pending)
    totals = dict(store.totals)
    for e in events:
        if e.count <= 0:
            raise ValueError("event count must be positive")
        if e.bucket_time != floor_to_hour(e.bucket_time):
            raise ValueError("bucket_time must be hour-aligned")
        key = event_key(e)
        pending[key] = pending.get(key, 0) + e.count
        summary = totals.get(e.campaign_id, ContributionSummary(e.campaign_id))
        fld = counter_field(e)
        totals[e.campaign_id] = replace(summary, **{fld: getattr(summary, fld) + e.count})
    return replace(store, pending=pending, totals=totals)


def contribution_summary(store: MetricsStore, campaign_id: str) -> ContributionSummary:
    return store.totals.get(campaign_id, ContributionSummary(campaign_id))


def campaign_hashtag(campaign: Campaign) -> str:
    return "".join(campaign.name.split())


def build_share_message(campaign: Campaign, n: int, join_url: str, info_url: str) -> str:
    if n < 0:
        raise ValueError("contribution count must be non-negative")
    return SHARE_TEMPLATE.format(
        n=n, campaign_hashtag=campaign_hashtag(campaign), join_url=join_url, info_url=info_url
    )


def _closed_pending(store: MetricsStore, now: datetime) -> dict[EventKey, int]:
    """Pending entries whose hour bucket is over; open buckets stay local so a
    key's count can never grow between duplicate deliveries."""
    horizon = floor_to_hour(now)
    return {k: v for k, v in store.pending.items() if k[0] < horizon}


def flush_batch(
    store: MetricsStore,
    install_id: str,
    now: datetime,
    *,
    force: bool = False,
    enrolled_campaigns: Iterable[str] = (),
) -> tuple[MetricsBatch | None, MetricsStore]:
    """Emit a batch when due. Pending entries are only removed by
    acknowledge_batch after the upload is confirmed."""
    now = ensure_utc(now)
    due = force or store.last_flush is None or (now - store.last_flush) >= FLUSH_INTERVAL
    if not due:
        return None, store
    closed = _closed_pending(store, now)
    if not closed:
        return None, store
    earliest = min(k[0] for k in closed)
    window_end = earliest + BATCH_SPAN_LIMIT
    events = tuple(
        EventRecord(
            campaign_id=k[1],
            surface=Surface(k[2]),
            intervention=InterventionType(k[3]),
            element_kind=None if k[4] == NAVIGATION_KIND else ElementKind(k[4]),
            count=count,
            bucket_time=k[0],
        )
        for k, count in sorted(closed.items())
        if k[0] < window_end
    )
    batch = MetricsBatch(
        install_id=install_id,
        schema_version=SCHEMA_VERSION,
        events=events,
        sent_at=now,
        enrolled_campaigns=tuple(sorted(set(enrolled_campaigns))),
    )
    return batch, replace(store, last_flush=now)


def acknowledge_batch(store: MetricsStore, batch: MetricsBatch) -> MetricsStore:
    """Drop delivered events from the pending set once the server confirmed."""
    pending = dict(store.pending)
    for e in batch.events:
        key = event_key(e)
        remaining = pending.get(key, 0) - e.count
        if remaining > 0:
            pending[key] = remaining
        else:
            pending.pop(key, None)
    return replace(store, pending=pending)


def enrollment_ping(install_id: str, campaign_ids: Iterable[str], now: datetime) -> MetricsBatch:
    """Zero-event batch announcing enrollment, so participant counts exist
    before the first intervention."""
    return MetricsBatch(
        install_id=install_id,
        schema_version=SCHEMA_VERSION,
        events=(),
        sent_at=ensure_utc(now),
        enrolled_campaigns=tuple(sorted(set(campaign_ids))),
    )


class BatchParseError(ValueError):
    code = "SCHEMA_ERROR"


_BATCH_FIELDS = {"install_id", "schema_version", "events", "sent_at", "enrolled_campaigns"}
_EVENT_FIELDS = {"campaign_id", "surface", "intervention", "element_kind", "count", "bucket_time"}


def batch_to_payload(batch: MetricsBatch) -> dict:
    return {
        "schema_version": batch.schema_version,
        "install_id": batch.install_id,
        "sent_at": rfc3339(batch.sent_at),
        "enrolled_campaigns": list(batch.enrolled_campaigns),
        "events": [
            {
                "campaign_id": e.campaign_id,
                "surface": e.surface.value,
                "intervention": e.intervention.value,
                "element_kind": e.element_kind_wire(),
                "count": e.count,
                "bucket_time": rfc3339(e.bucket_time),
            }
            for e in batch.events
        ],
    }


def serialize_batch(batch: MetricsBatch) -> bytes:
    payload = batch_to_payload(batch)
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def _parse_event(data: Any, index: int) -> EventRecord:
    where = f"events[{index}]"
    if not isinstance(data, Mapping):
        raise BatchParseError(f"{where} must be an object")
    if set(data) != _EVENT_FIELDS:
        raise BatchParseError(f"{where} must have exactly the event fields")
    surfaces = {s.value: s for s in Surface}
    interventions = {t.value: t for t in InterventionType}
    kinds = {k.value: k for k in ElementKind}
    if data["surface"] not in surfaces:
        raise BatchParseError(f"{where}: unknown surface {data['surface']!r}")
    if data["intervention"] not in interventions:
        raise BatchParseError(f"{where}: unknown intervention {data['intervention']!r}")
    kind_raw = data["element_kind"]
    if kind_raw == NAVIGATION_KIND:
        kind = None
    elif kind_raw in kinds:
        kind = kinds[kind_raw]
    else:
        raise BatchParseError(f"{where}: unknown element_kind {kind_raw!r}")
    if not isinstance(data["campaign_id"], str) or not data["campaign_id"]:
        raise BatchParseError(f"{where}: campaign_id must be a non-empty string")
    count = data["count"]
    if not isinstance(count, int) or isinstance(count, bool) or count <= 0:
        raise BatchParseError(f"{where}: count must be a positive integer")
    try:
        bucket = parse_rfc3339(data["bucket_time"])
    except (TypeError, ValueError):
        raise BatchParseError(f"{where}: bad bucket_time") from None
    if bucket != floor_to_hour(bucket):
        raise BatchParseError(f"{where}: bucket_time must be hour-aligned")
    return EventRecord(
        campaign_id=data["campaign_id"],
        surface=surfaces[data["surface"]],
        intervention=interventions[data["intervention"]],
        element_kind=kind,
        count=count,
        bucket_time=bucket,
    )


def parse_batch(raw: bytes | str | Mapping) -> MetricsBatch:
    if isinstance(raw, (bytes, str)):
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise BatchParseError(f"invalid JSON: {exc.msg}") from None
    else:
        data = raw
    if not isinstance(data, Mapping):
        raise BatchParseError("batch must be a JSON object")
    for key in data:
        if key not in _BATCH_FIELDS:
            raise BatchParseError(f"unknown field {key!r}")
    for key in ("install_id", "schema_version", "events", "sent_at"):
        if key not in data:
            raise BatchParseError(f"missing field {key!r}")
    if data["schema_version"] != SCHEMA_VERSION:
        raise BatchParseError(f"unsupported schema_version {data['schema_version']!r}")
    if not isinstance(data["install_id"], str) or not data["install_id"]:
        raise BatchParseError("install_id must be a non-empty string")
    try:
        sent_at = parse_rfc3339(data["sent_at"])
    except (TypeError, ValueError):
        raise BatchParseError("bad sent_at") from None
    if not isinstance(data["events"], list):
        raise BatchParseError("events must be a list")
    events = tuple(_parse_event(e, i) for i, e in enumerate(data["events"]))
    if events:
        buckets = [e.bucket_time for e in events]
        if max(buckets) - min(buckets) > BATCH_SPAN_LIMIT:
            raise BatchParseError("batch covers more than 24 hours of events")
    enrolled = data.get("enrolled_campaigns", [])
    if not isinstance(enrolled, list) or any(not isinstance(c, str) or not c for c in enrolled):
        raise BatchParseError("enrolled_campaigns must be a list of campaign ids")
    return MetricsBatch(
        install_id=data["install_id"],
        schema_version=SCHEMA_VERSION,
        events=events,
        sent_at=sent_at,
        enrolled_campaigns=tuple(enrolled),
    )
