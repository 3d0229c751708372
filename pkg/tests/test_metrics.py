"""Metrics behavior: counter routing, folding, batching, retries, share text."""
from __future__ import annotations

import json
import random
from datetime import datetime, timedelta, timezone

import pytest

from conftest import make_campaign
from outofsite.campaigns import InterventionType, Surface
from outofsite.metrics import (
    SCHEMA_VERSION,
    BatchParseError,
    ContributionSummary,
    EventRecord,
    MetricsBatch,
    acknowledge_batch,
    batch_to_payload,
    build_share_message,
    campaign_hashtag,
    contribution_summary,
    counter_field,
    enrollment_ping,
    event_key,
    flush_batch,
    fresh_store,
    parse_batch,
    record,
    serialize_batch,
)
from outofsite.pages import ElementKind

UTC = timezone.utc
T0 = datetime(2020, 1, 1, 0, 0, 0, tzinfo=UTC)


def hour(n: int) -> datetime:
    return T0 + timedelta(hours=n)


def ev(
    cid: str = "grabyourwallet",
    surface: Surface = Surface.GOOGLE_SERP,
    intervention: InterventionType = InterventionType.FILTER,
    kind: ElementKind | None = ElementKind.ORGANIC_RESULT,
    count: int = 1,
    bucket: datetime = T0,
) -> EventRecord:
    return EventRecord(
        campaign_id=cid,
        surface=surface,
        intervention=intervention,
        element_kind=kind,
        count=count,
        bucket_time=bucket,
    )


# ---------------------------------------------------------------- routing

def test_counter_routing_exhaustive():
    # navigation feeds visits_blocked; amazon filtering feeds products_hidden;
    # everything else feeds results_altered
    for surface in Surface:
        for intervention in InterventionType:
            got = counter_field(ev(surface=surface, intervention=intervention))
            if surface is Surface.NAVIGATION:
                assert got == "visits_blocked"
            elif surface is Surface.AMAZON_SEARCH and intervention is InterventionType.FILTER:
                assert got == "products_hidden"
            else:
                assert got == "results_altered"


def test_counting_examples():
    store = fresh_store()
    store = record(
        [
            ev(intervention=InterventionType.FILTER, count=1),
            ev(intervention=InterventionType.FILTER, count=1, kind=ElementKind.AD),
            ev(intervention=InterventionType.FILTER, count=1, kind=ElementKind.KNOWLEDGE_PANEL),
        ],
        store,
    )
    s = contribution_summary(store, "grabyourwallet")
    assert (s.visits_blocked, s.results_altered, s.products_hidden) == (0, 3, 0)

    store = record(
        [ev(surface=Surface.NAVIGATION, intervention=InterventionType.REDIRECT, kind=None)],
        store,
    )
    s = contribution_summary(store, "grabyourwallet")
    assert s.visits_blocked == 1 and s.results_altered == 3

    store = record(
        [
            ev(
                surface=Surface.AMAZON_SEARCH,
                intervention=InterventionType.FILTER,
                kind=ElementKind.AMAZON_PRODUCT_CARD,
                count=2,
            ),
            ev(
                surface=Surface.AMAZON_SEARCH,
                intervention=InterventionType.RERANK,
                kind=ElementKind.AMAZON_PRODUCT_CARD,
            ),
        ],
        store,
    )
    s = contribution_summary(store, "grabyourwallet")
    assert s.products_hidden == 2
    assert s.results_altered == 4  # rerank is an alteration, not a hide


def test_record_empty_is_noop():
    store = fresh_store()
    assert record([], store) is store


def test_unknown_campaign_summary_is_zero():
    s = contribution_summary(fresh_store(), "nobody")
    assert s == ContributionSummary("nobody")


def test_record_rejects_bad_events():
    with pytest.raises(ValueError):
        record([ev(count=0)], fresh_store())
    with pytest.raises(ValueError):
        record([ev(bucket=T0 + timedelta(minutes=5))], fresh_store())


def test_fold_oracle_random_streams():
    rng = random.Random(0xBEEF)
    cids = ["a", "b", "c"]
    kinds = list(ElementKind) + [None]
    for _ in range(50):
        events = []
        for _ in range(rng.randrange(0, 40)):
            surface = rng.choice(list(Surface))
            events.append(
                ev(
                    cid=rng.choice(cids),
                    surface=surface,
                    intervention=rng.choice(list(InterventionType)),
                    kind=rng.choice(kinds),
                    count=rng.randrange(1, 4),
                    bucket=hour(rng.randrange(0, 6)),
                )
            )
        one_shot = record(events, fresh_store())
        stepwise = fresh_store()
        for e in events:
            stepwise = record([e], stepwise)
        assert dict(one_shot.pending) == dict(stepwise.pending)
        assert dict(one_shot.totals) == dict(stepwise.totals)
        # brute-force totals
        expected: dict[str, dict[str, int]] = {}
        for e in events:
            row = expected.setdefault(e.campaign_id, dict.fromkeys(
                ("visits_blocked", "results_altered", "products_hidden"), 0))
            row[counter_field(e)] += e.count
        for cid, row in expected.items():
            s = contribution_summary(one_shot, cid)
            assert (s.visits_blocked, s.results_altered, s.products_hidden) == (
                row["visits_blocked"], row["results_altered"], row["products_hidden"])
        # pending is a multiset keyed by the dedup tuple
        expected_pending: dict = {}
        for e in events:
            expected_pending[event_key(e)] = expected_pending.get(event_key(e), 0) + e.count
        assert dict(one_shot.pending) == expected_pending


# ---------------------------------------------------------------- share text

def test_share_message_exact_bytes():
    c = make_campaign(id="grabyourwallet", name="GrabYourWallet", keywords=["Hobby Lobby"])
    got = build_share_message(c, 47, "http://bit.ly/2lkmxCq", "http://grabyourwallet.org")
    assert got == (
        "I boycotted 47 websites to support #GrabYourWallet using Out of Site "
        "(a Chrome extension). Join me now: http://bit.ly/2lkmxCq. "
        "Read about the campaign: http://grabyourwallet.org."
    )


def test_share_message_hashtag_strips_whitespace():
    c = make_campaign(id="sat", name="Stop Animal Testing", keywords=["ChapStick"])
    assert campaign_hashtag(c) == "StopAnimalTesting"
    got = build_share_message(c, 0, "https://example.org/join", "https://example.org/info")
    assert "#StopAnimalTesting " in got
    assert got.startswith("I boycotted 0 websites")
    c2 = make_campaign(id="w", name="  A \t B ", keywords=["x"])
    assert campaign_hashtag(c2) == "AB"


def test_share_message_rejects_negative():
    c = make_campaign(id="c", keywords=["x"])
    with pytest.raises(ValueError):
        build_share_message(c, -1, "https://a.example", "https://b.example")


# ---------------------------------------------------------------- flushing

def test_flush_skips_open_bucket():
    store = record([ev(bucket=hour(0))], fresh_store())
    batch, store2 = flush_batch(store, "install-1", hour(0) + timedelta(minutes=30))
    assert batch is None and store2 is store


def test_flush_emits_closed_buckets_and_sets_last_flush():
    store = record([ev(bucket=hour(0), count=2), ev(bucket=hour(0), kind=ElementKind.AD)],
                   fresh_store())
    now = hour(1)
    batch, store2 = flush_batch(store, "install-1", now)
    assert batch is not None
    assert batch.install_id == "install-1"
    assert batch.schema_version == SCHEMA_VERSION
    assert batch.sent_at == now
    assert {(e.bucket_time, e.count) for e in batch.events} == {(hour(0), 2), (hour(0), 1)}
    assert store2.last_flush == now
    # pending survives until the server acknowledges
    assert dict(store2.pending) == dict(store.pending)


def test_flush_respects_interval():
    store = record([ev(bucket=hour(0))], fresh_store())
    batch, store = flush_batch(store, "i", hour(1))
    assert batch is not None
    store = acknowledge_batch(store, batch)
    store = record([ev(bucket=hour(1), kind=ElementKind.AD)], store)
    # 23h59m after the last flush: not due
    batch2, store2 = flush_batch(store, "i", hour(1) + timedelta(hours=23, minutes=59))
    assert batch2 is None and store2 is store
    # 24h after: due
    batch3, _ = flush_batch(store, "i", hour(25))
    assert batch3 is not None
    assert [e.bucket_time for e in batch3.events] == [hour(1)]


def test_flush_without_pending_emits_nothing():
    batch, store = flush_batch(fresh_store(), "i", hour(5), force=True)
    assert batch is None and store.last_flush is None


def test_flush_keeps_open_bucket_local():
    store = record([ev(bucket=hour(0)), ev(bucket=hour(5), kind=ElementKind.AD)], fresh_store())
    now = hour(5) + timedelta(minutes=10)
    batch, store2 = flush_batch(store, "i", now)
    assert batch is not None
    assert [e.bucket_time for e in batch.events] == [hour(0)]
    store3 = acknowledge_batch(store2, batch)
    assert list(store3.pending) == [event_key(ev(bucket=hour(5), kind=ElementKind.AD))]


def test_flush_caps_batch_span_at_24h():
    store = record([ev(bucket=hour(0)), ev(bucket=hour(30), kind=ElementKind.AD)], fresh_store())
    batch, store = flush_batch(store, "i", hour(31))
    assert batch is not None
    assert [e.bucket_time for e in batch.events] == [hour(0)]
    store = acknowledge_batch(store, batch)
    batch2, _ = flush_batch(store, "i", hour(31), force=True)
    assert batch2 is not None
    assert [e.bucket_time for e in batch2.events] == [hour(30)]


def test_flush_rejects_naive_clock():
    with pytest.raises(ValueError):
        flush_batch(fresh_store(), "i", datetime(2020, 1, 1))


def test_retry_without_ack_duplicates_then_server_dedupes():
    store = record([ev(bucket=hour(0), count=3)], fresh_store())
    batch1, store = flush_batch(store, "i", hour(1))
    assert batch1 is not None
    # upload lost; client retries later with force, nothing new recorded
    batch2, store = flush_batch(store, "i", hour(2), force=True)
    assert batch2 is not None
    assert batch1.events == batch2.events
    # server folds by (install_id, dedup key): duplicates collapse
    server: dict = {}
    for b in (batch1, batch1, batch2):
        for e in b.events:
            server[(b.install_id, *event_key(e))] = e.count
    assert sum(server.values()) == 3
    store = acknowledge_batch(store, batch2)
    assert not store.pending


def test_acknowledge_subtracts_partial_counts():
    store = record([ev(bucket=hour(0), count=2)], fresh_store())
    batch, store = flush_batch(store, "i", hour(1))
    assert batch is not None
    # more events landed in the same (closed) key before the ack arrived
    store = record([ev(bucket=hour(0), count=5)], store)
    store = acknowledge_batch(store, batch)
    assert dict(store.pending) == {event_key(ev(bucket=hour(0))): 5}


def test_enrollment_ping_shape():
    batch = enrollment_ping("i-1", ["b", "a", "b"], hour(0))
    assert batch.events == ()
    assert batch.enrolled_campaigns == ("a", "b")
    assert parse_batch(serialize_batch(batch)) == batch


# ---------------------------------------------------------------- privacy

def _all_strings(value) -> list[str]:
    if isinstance(value, str):
        return [value]
    if isinstance(value, dict):
        out = []
        for k, v in value.items():
            out.extend(_all_strings(k))
            out.extend(_all_strings(v))
        return out
    if isinstance(value, list):
        out = []
        for v in value:
            out.extend(_all_strings(v))
        return out
    return []


def test_serialized_batch_carries_no_urls_or_text():
    store = record(
        [
            ev(bucket=hour(0)),
            ev(surface=Surface.NAVIGATION, intervention=InterventionType.BLOCK, kind=None,
               bucket=hour(0)),
        ],
        fresh_store(),
    )
    batch, _ = flush_batch(store, "install-42", hour(1), enrolled_campaigns=["grabyourwallet"])
    assert batch is not None
    payload = json.loads(serialize_batch(batch))
    keys = set()

    def walk(v):
        if isinstance(v, dict):
            keys.update(v)
            for inner in v.values():
                walk(inner)
        elif isinstance(v, list):
            for inner in v:
                walk(inner)

    walk(payload)
    assert keys <= {
        "schema_version", "install_id", "sent_at", "enrolled_campaigns", "events",
        "campaign_id", "surface", "intervention", "element_kind", "count", "bucket_time",
    }
    for s in _all_strings(payload):
        assert "http" not in s and "?" not in s and " " not in s


# ---------------------------------------------------------------- codec

def test_batch_round_trip():
    store = record(
        [ev(bucket=hour(0)),
         ev(surface=Surface.NAVIGATION, intervention=InterventionType.REDIRECT, kind=None,
            bucket=hour(3), count=2)],
        fresh_store(),
    )
    batch, _ = flush_batch(store, "i-9", hour(4), enrolled_campaigns=["x", "grabyourwallet"])
    assert batch is not None
    again = parse_batch(serialize_batch(batch))
    assert again == batch
    # navigation kind survives the wire as the sentinel string
    payload = batch_to_payload(batch)
    kinds = {e["element_kind"] for e in payload["events"]}
    assert "navigation" in kinds


def _good_payload() -> dict:
    return {
        "schema_version": 1,
        "install_id": "i-1",
        "sent_at": "2020-01-01T04:00:00Z",
        "enrolled_campaigns": ["grabyourwallet"],
        "events": [
            {
                "campaign_id": "grabyourwallet",
                "surface": "google_serp",
                "intervention": "filter",
                "element_kind": "organic_result",
                "count": 1,
                "bucket_time": "2020-01-01T00:00:00Z",
            }
        ],
    }


def _mutate(payload: dict, path: tuple, value) -> dict:
    data = json.loads(json.dumps(payload))
    target = data
    for step in path[:-1]:
        target = target[step]
    if value is ...:
        del target[path[-1]]
    else:
        target[path[-1]] = value
    return data


@pytest.mark.parametrize(
    "path,value",
    [
        (("bogus",), 1),
        (("install_id",), ...),
        (("install_id",), ""),
        (("schema_version",), 2),
        (("sent_at",), "yesterday"),
        (("events",), {}),
        (("events", 0, "bogus"), 1),
        (("events", 0, "campaign_id"), ...),
        (("events", 0, "campaign_id"), ""),
        (("events", 0, "surface"), "bing_serp"),
        (("events", 0, "intervention"), "vaporize"),
        (("events", 0, "element_kind"), "sidebar"),
        (("events", 0, "count"), 0),
        (("events", 0, "count"), True),
        (("events", 0, "count"), "3"),
        (("events", 0, "bucket_time"), "2020-01-01T00:30:00Z"),
        (("enrolled_campaigns",), "grabyourwallet"),
        (("enrolled_campaigns",), [""]),
    ],
)
def test_parse_batch_rejections(path, value):
    assert parse_batch(_good_payload()) is not None
    with pytest.raises(BatchParseError):
        parse_batch(_mutate(_good_payload(), path, value))


def test_parse_batch_span_limit():
    payload = _good_payload()
    second = json.loads(json.dumps(payload["events"][0]))
    second["bucket_time"] = "2020-01-02T00:00:00Z"  # exactly 24h apart: allowed
    payload["events"].append(second)
    assert len(parse_batch(payload).events) == 2
    payload["events"][1]["bucket_time"] = "2020-01-02T01:00:00Z"  # 25h: too wide
    with pytest.raises(BatchParseError):
        parse_batch(payload)


def test_parse_batch_rejects_junk():
    for raw in (b"", b"[]", b"null", b'"batch"', b"{not json"):
        with pytest.raises(BatchParseError):
            parse_batch(raw)
