"""Registry persistence: campaign review state machine, audit log, metrics
aggregation with replay-safe deduplication, and seeded statistics.

Backed by sqlite so a single file (or :memory:) carries the whole registry.
Write paths take a process-wide lock and commit atomically; the dedup key
table makes batch ingestion idempotent under at-least-once delivery.
"""
from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Mapping

from ..campaigns import (
    Campaign,
    ReviewStatus,
    campaign_to_payload,
    can_transition,
    canonical_json_bytes,
    parse_campaign,
)
from ..metrics import MetricsBatch, counter_field, event_key
from ..timeutil import rfc3339

CHECKLIST_FLAGS = ("splc_hate_group", "protected_class_targeting", "state_actor")
COUNTER_COLUMNS = ("visits_blocked", "results_altered", "products_hidden")


class RegistryError(Exception):
    code = "REGISTRY_ERROR"


class DuplicateIdError(RegistryError):
    code = "DUPLICATE_ID"


class UnknownCampaignError(RegistryError):
    code = "UNKNOWN_CAMPAIGN"


class InvalidTransitionError(RegistryError):
    code = "INVALID_TRANSITION"


class ChecklistInconsistentError(RegistryError):
    code = "CHECKLIST_INCONSISTENT"


@dataclass(frozen=True)
class ReviewDecision:
    campaign_id: str
    decision: ReviewStatus
    checklist: Mapping[str, bool]
    reviewer_note: str = ""

    def __post_init__(self) -> None:
        if self.decision not in (ReviewStatus.APPROVED, ReviewStatus.REJECTED):
            raise ValueError("decision must be approved or rejected")
        if set(self.checklist) != set(CHECKLIST_FLAGS):
            raise ValueError("checklist must carry exactly the three flags")
        if any(not isinstance(v, bool) for v in self.checklist.values()):
            raise ValueError("checklist flags must be booleans")

    def consistent(self) -> bool:
        any_flag = any(self.checklist.values())
        if self.decision is ReviewStatus.APPROVED:
            return not any_flag
        return any_flag or bool(self.reviewer_note.strip())


@dataclass(frozen=True)
class AggregateStats:
    campaign_id: str
    participants: int = 0
    visits_blocked: int = 0
    results_altered: int = 0
    products_hidden: int = 0
    seed_offsets: Mapping[str, int] = field(default_factory=dict)


_SCHEMA = """
CREATE TABLE IF NOT EXISTS campaigns (
    id TEXT PRIMARY KEY,
    document TEXT NOT NULL,
    status TEXT NOT NULL,
    version INTEGER NOT NULL,
    created_at TEXT NOT NULL,
    updated_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS audit (
    seq INTEGER PRIMARY KEY AUTOINCREMENT,
    campaign_id TEXT NOT NULL,
    actor TEXT NOT NULL,
    decision TEXT NOT NULL,
    checklist TEXT NOT NULL,
    note TEXT NOT NULL,
    at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS meta (
    key TEXT PRIMARY KEY,
    value INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS event_keys (
    install_id TEXT NOT NULL,
    bucket_time TEXT NOT NULL,
    campaign_id TEXT NOT NULL,
    surface TEXT NOT NULL,
    intervention TEXT NOT NULL,
    element_kind TEXT NOT NULL,
    count INTEGER NOT NULL,
    PRIMARY KEY (install_id, bucket_time, campaign_id, surface, intervention, element_kind)
);
CREATE TABLE IF NOT EXISTS participants (
    campaign_id TEXT NOT NULL,
    install_id TEXT NOT NULL,
    PRIMARY KEY (campaign_id, install_id)
);
CREATE TABLE IF NOT EXISTS aggregates (
    campaign_id TEXT PRIMARY KEY,
    visits_blocked INTEGER NOT NULL DEFAULT 0,
    results_altered INTEGER NOT NULL DEFAULT 0,
    products_hidden INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS seeds (
    campaign_id TEXT PRIMARY KEY,
    participants INTEGER NOT NULL DEFAULT 0,
    visits_blocked INTEGER NOT NULL DEFAULT 0,
    results_altered INTEGER NOT NULL DEFAULT 0,
    products_hidden INTEGER NOT NULL DEFAULT 0
);
"""


def _now() -> datetime:
    return datetime.now(timezone.utc)


class RegistryStore:
    def __init__(self, path: str = ":memory:") -> None:
        self._conn = sqlite3.connect(path, check_same_thread=False)
        self._conn.execute("PRAGMA foreign_keys = ON")
        self._lock = threading.Lock()
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)
            self._conn.execute(
                "INSERT OR IGNORE INTO meta (key, value) VALUES ('dataset_version', 0)"
            )

    def close(self) -> None:
        self._conn.close()

    # ------------------------------------------------------------ campaigns

    def submit_campaign(self, campaign: Campaign, now: datetime | None = None) -> Campaign:
        """Store a new campaign, forced into submitted regardless of what the
        document claimed. Never served to clients until approved."""
        stored = self._force_status(campaign, ReviewStatus.SUBMITTED)
        stamp = rfc3339(now if now is not None else _now())
        with self._lock, self._conn:
            try:
                self._conn.execute(
                    "INSERT INTO campaigns (id, document, status, version, created_at, updated_at)"
                    " VALUES (?, ?, ?, 1, ?, ?)",
                    (stored.id, self._document(stored), ReviewStatus.SUBMITTED.value,
                     stamp, stamp),
                )
            except sqlite3.IntegrityError:
                raise DuplicateIdError(stored.id) from None
        return stored

    def campaign_status(self, campaign_id: str) -> ReviewStatus:
        row = self._conn.execute(
            "SELECT status FROM campaigns WHERE id = ?", (campaign_id,)
        ).fetchone()
        if row is None:
            raise UnknownCampaignError(campaign_id)
        return ReviewStatus(row[0])

    def campaign_version(self, campaign_id: str) -> int:
        row = self._conn.execute(
            "SELECT version FROM campaigns WHERE id = ?", (campaign_id,)
        ).fetchone()
        if row is None:
            raise UnknownCampaignError(campaign_id)
        return int(row[0])

    def get_campaign(self, campaign_id: str) -> Campaign:
        row = self._conn.execute(
            "SELECT document FROM campaigns WHERE id = ?", (campaign_id,)
        ).fetchone()
        if row is None:
            raise UnknownCampaignError(campaign_id)
        return parse_campaign(row[0])

    def approved_campaigns(self) -> list[Campaign]:
        rows = self._conn.execute(
            "SELECT document FROM campaigns WHERE status = ? ORDER BY id",
            (ReviewStatus.APPROVED.value,),
        ).fetchall()
        return [parse_campaign(r[0]) for r in rows]

    def dataset_version(self) -> int:
        row = self._conn.execute(
            "SELECT value FROM meta WHERE key = 'dataset_version'"
        ).fetchone()
        return int(row[0])

    def review_campaign(
        self, decision: ReviewDecision, reviewer: str, now: datetime | None = None
    ) -> ReviewStatus:
        """Apply a gatekeeping decision: submitted -> approved/rejected, with
        exactly one audit record per applied status change."""
        stamp = rfc3339(now if now is not None else _now())
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT status, document FROM campaigns WHERE id = ?",
                (decision.campaign_id,),
            ).fetchone()
            if row is None:
                raise UnknownCampaignError(decision.campaign_id)
            current = ReviewStatus(row[0])
            if not can_transition(current, decision.decision):
                raise InvalidTransitionError(f"{current.value} -> {decision.decision.value}")
            if not decision.consistent():
                raise ChecklistInconsistentError(decision.campaign_id)
            stored = self._force_status(parse_campaign(row[1]), decision.decision)
            self._conn.execute(
                "UPDATE campaigns SET status = ?, document = ?, updated_at = ? WHERE id = ?",
                (decision.decision.value, self._document(stored), stamp,
                 decision.campaign_id),
            )
            self._conn.execute(
                "INSERT INTO audit (campaign_id, actor, decision, checklist, note, at)"
                " VALUES (?, ?, ?, ?, ?, ?)",
                (decision.campaign_id, reviewer, decision.decision.value,
                 json.dumps(dict(decision.checklist), sort_keys=True),
                 decision.reviewer_note, stamp),
            )
            if decision.decision is ReviewStatus.APPROVED:
                self._bump_dataset_version()
        return decision.decision

    def update_campaign(self, campaign: Campaign, now: datetime | None = None) -> int:
        """Replace an existing campaign's document (targets, policies, texts).
        Status is whatever review already decided; the document cannot smuggle
        a different one in. Serving-set changes bump the dataset version."""
        stamp = rfc3339(now if now is not None else _now())
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT status, version FROM campaigns WHERE id = ?", (campaign.id,)
            ).fetchone()
            if row is None:
                raise UnknownCampaignError(campaign.id)
            status, version = ReviewStatus(row[0]), int(row[1])
            stored = self._force_status(campaign, status)
            self._conn.execute(
                "UPDATE campaigns SET document = ?, version = ?, updated_at = ? WHERE id = ?",
                (self._document(stored), version + 1, stamp, campaign.id),
            )
            if status is ReviewStatus.APPROVED:
                self._bump_dataset_version()
        return version + 1

    def audit_log(self, campaign_id: str) -> list[dict]:
        rows = self._conn.execute(
            "SELECT seq, campaign_id, actor, decision, checklist, note, at FROM audit"
            " WHERE campaign_id = ? ORDER BY seq",
            (campaign_id,),
        ).fetchall()
        return [
            {
                "seq": r[0],
                "campaign_id": r[1],
                "actor": r[2],
                "decision": r[3],
                "checklist": json.loads(r[4]),
                "note": r[5],
                "at": r[6],
            }
            for r in rows
        ]

    # ------------------------------------------------------------ metrics

    def ingest_batch(self, batch: MetricsBatch) -> dict:
        """Fold a batch into the aggregates. Replays of the same (install,
        event-key) pair are duplicates and change nothing; events for
        campaigns that are not approved are dropped and counted."""
        approved = {
            r[0]
            for r in self._conn.execute(
                "SELECT id FROM campaigns WHERE status = ?",
                (ReviewStatus.APPROVED.value,),
            )
        }
        accepted = duplicates = dropped = 0
        with self._lock, self._conn:
            for e in batch.events:
                if e.campaign_id not in approved:
                    dropped += 1
                    continue
                key = event_key(e)
                cur = self._conn.execute(
                    "INSERT OR IGNORE INTO event_keys"
                    " (install_id, bucket_time, campaign_id, surface, intervention,"
                    "  element_kind, count)"
                    " VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (batch.install_id, rfc3339(key[0]), key[1], key[2], key[3], key[4],
                     e.count),
                )
                if cur.rowcount == 0:
                    duplicates += 1
                    continue
                accepted += 1
                self._conn.execute(
                    "INSERT OR IGNORE INTO aggregates (campaign_id) VALUES (?)",
                    (e.campaign_id,),
                )
                column = counter_field(e)
                self._conn.execute(
                    f"UPDATE aggregates SET {column} = {column} + ? WHERE campaign_id = ?",
                    (e.count, e.campaign_id),
                )
                self._conn.execute(
                    "INSERT OR IGNORE INTO participants (campaign_id, install_id)"
                    " VALUES (?, ?)",
                    (e.campaign_id, batch.install_id),
                )
            for cid in batch.enrolled_campaigns:
                if cid in approved:
                    self._conn.execute(
                        "INSERT OR IGNORE INTO participants (campaign_id, install_id)"
                        " VALUES (?, ?)",
                        (cid, batch.install_id),
                    )
        return {
            "status": "ok",
            "accepted": accepted,
            "duplicates": duplicates,
            "dropped_unknown_campaign": dropped,
        }

    def set_seeds(self, campaign_id: str, **offsets: int) -> None:
        """Configure cold-start offsets, kept separate from measured sums."""
        allowed = {"participants", *COUNTER_COLUMNS}
        bad = set(offsets) - allowed
        if bad:
            raise ValueError(f"unknown seed fields: {sorted(bad)}")
        if any(not isinstance(v, int) or isinstance(v, bool) or v < 0
               for v in offsets.values()):
            raise ValueError("seed offsets must be non-negative integers")
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR IGNORE INTO seeds (campaign_id) VALUES (?)", (campaign_id,)
            )
            for column, value in offsets.items():
                self._conn.execute(
                    f"UPDATE seeds SET {column} = ? WHERE campaign_id = ?",
                    (value, campaign_id),
                )

    def stats(self, campaign_id: str) -> AggregateStats:
        """Displayed counters: measured sums plus configured seed offsets."""
        self.campaign_status(campaign_id)  # raises UnknownCampaignError
        agg = self._conn.execute(
            "SELECT visits_blocked, results_altered, products_hidden FROM aggregates"
            " WHERE campaign_id = ?",
            (campaign_id,),
        ).fetchone() or (0, 0, 0)
        installs = self._conn.execute(
            "SELECT COUNT(*) FROM participants WHERE campaign_id = ?", (campaign_id,)
        ).fetchone()[0]
        seed_row = self._conn.execute(
            "SELECT participants, visits_blocked, results_altered, products_hidden"
            " FROM seeds WHERE campaign_id = ?",
            (campaign_id,),
        ).fetchone() or (0, 0, 0, 0)
        seeds = {
            "participants": seed_row[0],
            "visits_blocked": seed_row[1],
            "results_altered": seed_row[2],
            "products_hidden": seed_row[3],
        }
        return AggregateStats(
            campaign_id=campaign_id,
            participants=installs + seeds["participants"],
            visits_blocked=agg[0] + seeds["visits_blocked"],
            results_altered=agg[1] + seeds["results_altered"],
            products_hidden=agg[2] + seeds["products_hidden"],
            seed_offsets=seeds,
        )

    # ------------------------------------------------------------ helpers

    @staticmethod
    def _force_status(campaign: Campaign, status: ReviewStatus) -> Campaign:
        if campaign.review_status is status:
            return campaign
        from dataclasses import replace

        return replace(campaign, review_status=status)

    @staticmethod
    def _document(campaign: Campaign) -> str:
        return canonical_json_bytes(campaign_to_payload(campaign)).decode("utf-8")

    def _bump_dataset_version(self) -> None:
        self._conn.execute(
            "UPDATE meta SET value = value + 1 WHERE key = 'dataset_version'"
        )
