"""UTC time helpers. All timestamps in the system are timezone-aware UTC;
clocks are injected parameters, never read ambiently."""
from __future__ import annotations

from datetime import date, datetime, timezone

RFC3339_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


def ensure_utc(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        raise ValueError("naive datetime; timestamps must be timezone-aware UTC")
    return dt.astimezone(timezone.utc)


def floor_to_hour(dt: datetime) -> datetime:
    return ensure_utc(dt).replace(minute=0, second=0, microsecond=0)


def utc_date(dt: datetime) -> date:
    return ensure_utc(dt).date()


def rfc3339(dt: datetime) -> str:
    return ensure_utc(dt).strftime(RFC3339_FORMAT)


def parse_rfc3339(value: str) -> datetime:
    return datetime.strptime(value, RFC3339_FORMAT).replace(tzinfo=timezone.utc)
