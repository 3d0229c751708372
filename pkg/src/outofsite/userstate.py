"""Per-installation participant state.

All transitions are pure: old state in, new state out. The install id is
random, never derived from personal data, and is the only identifier that
ever leaves the machine (inside metrics batches).
"""
from __future__ import annotations

import json
import secrets
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from .campaigns import StrengthLevel
from .matcher import NotAUrlError, TargetHit, TargetKind, normalize_domain
from .psl import PublicSuffixList

SCHEMA_VERSION = 1


class UnknownCampaignError(KeyError):
    code = "UNKNOWN_CAMPAIGN"


class UserStateParseError(ValueError):
    code = "PARSE_ERROR"


@dataclass(frozen=True)
class Enrollment:
    enabled: bool
    level: StrengthLevel


@dataclass(frozen=True)
class UserState:
    install_id: str
    enrollments: Mapping[str, Enrollment]
    whitelist: frozenset[str]
    priorities: tuple[str, ...]  # enabled campaign ids, highest priority first


def new_install(install_id: str | None = None) -> UserState:
    return UserState(
        install_id=install_id if install_id is not None else secrets.token_hex(16),
        enrollments={},
        whitelist=frozenset(),
        priorities=(),
    )


def _require_known(campaign_id: str, known: Iterable[str]) -> None:
    if campaign_id not in set(known):
        raise UnknownCampaignError(campaign_id)


def enroll(u: UserState, campaign_id: str, level: StrengthLevel, known: Iterable[str]) -> UserState:
    """Enroll (or re-enable) a campaign at the given level, lowest priority."""
    _require_known(campaign_id, known)
    enrollments = dict(u.enrollments)
    enrollments[campaign_id] = Enrollment(enabled=True, level=level)
    priorities = u.priorities if campaign_id in u.priorities else u.priorities + (campaign_id,)
    return replace(u, enrollments=enrollments, priorities=priorities)


def set_level(u: UserState, campaign_id: str, level: StrengthLevel) -> UserState:
    if campaign_id not in u.enrollments:
        raise UnknownCampaignError(campaign_id)
    current = u.enrollments[campaign_id]
    if current.level is level:
        return u
    enrollments = dict(u.enrollments)
    enrollments[campaign_id] = replace(current, level=level)
    return replace(u, enrollments=enrollments)


def toggle(u: UserState, campaign_id: str, enabled: bool) -> UserState:
    if campaign_id not in u.enrollments:
        raise UnknownCampaignError(campaign_id)
    current = u.enrollments[campaign_id]
    enrollments = dict(u.enrollments)
    enrollments[campaign_id] = replace(current, enabled=enabled)
    if enabled:
        priorities = u.priorities if campaign_id in u.priorities else u.priorities + (campaign_id,)
    else:
        priorities = tuple(cid for cid in u.priorities if cid != campaign_id)
    return replace(u, enrollments=enrollments, priorities=priorities)


def set_priorities(u: UserState, ordered_ids: Iterable[str]) -> UserState:
    ordered = tuple(ordered_ids)
    enabled = {cid for cid, e in u.enrollments.items() if e.enabled}
    if set(ordered) != enabled or len(ordered) != len(enabled):
        raise ValueError("priorities must be a permutation of enabled campaign ids")
    return replace(u, priorities=ordered)


def add_whitelist(u: UserState, target: str) -> UserState:
    return replace(u, whitelist=u.whitelist | {target})


def remove_whitelist(u: UserState, target: str) -> UserState:
    return replace(u, whitelist=u.whitelist - {target})


def _as_domain(value: str, psl: PublicSuffixList | None) -> str | None:
    try:
        return normalize_domain(value, psl)
    except NotAUrlError:
        return None


def is_whitelisted(u: UserState, target_or_domain: str, psl: PublicSuffixList | None = None) -> bool:
    """Exact label match, or registrable-domain equality for domain entries."""
    if target_or_domain in u.whitelist:
        return True
    candidate = _as_domain(target_or_domain, psl)
    if candidate is None:
        return False
    for entry in u.whitelist:
        if _as_domain(entry, psl) == candidate:
            return True
    return False


def enabled_level(u: UserState, campaign_id: str) -> StrengthLevel | None:
    enrollment = u.enrollments.get(campaign_id)
    if enrollment is None or not enrollment.enabled:
        return None
    return enrollment.level


def resolve_conflict(hits: list[TargetHit], u: UserState) -> TargetHit:
    """Pick the winning hit: campaign priority first, then domain over keyword,
    then earliest offset, then label."""
    if not hits:
        raise ValueError("resolve_conflict requires at least one hit")
    order = {cid: i for i, cid in enumerate(u.priorities)}

    def key(h: TargetHit):
        priority = order.get(h.campaign_id, len(order))
        kind_rank = 0 if h.kind is TargetKind.DOMAIN else 1
        offset = h.offset if h.offset is not None else 0
        return (priority, h.campaign_id, kind_rank, offset, h.target_label)

    return min(hits, key=key)


def serialize_user_state(u: UserState) -> bytes:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "install_id": u.install_id,
        "enrollments": {
            cid: {"enabled": e.enabled, "level": e.level.value}
            for cid, e in sorted(u.enrollments.items())
        },
        "whitelist": sorted(u.whitelist),
        "priorities": list(u.priorities),
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def parse_user_state(raw: bytes | str) -> UserState:
    """Load persisted state, migrating older schema versions forward."""
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UserStateParseError(f"invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UserStateParseError("state must be an object")
    version = data.get("schema_version")
    if not isinstance(version, int) or version < 1:
        raise UserStateParseError(f"bad schema_version {version!r}")
    if version > SCHEMA_VERSION:
        raise UserStateParseError(f"schema_version {version} is newer than supported")
    # version 1 is current; future migrations slot in here, oldest first
    install_id = data.get("install_id")
    if not isinstance(install_id, str) or not install_id:
        raise UserStateParseError("install_id must be a non-empty string")
    raw_enrollments = data.get("enrollments", {})
    if not isinstance(raw_enrollments, dict):
        raise UserStateParseError("enrollments must be an object")
    levels = {l.value: l for l in StrengthLevel}
    enrollments: dict[str, Enrollment] = {}
    for cid, entry in raw_enrollments.items():
        if not isinstance(entry, dict) or set(entry) != {"enabled", "level"}:
            raise UserStateParseError(f"bad enrollment for {cid!r}")
        if not isinstance(entry["enabled"], bool) or entry["level"] not in levels:
            raise UserStateParseError(f"bad enrollment for {cid!r}")
        enrollments[cid] = Enrollment(enabled=entry["enabled"], level=levels[entry["level"]])
    whitelist = data.get("whitelist", [])
    if not isinstance(whitelist, list) or any(not isinstance(w, str) for w in whitelist):
        raise UserStateParseError("whitelist must be a list of strings")
    priorities = data.get("priorities", [])
    if not isinstance(priorities, list) or any(not isinstance(p, str) for p in priorities):
        raise UserStateParseError("priorities must be a list of strings")
    enabled = {cid for cid, e in enrollments.items() if e.enabled}
    if set(priorities) != enabled or len(priorities) != len(enabled):
        raise UserStateParseError("priorities must be a permutation of enabled campaign ids")
    return UserState(
        install_id=install_id,
        enrollments=enrollments,
        whitelist=frozenset(whitelist),
        priorities=tuple(priorities),
    )
