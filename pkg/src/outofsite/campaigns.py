"""Campaign data model, validation, and the canonical file encoding.

Campaigns are declarative: targets plus a per-surface, per-level intervention
policy. All campaign-specific behavior in the rest of the system is driven by
these values; nothing is hard-coded per campaign.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator, Mapping
from urllib.parse import urlsplit

from .matcher import NotAUrlError, normalize_domain


class Surface(Enum):
    GOOGLE_SERP = "google_serp"
    AMAZON_SEARCH = "amazon_search"
    NAVIGATION = "navigation"


class StrengthLevel(Enum):
    HIGH = "High"
    MEDIUM = "Medium"
    LOW = "Low"

    @property
    def rank(self) -> int:
        return {"High": 3, "Medium": 2, "Low": 1}[self.value]


class InterventionType(Enum):
    FILTER = "filter"
    RERANK = "rerank"
    GRAY_OUT = "gray_out"
    CALL_TO_ACTION = "call_to_action"
    BLOCK = "block"
    REDIRECT = "redirect"
    NONE = "none"


class ReviewStatus(Enum):
    SUBMITTED = "submitted"
    APPROVED = "approved"
    REJECTED = "rejected"


# Total invasiveness preorder: filter > block >= redirect > rerank > gray_out
# > call_to_action > none. Policy maps must be non-increasing High->Low.
INVASIVENESS: Mapping[InterventionType, int] = {
    InterventionType.FILTER: 6,
    InterventionType.BLOCK: 5,
    InterventionType.REDIRECT: 5,
    InterventionType.RERANK: 4,
    InterventionType.GRAY_OUT: 3,
    InterventionType.CALL_TO_ACTION: 2,
    InterventionType.NONE: 1,
}

RANKED_SURFACES = frozenset({Surface.GOOGLE_SERP, Surface.AMAZON_SEARCH})
NAVIGATION_ONLY_INTERVENTIONS = frozenset({InterventionType.BLOCK, InterventionType.REDIRECT})
# interventions that cannot do anything to a top-level navigation
_NAVIGATION_NOOPS = frozenset(
    {InterventionType.FILTER, InterventionType.GRAY_OUT, InterventionType.CALL_TO_ACTION}
)

ORDERED_LEVELS = (StrengthLevel.HIGH, StrengthLevel.MEDIUM, StrengthLevel.LOW)


@dataclass(frozen=True)
class CallToAction:
    contact_email: str
    prompt_text: str  # guidance template; must contain {Company} exactly once
    email_subject: str
    email_body: str


@dataclass(frozen=True)
class Campaign:
    id: str
    name: str
    homepage_url: str
    keywords: frozenset[str]
    domains: frozenset[str]
    cta: CallToAction
    policies: dict[tuple[Surface, StrengthLevel], InterventionType]
    category_tags: frozenset[str] = frozenset()
    review_status: ReviewStatus = ReviewStatus.SUBMITTED


def can_transition(current: ReviewStatus, new: ReviewStatus) -> bool:
    return current is ReviewStatus.SUBMITTED and new in (
        ReviewStatus.APPROVED,
        ReviewStatus.REJECTED,
    )


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    path: str
    message: str
    severity: str = "error"


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...] = ()

    def __iter__(self) -> Iterator[ValidationIssue]:
        return iter(self.issues)

    def __len__(self) -> int:
        return len(self.issues)

    @property
    def errors(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "error")

    @property
    def warnings(self) -> tuple[ValidationIssue, ...]:
        return tuple(i for i in self.issues if i.severity == "warning")

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_payload(self) -> list[dict]:
        return [
            {"code": i.code, "path": i.path, "severity": i.severity, "message": i.message}
            for i in self.issues
        ]


class CampaignParseError(ValueError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, offset: int | None = None,
                 report: ValidationReport | None = None):
        super().__init__(message)
        self.offset = offset
        self.report = report


_CAMPAIGN_FIELDS = {
    "id", "name", "homepage_url", "keywords", "domains", "cta", "policies",
    "category_tags", "review_status",
}
_REQUIRED_FIELDS = _CAMPAIGN_FIELDS - {"category_tags", "review_status"}
_CTA_FIELDS = {"contact_email", "prompt_text", "email_subject", "email_body"}


class _Checker:
    def __init__(self) -> None:
        self.issues: list[ValidationIssue] = []

    def error(self, code: str, path: str, message: str) -> None:
        self.issues.append(ValidationIssue(code, path, message))

    def warning(self, code: str, path: str, message: str) -> None:
        self.issues.append(ValidationIssue(code, path, message, severity="warning"))

    def str_list(self, data: Mapping, key: str) -> list[str] | None:
        value = data.get(key)
        if not isinstance(value, list):
            self.error("BAD_TYPE", key, f"{key} must be a list of strings")
            return None
        out = []
        for i, item in enumerate(value):
            if not isinstance(item, str):
                self.error("BAD_TYPE", f"{key}[{i}]", f"{key} entries must be strings")
                return None
            out.append(item)
        return out


def _check_payload(data: Any) -> tuple[ValidationReport, Campaign | None]:
    chk = _Checker()
    if not isinstance(data, Mapping):
        chk.error("NOT_AN_OBJECT", "", "campaign document must be a JSON object")
        return ValidationReport(tuple(chk.issues)), None

    for key in data:
        if key not in _CAMPAIGN_FIELDS:
            chk.error("UNKNOWN_FIELD", str(key), f"unknown field {key!r}")
    for key in sorted(_REQUIRED_FIELDS):
        if key not in data:
            chk.error("MISSING_FIELD", key, f"missing required field {key!r}")
    if chk.issues and any(i.code in ("UNKNOWN_FIELD", "MISSING_FIELD") for i in chk.issues):
        return ValidationReport(tuple(chk.issues)), None

    campaign_id = data["id"]
    if not isinstance(campaign_id, str):
        chk.error("BAD_TYPE", "id", "id must be a string")
    elif not campaign_id.strip():
        chk.error("ID_EMPTY", "id", "id must be non-empty")

    name = data["name"]
    if not isinstance(name, str):
        chk.error("BAD_TYPE", "name", "name must be a string")
    elif not name.strip():
        chk.error("NAME_EMPTY", "name", "name must be non-empty")

    homepage = data["homepage_url"]
    if not isinstance(homepage, str):
        chk.error("BAD_TYPE", "homepage_url", "homepage_url must be a string")
    else:
        parts = urlsplit(homepage)
        if parts.scheme not in ("http", "https") or not parts.netloc:
            chk.error("BAD_URL", "homepage_url", f"not an absolute http(s) URL: {homepage!r}")

    keywords = chk.str_list(data, "keywords")
    if keywords is not None:
        for i, kw in enumerate(keywords):
            if not kw.strip():
                chk.error("BAD_KEYWORD", f"keywords[{i}]", "keyword must be non-empty")
            elif len(kw.strip()) < 3:
                chk.warning(
                    "KEYWORD_TOO_GENERIC", f"keywords[{i}]",
                    f"keyword {kw!r} is very short and will over-match",
                )
        lowered = [k.lower() for k in keywords]
        if len(set(lowered)) < len(set(keywords)):
            chk.warning("DUPLICATE_KEYWORD", "keywords",
                        "keywords differing only by case are redundant")

    domains = chk.str_list(data, "domains")
    if domains is not None:
        for i, dom in enumerate(domains):
            path = f"domains[{i}]"
            if "://" in dom or "/" in dom:
                chk.error("BAD_DOMAIN", path, f"domain {dom!r} must be bare (no scheme/path)")
                continue
            try:
                normalized = normalize_domain(dom)
            except NotAUrlError as exc:
                chk.error("BAD_DOMAIN", path, f"domain {dom!r}: {exc}")
                continue
            if normalized != dom:
                chk.error(
                    "BAD_DOMAIN", path,
                    f"domain {dom!r} must be its lowercase registrable form {normalized!r}",
                )

    if keywords is not None and domains is not None and not keywords and not domains:
        chk.error("TARGETS_EMPTY", "keywords", "campaign must target at least one keyword or domain")

    cta_obj: CallToAction | None = None
    cta_data = data["cta"]
    if not isinstance(cta_data, Mapping):
        chk.error("BAD_TYPE", "cta", "cta must be an object")
    else:
        for key in cta_data:
            if key not in _CTA_FIELDS:
                chk.error("UNKNOWN_FIELD", f"cta.{key}", f"unknown field cta.{key}")
        missing = [k for k in sorted(_CTA_FIELDS) if k not in cta_data]
        for key in missing:
            chk.error("MISSING_FIELD", f"cta.{key}", f"missing required field cta.{key}")
        bad_type = [k for k in _CTA_FIELDS if k in cta_data and not isinstance(cta_data[k], str)]
        for key in sorted(bad_type):
            chk.error("BAD_TYPE", f"cta.{key}", f"cta.{key} must be a string")
        if not missing and not bad_type and all(k not in cta_data or k in _CTA_FIELDS for k in cta_data):
            email = cta_data["contact_email"]
            local, _, domain_part = email.partition("@")
            if not local or not domain_part:
                chk.error("BAD_EMAIL", "cta.contact_email", f"not an email address: {email!r}")
            if cta_data["prompt_text"].count("{Company}") != 1:
                chk.error(
                    "CTA_PLACEHOLDER", "cta.prompt_text",
                    "prompt_text must contain the {Company} placeholder exactly once",
                )
            if not any(i.path.startswith("cta.") and i.severity == "error" for i in chk.issues):
                cta_obj = CallToAction(
                    contact_email=email,
                    prompt_text=cta_data["prompt_text"],
                    email_subject=cta_data["email_subject"],
                    email_body=cta_data["email_body"],
                )

    policies: dict[tuple[Surface, StrengthLevel], InterventionType] = {}
    pol_data = data["policies"]
    if not isinstance(pol_data, Mapping):
        chk.error("BAD_TYPE", "policies", "policies must be an object")
    else:
        surface_values = {s.value: s for s in Surface}
        level_values = {l.value: l for l in StrengthLevel}
        intervention_values = {t.value: t for t in InterventionType}
        for key in pol_data:
            if key not in surface_values:
                chk.error("UNKNOWN_FIELD", f"policies.{key}", f"unknown surface {key!r}")
        for surface in Surface:
            per_surface = pol_data.get(surface.value)
            path = f"policies.{surface.value}"
            if per_surface is None:
                chk.error("POLICY_INCOMPLETE", path, f"missing policy for surface {surface.value}")
                continue
            if not isinstance(per_surface, Mapping):
                chk.error("BAD_TYPE", path, f"{path} must be an object")
                continue
            for key in per_surface:
                if key not in level_values:
                    chk.error("UNKNOWN_FIELD", f"{path}.{key}", f"unknown strength level {key!r}")
            resolved: dict[StrengthLevel, InterventionType] = {}
            for level in ORDERED_LEVELS:
                value = per_surface.get(level.value)
                if value is None:
                    chk.error(
                        "POLICY_INCOMPLETE", f"{path}.{level.value}",
                        f"missing policy for ({surface.value}, {level.value})",
                    )
                    continue
                intervention = intervention_values.get(value) if isinstance(value, str) else None
                if intervention is None:
                    chk.error("BAD_ENUM", f"{path}.{level.value}",
                              f"unknown intervention {value!r}")
                    continue
                resolved[level] = intervention
                policies[(surface, level)] = intervention
            for level, intervention in resolved.items():
                if surface in RANKED_SURFACES and intervention in NAVIGATION_ONLY_INTERVENTIONS:
                    chk.error(
                        "INTERVENTION_SURFACE", f"{path}.{level.value}",
                        f"{intervention.value} applies only to navigation",
                    )
                if surface is Surface.NAVIGATION and intervention is InterventionType.RERANK:
                    chk.error(
                        "INTERVENTION_SURFACE", f"{path}.{level.value}",
                        "rerank applies only to ranked-list surfaces",
                    )
                if surface is Surface.NAVIGATION and intervention in _NAVIGATION_NOOPS:
                    chk.warning(
                        "NAVIGATION_NOOP", f"{path}.{level.value}",
                        f"{intervention.value} has no effect on navigation and is treated as allow",
                    )
            if len(resolved) == len(ORDERED_LEVELS):
                ranks = [INVASIVENESS[resolved[level]] for level in ORDERED_LEVELS]
                if not (ranks[0] >= ranks[1] >= ranks[2]):
                    chk.error(
                        "MONOTONICITY", path,
                        "High must be at least as invasive as Medium, and Medium as Low",
                    )

    tags: list[str] | None = []
    if "category_tags" in data:
        tags = chk.str_list(data, "category_tags")

    status = ReviewStatus.SUBMITTED
    if "review_status" in data:
        raw_status = data["review_status"]
        if not isinstance(raw_status, str) or raw_status not in {s.value for s in ReviewStatus}:
            chk.error("BAD_REVIEW_STATUS", "review_status",
                      f"review_status must be one of submitted/approved/rejected, got {raw_status!r}")
        else:
            status = ReviewStatus(raw_status)

    report = ValidationReport(tuple(chk.issues))
    if not report.ok or cta_obj is None or keywords is None or domains is None or tags is None:
        return report, None
    campaign = Campaign(
        id=campaign_id,
        name=name,
        homepage_url=homepage,
        keywords=frozenset(keywords),
        domains=frozenset(domains),
        cta=cta_obj,
        policies=policies,
        category_tags=frozenset(tags),
        review_status=status,
    )
    return report, campaign


def validate_campaign(candidate: Any) -> ValidationReport:
    """Report every violated constraint of a campaign-shaped value.

    Accepts raw decoded JSON data or a Campaign instance. Never raises.
    """
    if isinstance(candidate, Campaign):
        candidate = campaign_to_payload(candidate)
    report, _ = _check_payload(candidate)
    return report


def campaign_to_payload(c: Campaign) -> dict:
    return {
        "id": c.id,
        "name": c.name,
        "homepage_url": c.homepage_url,
        "keywords": sorted(c.keywords),
        "domains": sorted(c.domains),
        "cta": {
            "contact_email": c.cta.contact_email,
            "prompt_text": c.cta.prompt_text,
            "email_subject": c.cta.email_subject,
            "email_body": c.cta.email_body,
        },
        "policies": {
            surface.value: {
                level.value: c.policies[(surface, level)].value
                for level in ORDERED_LEVELS
                if (surface, level) in c.policies
            }
            for surface in Surface
        },
        "category_tags": sorted(c.category_tags),
        "review_status": c.review_status.value,
    }


def canonical_json_bytes(payload: Any) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def serialize_campaign(c: Campaign) -> bytes:
    """Canonical byte encoding: UTF-8 JSON, sorted keys, no extra whitespace."""
    report = validate_campaign(c)
    if not report.ok:
        raise ValueError(f"refusing to serialize invalid campaign: {report.errors[0].message}")
    return canonical_json_bytes(campaign_to_payload(c))


def parse_campaign(raw: bytes | str) -> Campaign:
    """Strict decoder: unknown fields and invariant violations are rejected."""
    if isinstance(raw, bytes):
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CampaignParseError(f"not UTF-8: {exc.reason}", offset=exc.start) from None
    else:
        text = raw
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        byte_offset = len(text[: exc.pos].encode("utf-8"))
        raise CampaignParseError(f"invalid JSON: {exc.msg}", offset=byte_offset) from None
    report, campaign = _check_payload(data)
    if campaign is None:
        first = report.errors[0] if report.errors else None
        detail = f"{first.code} at {first.path}: {first.message}" if first else "invalid document"
        raise CampaignParseError(detail, report=report)
    return campaign
