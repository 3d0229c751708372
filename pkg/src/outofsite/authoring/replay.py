"""Offline fixture replay: run the engine over saved pages and navigation
logs with a simulated clock, and tally what it did.

The clock starts at a fixed epoch and advances one step per fixture (visits
within a navigation fixture are spaced a minute apart), so rate-limit
behavior is reproducible without waiting. Replay touches no network: inputs
are local files, outputs are a table and a canonical JSON report, and two
runs over the same inputs are byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Mapping, Sequence

from ..campaigns import Campaign, StrengthLevel
from ..engine import (
    ActionKind,
    NavigationAction,
    apply_to_page,
    check_navigation,
    fresh_rate_state,
)
from ..matcher import CompiledMatcher, NotAUrlError, build_matcher, normalize_domain
from ..pages import PageDoc, PageDocParseError, Targetability, classify_element, parse_pagedoc
from ..timeutil import rfc3339
from ..userstate import UserState, new_install

REPLAY_EPOCH = datetime(2020, 1, 1, 0, 0, 0, tzinfo=timezone.utc)
DEFAULT_STEP = timedelta(minutes=10)


@dataclass(frozen=True)
class NavigationFixture:
    visits: tuple[str, ...]


@dataclass(frozen=True)
class FixtureResult:
    fixture: str
    surface: str
    actions_by_intervention: Mapping[str, int] = field(default_factory=dict)
    actions_by_element_kind: Mapping[str, int] = field(default_factory=dict)
    hidden_count: int = 0
    protected_untouched: bool = True
    protected_elements: tuple[str, ...] = ()
    error: str | None = None


@dataclass(frozen=True)
class ReplayReport:
    level: StrengthLevel
    campaign_ids: tuple[str, ...]
    epoch: datetime
    step: timedelta
    results: tuple[FixtureResult, ...]

    @property
    def totals_by_intervention(self) -> dict[str, int]:
        return _sum_maps(r.actions_by_intervention for r in self.results)

    @property
    def totals_by_element_kind(self) -> dict[str, int]:
        return _sum_maps(r.actions_by_element_kind for r in self.results)

    @property
    def total_hidden(self) -> int:
        return sum(r.hidden_count for r in self.results)

    @property
    def error_count(self) -> int:
        return sum(1 for r in self.results if r.error is not None)


def _sum_maps(maps) -> dict[str, int]:
    out: dict[str, int] = {}
    for m in maps:
        for key, value in m.items():
            out[key] = out.get(key, 0) + value
    return out


def _parse_navigation_fixture(payload: Any) -> NavigationFixture:
    if not isinstance(payload, Mapping) or set(payload) != {"surface", "visits"}:
        raise PageDocParseError("navigation fixture needs exactly surface and visits")
    visits = payload["visits"]
    if not isinstance(visits, list) or any(not isinstance(v, str) for v in visits):
        raise PageDocParseError("visits must be a list of URLs")
    return NavigationFixture(visits=tuple(visits))


def load_fixture(path: Path) -> PageDoc | NavigationFixture:
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise PageDocParseError(f"unreadable fixture: {exc}") from None
    if isinstance(payload, Mapping) and payload.get("surface") == "navigation":
        return _parse_navigation_fixture(payload)
    return parse_pagedoc(payload)


def _page_result(
    name: str,
    page: PageDoc,
    enrolled: Sequence[tuple[Campaign, StrengthLevel]],
    user: UserState,
    matcher: CompiledMatcher,
    now: datetime,
) -> FixtureResult:
    outcome, _ = apply_to_page(page, enrolled, user, matcher, fresh_rate_state(), now)
    by_intervention: dict[str, int] = {}
    for e in outcome.events:
        by_intervention[e.intervention.value] = by_intervention.get(e.intervention.value, 0) + 1
    by_kind: dict[str, int] = {}
    acted = {a.element_id for a in outcome.page_actions if a.kind is not ActionKind.KEEP}
    for element in page.elements:
        if element.id in acted:
            by_kind[element.kind.value] = by_kind.get(element.kind.value, 0) + 1
    protected = tuple(
        e.id for e in page.elements if classify_element(e) is Targetability.PROTECTED
    )
    return FixtureResult(
        fixture=name,
        surface=page.surface.value,
        actions_by_intervention=by_intervention,
        actions_by_element_kind=by_kind,
        hidden_count=outcome.hidden_count,
        protected_untouched=not any(p in acted for p in protected),
        protected_elements=protected,
    )


def _navigation_result(
    name: str,
    fixture: NavigationFixture,
    enrolled: Sequence[tuple[Campaign, StrengthLevel]],
    user: UserState,
    matcher: CompiledMatcher,
    start: datetime,
) -> FixtureResult:
    rate = fresh_rate_state()
    by_intervention: dict[str, int] = {}
    for i, url in enumerate(fixture.visits):
        try:
            normalize_domain(url, matcher.psl)
        except NotAUrlError:
            return FixtureResult(fixture=name, surface="navigation",
                                 error=f"visit {i}: not a URL: {url!r}")
        decision, rate, _events = check_navigation(
            url, enrolled, user, matcher, rate, start + timedelta(minutes=i)
        )
        if decision.action is not NavigationAction.ALLOW:
            key = decision.action.value
            by_intervention[key] = by_intervention.get(key, 0) + 1
    return FixtureResult(
        fixture=name,
        surface="navigation",
        actions_by_intervention=by_intervention,
        actions_by_element_kind={"navigation": sum(by_intervention.values())}
        if by_intervention else {},
    )


def run_replay(
    fixture_paths: Sequence[Path],
    campaigns: Sequence[Campaign],
    level: StrengthLevel,
    user: UserState | None = None,
    *,
    epoch: datetime = REPLAY_EPOCH,
    step: timedelta = DEFAULT_STEP,
) -> ReplayReport:
    user = user if user is not None else new_install("replay")
    matcher = build_matcher(campaigns)
    enrolled = [(c, level) for c in sorted(campaigns, key=lambda c: c.id)]
    results: list[FixtureResult] = []
    for index, path in enumerate(sorted(fixture_paths, key=lambda p: p.name)):
        now = epoch + index * step
        try:
            fixture = load_fixture(path)
        except PageDocParseError as exc:
            results.append(FixtureResult(fixture=path.name, surface="unknown",
                                         error=str(exc)))
            continue
        if isinstance(fixture, NavigationFixture):
            results.append(
                _navigation_result(path.name, fixture, enrolled, user, matcher, now)
            )
        else:
            results.append(_page_result(path.name, fixture, enrolled, user, matcher, now))
    return ReplayReport(
        level=level,
        campaign_ids=tuple(c.id for c, _ in enrolled),
        epoch=epoch,
        step=step,
        results=tuple(results),
    )


def report_to_payload(report: ReplayReport) -> dict:
    return {
        "level": report.level.value,
        "campaigns": list(report.campaign_ids),
        "epoch": rfc3339(report.epoch),
        "step_minutes": int(report.step.total_seconds() // 60),
        "fixtures": [
            {
                "fixture": r.fixture,
                "surface": r.surface,
                "actions_by_intervention": dict(sorted(r.actions_by_intervention.items())),
                "actions_by_element_kind": dict(sorted(r.actions_by_element_kind.items())),
                "hidden_count": r.hidden_count,
                "protected_untouched": r.protected_untouched,
                "protected_elements": list(r.protected_elements),
                "error": r.error,
            }
            for r in report.results
        ],
        "totals": {
            "by_intervention": dict(sorted(report.totals_by_intervention.items())),
            "by_element_kind": dict(sorted(report.totals_by_element_kind.items())),
            "hidden_count": report.total_hidden,
            "fixtures_with_errors": report.error_count,
        },
    }


def serialize_report(report: ReplayReport) -> bytes:
    return json.dumps(
        report_to_payload(report), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def render_table(report: ReplayReport) -> str:
    """Human-readable tally, one row per fixture plus a totals row."""
    rows = [("fixture", "surface", "acted", "hidden", "protected-ok", "error")]
    for r in report.results:
        acted = sum(r.actions_by_intervention.values())
        rows.append(
            (
                r.fixture,
                r.surface,
                str(acted),
                str(r.hidden_count),
                "yes" if r.protected_untouched else "NO",
                r.error or "",
            )
        )
    total_acted = sum(report.totals_by_intervention.values())
    rows.append(("TOTAL", "", str(total_acted), str(report.total_hidden), "", ""))
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
             for row in rows]
    by_intervention = ", ".join(
        f"{k}={v}" for k, v in sorted(report.totals_by_intervention.items())
    ) or "none"
    lines.append(f"interventions: {by_intervention}")
    return "\n".join(lines) + "\n"
