"""The intervention engine: page transforms and navigation decisions.

Pure given (page or URL, enrolled campaigns, user state, matcher, rate state,
clock). Rate state is threaded, never mutated; the clock is always a
parameter. Protected and neutral elements are untouchable regardless of
campaign configuration.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta
from enum import Enum
from typing import Iterable, Mapping, Sequence
from urllib.parse import quote

from .campaigns import Campaign, InterventionType, StrengthLevel, Surface
from .matcher import CompiledMatcher, NotAUrlError, TargetHit
from .metrics import EventRecord
from .pages import PageDoc, PageElement, Targetability, classify_element
from .timeutil import ensure_utc, floor_to_hour, utc_date
from .userstate import UserState, enabled_level, is_whitelisted, resolve_conflict

CTA_DAILY_CAP = 10
GRACE_WINDOW = timedelta(hours=1)

HIDDEN_BANNER_TEMPLATE = "Out of Site has hidden some results because of the {campaign} campaign"
WHITELIST_PROMPT_ITEM = "Whitelist {company}"
WHITELIST_PROMPT_SEPARATOR = " | "
GRAY_OUT_TEMPLATE = "{target} is targeted by the campaign {name}"
CTA_PROMPT_TEMPLATE = "{Company} is targeted by the campaign {campaign}."
BLOCK_MESSAGE_TEMPLATE = "{domain} is inaccessible because of the {campaign} campaign."


class SurfaceUnsupportedError(ValueError):
    code = "SURFACE_UNSUPPORTED"


class ActionKind(Enum):
    REMOVE = "remove"
    MOVE_TO_BOTTOM = "move_to_bottom"
    OVERLAY = "overlay"
    ANNOTATE_CTA = "annotate_cta"
    KEEP = "keep"


@dataclass(frozen=True)
class ElementAction:
    element_id: str
    kind: ActionKind
    campaign_id: str | None = None
    target_label: str | None = None
    new_rank: int | None = None      # move_to_bottom only
    message_text: str | None = None  # overlay only
    prompt_text: str | None = None   # annotate_cta only
    mailto_link: str | None = None   # annotate_cta only


class CueKind(Enum):
    HIDDEN_BANNER = "hidden_banner"
    WHITELIST_PROMPT = "whitelist_prompt"
    BADGE_COUNT = "badge_count"


@dataclass(frozen=True)
class DisclosureCue:
    kind: CueKind
    text: str
    related_targets: tuple[str, ...] = ()


@dataclass(frozen=True)
class InterventionOutcome:
    page_actions: tuple[ElementAction, ...]
    injected_cues: tuple[DisclosureCue, ...]
    events: tuple[EventRecord, ...]
    hidden_count: int


class NavigationAction(Enum):
    ALLOW = "allow"
    BLOCK = "block"
    REDIRECT = "redirect"


@dataclass(frozen=True)
class NavigationDecision:
    action: NavigationAction
    campaign_id: str | None = None
    message: str | None = None
    homepage_url: str | None = None


ALLOW = NavigationDecision(NavigationAction.ALLOW)


@dataclass(frozen=True)
class RateState:
    last_interrupt: Mapping[str, datetime] = field(default_factory=dict)
    cta_count_today: int = 0
    cta_day: date | None = None


def fresh_rate_state() -> RateState:
    return RateState()


def select_intervention(c: Campaign, s: Surface, lvl: StrengthLevel) -> InterventionType:
    return c.policies[(s, lvl)]


def consume_cta(rs: RateState, now: datetime, cap: int = CTA_DAILY_CAP) -> tuple[bool, RateState]:
    """Spend one unit of the daily call-to-action budget (UTC calendar day)."""
    today = utc_date(now)
    count = rs.cta_count_today if rs.cta_day == today else 0
    if count < cap:
        return True, replace(rs, cta_count_today=count + 1, cta_day=today)
    return False, replace(rs, cta_count_today=count, cta_day=today)


def enrolled_pairs(campaigns: Iterable[Campaign], u: UserState) -> list[tuple[Campaign, StrengthLevel]]:
    """(campaign, level) for the user's enabled enrollments, priority order."""
    by_id = {c.id: c for c in campaigns}
    pairs = []
    for cid in u.priorities:
        level = enabled_level(u, cid)
        if level is not None and cid in by_id:
            pairs.append((by_id[cid], level))
    return pairs


def build_cta_prompt(campaign: Campaign, company: str) -> str:
    lead = CTA_PROMPT_TEMPLATE.format(Company=company, campaign=campaign.name)
    guidance = campaign.cta.prompt_text.replace("{Company}", company)
    return lead + " " + guidance


def build_mailto_link(campaign: Campaign, company: str) -> str:
    subject = campaign.cta.email_subject.replace("{Company}", company)
    body = campaign.cta.email_body.replace("{Company}", company)
    return (
        f"mailto:{campaign.cta.contact_email}"
        f"?subject={quote(subject, safe='')}&body={quote(body, safe='')}"
    )


def _element_hits(e: PageElement, m: CompiledMatcher) -> list[TargetHit]:
    hits = m.text_matches(e.text)
    for url in e.urls:
        try:
            hits.extend(m.url_hits(url))
        except NotAUrlError:
            continue  # a junk href never aborts the page transform
    return hits


def _eligible_hits(
    e: PageElement, u: UserState, m: CompiledMatcher, enrolled_ids: frozenset[str]
) -> list[TargetHit]:
    return [
        h
        for h in _element_hits(e, m)
        if h.campaign_id in enrolled_ids
        and h.campaign_id not in u.whitelist
        and not is_whitelisted(u, h.target_label, m.psl)
    ]


@dataclass(frozen=True)
class _Decision:
    element: PageElement
    action: ActionKind
    hit: TargetHit | None = None
    campaign: Campaign | None = None
    intervention: InterventionType | None = None  # as applied (after any degrade)


def apply_to_page(
    p: PageDoc,
    enrolled: Sequence[tuple[Campaign, StrengthLevel]],
    u: UserState,
    m: CompiledMatcher,
    rs: RateState,
    now: datetime,
    *,
    cta_cap: int = CTA_DAILY_CAP,
) -> tuple[InterventionOutcome, RateState]:
    if p.surface is Surface.NAVIGATION:
        raise SurfaceUnsupportedError("navigation events go through check_navigation")
    now = ensure_utc(now)
    bucket = floor_to_hour(now)
    by_id = {c.id: (c, lvl) for c, lvl in enrolled}
    enrolled_ids = frozenset(by_id)

    rate = rs
    decisions: list[_Decision] = []
    for e in p.elements:
        if classify_element(e) is not Targetability.COMMERCIAL:
            decisions.append(_Decision(e, ActionKind.KEEP))
            continue
        hits = _eligible_hits(e, u, m, enrolled_ids)
        if not hits:
            decisions.append(_Decision(e, ActionKind.KEEP))
            continue
        winner = resolve_conflict(hits, u)
        campaign, level = by_id[winner.campaign_id]
        intervention = select_intervention(campaign, p.surface, level)
        if intervention is InterventionType.NONE:
            decisions.append(_Decision(e, ActionKind.KEEP))
        elif intervention is InterventionType.FILTER:
            decisions.append(_Decision(e, ActionKind.REMOVE, winner, campaign, intervention))
        elif intervention is InterventionType.RERANK:
            decisions.append(
                _Decision(e, ActionKind.MOVE_TO_BOTTOM, winner, campaign, intervention)
            )
        elif intervention is InterventionType.GRAY_OUT:
            decisions.append(_Decision(e, ActionKind.OVERLAY, winner, campaign, intervention))
        elif intervention is InterventionType.CALL_TO_ACTION:
            permitted, rate = consume_cta(rate, now, cta_cap)
            if permitted:
                decisions.append(
                    _Decision(e, ActionKind.ANNOTATE_CTA, winner, campaign, intervention)
                )
            else:
                # budget exhausted: stay visible but keep the disclosure
                decisions.append(
                    _Decision(e, ActionKind.OVERLAY, winner, campaign, InterventionType.GRAY_OUT)
                )
        else:
            # block/redirect cannot appear on ranked surfaces (campaign invariant)
            decisions.append(_Decision(e, ActionKind.KEEP))

    # stable partition for rerank: survivors keep order, moved go after the rest
    survivors = [d.element for d in decisions if d.action is not ActionKind.REMOVE]
    moved_ids = {d.element.id for d in decisions if d.action is ActionKind.MOVE_TO_BOTTOM}
    final_order = [e for e in survivors if e.id not in moved_ids]
    final_order += [e for e in survivors if e.id in moved_ids]
    new_ranks = {e.id: i for i, e in enumerate(final_order)}

    actions: list[ElementAction] = []
    events: list[EventRecord] = []
    for d in decisions:
        if d.action is ActionKind.KEEP:
            actions.append(ElementAction(d.element.id, ActionKind.KEEP))
            continue
        assert d.hit is not None and d.campaign is not None and d.intervention is not None
        company = d.hit.target_label
        base = dict(
            element_id=d.element.id,
            kind=d.action,
            campaign_id=d.campaign.id,
            target_label=company,
        )
        if d.action is ActionKind.MOVE_TO_BOTTOM:
            actions.append(ElementAction(**base, new_rank=new_ranks[d.element.id]))
        elif d.action is ActionKind.OVERLAY:
            actions.append(
                ElementAction(
                    **base,
                    message_text=GRAY_OUT_TEMPLATE.format(target=company, name=d.campaign.name),
                )
            )
        elif d.action is ActionKind.ANNOTATE_CTA:
            actions.append(
                ElementAction(
                    **base,
                    prompt_text=build_cta_prompt(d.campaign, company),
                    mailto_link=build_mailto_link(d.campaign, company),
                )
            )
        else:
            actions.append(ElementAction(**base))
        events.append(
            EventRecord(
                campaign_id=d.campaign.id,
                surface=p.surface,
                intervention=d.intervention,
                element_kind=d.element.kind,
                count=1,
                bucket_time=bucket,
            )
        )

    hidden_count = sum(1 for d in decisions if d.action is ActionKind.REMOVE)

    cues: list[DisclosureCue] = []
    removed_by_campaign: dict[str, list[str]] = {}
    campaign_names: dict[str, str] = {}
    for d in decisions:
        if d.action is ActionKind.REMOVE:
            assert d.campaign is not None and d.hit is not None
            labels = removed_by_campaign.setdefault(d.campaign.id, [])
            if d.hit.target_label not in labels:
                labels.append(d.hit.target_label)
            campaign_names[d.campaign.id] = d.campaign.name
    for cid, labels in removed_by_campaign.items():
        cues.append(
            DisclosureCue(
                kind=CueKind.HIDDEN_BANNER,
                text=HIDDEN_BANNER_TEMPLATE.format(campaign=campaign_names[cid]),
                related_targets=tuple(labels),
            )
        )
    if hidden_count > 0:
        cues.append(DisclosureCue(kind=CueKind.BADGE_COUNT, text=str(hidden_count)))
    companies: list[str] = []
    for d in decisions:
        if d.action is not ActionKind.KEEP and d.hit is not None:
            if d.hit.target_label not in companies:
                companies.append(d.hit.target_label)
    if companies:
        cues.append(
            DisclosureCue(
                kind=CueKind.WHITELIST_PROMPT,
                text=WHITELIST_PROMPT_SEPARATOR.join(
                    WHITELIST_PROMPT_ITEM.format(company=c) for c in companies
                ),
                related_targets=tuple(companies),
            )
        )

    outcome = InterventionOutcome(
        page_actions=tuple(actions),
        injected_cues=tuple(cues),
        events=tuple(events),
        hidden_count=hidden_count,
    )
    return outcome, rate


def check_navigation(
    url: str,
    enrolled: Sequence[tuple[Campaign, StrengthLevel]],
    u: UserState,
    m: CompiledMatcher,
    rs: RateState,
    now: datetime,
) -> tuple[NavigationDecision, RateState, tuple[EventRecord, ...]]:
    """Decide a top-level navigation. Interruptions honor a per-domain grace
    window: after one, every visit to that registrable domain passes for an
    hour. Returns the decision, successor rate state, and emitted events."""
    now = ensure_utc(now)
    by_id = {c.id: (c, lvl) for c, lvl in enrolled}
    hits = [
        h
        for h in m.url_hits(url)
        if h.campaign_id in by_id
        and h.campaign_id not in u.whitelist
        and not is_whitelisted(u, h.target_label, m.psl)
    ]
    if not hits:
        return ALLOW, rs, ()
    winner = resolve_conflict(hits, u)
    campaign, level = by_id[winner.campaign_id]
    intervention = select_intervention(campaign, Surface.NAVIGATION, level)
    if intervention not in (InterventionType.BLOCK, InterventionType.REDIRECT):
        return ALLOW, rs, ()
    domain = winner.target_label  # domain hits carry the registrable domain
    last = rs.last_interrupt.get(domain)
    if last is not None and now - last < GRACE_WINDOW:
        return ALLOW, rs, ()
    next_rs = replace(rs, last_interrupt={**rs.last_interrupt, domain: now})
    event = EventRecord(
        campaign_id=campaign.id,
        surface=Surface.NAVIGATION,
        intervention=intervention,
        element_kind=None,
        count=1,
        bucket_time=floor_to_hour(now),
    )
    if intervention is InterventionType.BLOCK:
        decision = NavigationDecision(
            action=NavigationAction.BLOCK,
            campaign_id=campaign.id,
            message=BLOCK_MESSAGE_TEMPLATE.format(domain=domain, campaign=campaign.name),
        )
    else:
        decision = NavigationDecision(
            action=NavigationAction.REDIRECT,
            campaign_id=campaign.id,
            homepage_url=campaign.homepage_url,
        )
    return decision, next_rs, (event,)


def apply_actions_to_pagedoc(p: PageDoc, outcome: InterventionOutcome) -> PageDoc:
    """Materialize remove/move actions into a new PageDoc (replay and
    idempotence checks; the live client mutates the DOM instead)."""
    by_id = {a.element_id: a for a in outcome.page_actions}
    kept: list[PageElement] = []
    moved: list[tuple[int, PageElement]] = []
    for e in p.elements:
        action = by_id.get(e.id)
        if action is None or action.kind is ActionKind.KEEP or action.kind in (
            ActionKind.OVERLAY,
            ActionKind.ANNOTATE_CTA,
        ):
            kept.append(e)
        elif action.kind is ActionKind.MOVE_TO_BOTTOM:
            moved.append((action.new_rank if action.new_rank is not None else 0, e))
        # REMOVE drops the element
    ordered = kept + [e for _, e in sorted(moved, key=lambda pair: pair[0])]
    elements = tuple(replace(e, rank=i) for i, e in enumerate(ordered))
    return replace(p, elements=elements)
