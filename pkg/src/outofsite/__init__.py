"""Out of Site: campaign-driven boycott assistance.

Core pieces: campaign model and validation, compiled target matching, the
page/navigation intervention engine, participant state, privacy-limited
metrics, a registry service, and authoring tools.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .campaigns import (  # noqa: F401
    CallToAction,
    Campaign,
    CampaignParseError,
    InterventionType,
    ReviewStatus,
    StrengthLevel,
    Surface,
    ValidationIssue,
    ValidationReport,
    parse_campaign,
    serialize_campaign,
    validate_campaign,
)
from .matcher import (  # noqa: F401
    CompiledMatcher,
    NotAUrlError,
    TargetHit,
    TargetKind,
    build_matcher,
    normalize_domain,
    text_matches,
    url_hits,
    url_matches,
)
from .pages import (  # noqa: F401
    ElementKind,
    PageDoc,
    PageDocParseError,
    PageElement,
    Targetability,
    classify_element,
    load_pagedoc,
    parse_pagedoc,
    serialize_pagedoc,
)
from .engine import (  # noqa: F401
    ActionKind,
    CueKind,
    DisclosureCue,
    ElementAction,
    InterventionOutcome,
    NavigationAction,
    NavigationDecision,
    RateState,
    apply_actions_to_pagedoc,
    apply_to_page,
    check_navigation,
    enrolled_pairs,
    fresh_rate_state,
)
from .userstate import (  # noqa: F401
    Enrollment,
    UnknownCampaignError,
    UserState,
    UserStateParseError,
    add_whitelist,
    enroll,
    is_whitelisted,
    new_install,
    parse_user_state,
    serialize_user_state,
    set_level,
    set_priorities,
    toggle,
)
from .metrics import (  # noqa: F401
    ContributionSummary,
    EventRecord,
    MetricsBatch,
    MetricsStore,
    acknowledge_batch,
    build_share_message,
    campaign_hashtag,
    contribution_summary,
    flush_batch,
    fresh_store,
    record,
)
