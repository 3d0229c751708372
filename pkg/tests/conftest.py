"""Shared test helpers: campaign builders and canned page fixtures."""
from __future__ import annotations

import json
from pathlib import Path

from outofsite.campaigns import (
    CallToAction,
    Campaign,
    InterventionType,
    ReviewStatus,
    StrengthLevel,
    Surface,
    parse_campaign,
)

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES_DIR = REPO_ROOT / "fixtures"
CAMPAIGNS_DIR = REPO_ROOT / "campaigns"

DEFAULT_POLICIES = {
    (Surface.GOOGLE_SERP, StrengthLevel.HIGH): InterventionType.FILTER,
    (Surface.GOOGLE_SERP, StrengthLevel.MEDIUM): InterventionType.CALL_TO_ACTION,
    (Surface.GOOGLE_SERP, StrengthLevel.LOW): InterventionType.NONE,
    (Surface.AMAZON_SEARCH, StrengthLevel.HIGH): InterventionType.FILTER,
    (Surface.AMAZON_SEARCH, StrengthLevel.MEDIUM): InterventionType.CALL_TO_ACTION,
    (Surface.AMAZON_SEARCH, StrengthLevel.LOW): InterventionType.NONE,
    (Surface.NAVIGATION, StrengthLevel.HIGH): InterventionType.REDIRECT,
    (Surface.NAVIGATION, StrengthLevel.MEDIUM): InterventionType.BLOCK,
    (Surface.NAVIGATION, StrengthLevel.LOW): InterventionType.NONE,
}


def make_cta(**overrides) -> CallToAction:
    fields = dict(
        contact_email="contact@example.org",
        prompt_text="Consider contacting {Company} to say why you are boycotting.",
        email_subject="About your company",
        email_body="I am boycotting {Company}.",
    )
    fields.update(overrides)
    return CallToAction(**fields)


def make_campaign(
    *,
    id: str,
    keywords=(),
    domains=(),
    name: str | None = None,
    homepage_url: str = "https://example.org/campaign",
    cta: CallToAction | None = None,
    policies=None,
    category_tags=(),
    review_status: ReviewStatus = ReviewStatus.APPROVED,
) -> Campaign:
    return Campaign(
        id=id,
        name=name if name is not None else id,
        homepage_url=homepage_url,
        keywords=frozenset(keywords),
        domains=frozenset(domains),
        cta=cta if cta is not None else make_cta(),
        policies=dict(policies) if policies is not None else dict(DEFAULT_POLICIES),
        category_tags=frozenset(category_tags),
        review_status=review_status,
    )


def load_reference_campaign(filename: str) -> Campaign:
    raw = (CAMPAIGNS_DIR / filename).read_bytes()
    return parse_campaign(raw)


def grabyourwallet() -> Campaign:
    return load_reference_campaign("grabyourwallet.campaign.json")


def stop_animal_testing() -> Campaign:
    return load_reference_campaign("stop-animal-testing.campaign.json")


def load_fixture_json(filename: str) -> dict:
    return json.loads((FIXTURES_DIR / filename).read_text(encoding="utf-8"))
