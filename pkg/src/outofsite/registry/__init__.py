"""Campaign registry: gatekept activation, distribution, and statistics."""
from .service import create_app
from .store import (
    AggregateStats,
    ChecklistInconsistentError,
    DuplicateIdError,
    InvalidTransitionError,
    RegistryError,
    RegistryStore,
    ReviewDecision,
    UnknownCampaignError,
)

__all__ = [
    "AggregateStats",
    "ChecklistInconsistentError",
    "DuplicateIdError",
    "InvalidTransitionError",
    "RegistryError",
    "RegistryStore",
    "ReviewDecision",
    "UnknownCampaignError",
    "create_app",
]
