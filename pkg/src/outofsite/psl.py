"""Public-suffix rules and registrable-domain reduction.

The rule data is a vendored snapshot in the standard one-rule-per-line text
format (plain suffixes, "*." wildcards matching exactly one label, "!"
exceptions overriding wildcards). Hosts whose TLD has no explicit rule fall
back to the implicit "*" rule: the last label alone is the suffix.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources


class NoRegistrableDomainError(ValueError):
    """The host equals a public suffix, so no registrable domain exists."""


@dataclass(frozen=True)
class PublicSuffixList:
    rules: frozenset[str] = field(default_factory=frozenset)
    wildcards: frozenset[str] = field(default_factory=frozenset)
    exceptions: frozenset[str] = field(default_factory=frozenset)

    @classmethod
    def from_text(cls, text: str) -> PublicSuffixList:
        rules: set[str] = set()
        wildcards: set[str] = set()
        exceptions: set[str] = set()
        for raw_line in text.splitlines():
            line = raw_line.strip()
            if not line or line.startswith("//"):
                continue
            # rule ends at the first whitespace, per the standard format
            rule = line.split()[0].lower()
            if rule.startswith("!"):
                exceptions.add(rule[1:])
            elif rule.startswith("*."):
                wildcards.add(rule[2:])
            else:
                rules.add(rule)
        return cls(frozenset(rules), frozenset(wildcards), frozenset(exceptions))

    def public_suffix_length(self, labels: list[str]) -> int:
        """Number of trailing labels forming the public suffix of the host."""
        n = len(labels)
        best = 1  # implicit "*" rule
        for i in range(n):
            candidate = ".".join(labels[i:])
            if candidate in self.exceptions:
                # exception rule: the suffix is the rule minus its first label
                return n - i - 1
            if candidate in self.rules:
                best = max(best, n - i)
            if n - i >= 2 and ".".join(labels[i + 1:]) in self.wildcards:
                best = max(best, n - i)
        return best

    def registrable_domain(self, host: str) -> str:
        """Reduce a lowercase dotted host to its public-suffix-plus-one form."""
        labels = host.split(".")
        suffix_len = self.public_suffix_length(labels)
        if suffix_len >= len(labels):
            raise NoRegistrableDomainError(
                f"host {host!r} is a public suffix; no registrable domain"
            )
        return ".".join(labels[-(suffix_len + 1):])


@lru_cache(maxsize=1)
def bundled_psl() -> PublicSuffixList:
    text = resources.files("outofsite.data").joinpath("public_suffix_list.dat").read_text("utf-8")
    return PublicSuffixList.from_text(text)
