"""Formal-property predicate words and the security category each one denotes."""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

CATEGORIES = (
    "Confidentiality",
    "Integrity",
    "Authentication",
    "Accounting",
    "Belong",
    "Generation",
)

# Order inside each category follows the expert word list.
_WORDS_BY_CATEGORY = {
    "Confidentiality": ("decode", "encode"),
    "Integrity": ("verify",),
    "Authentication": ("access", "reestablish"),
    "Accounting": ("count",),
    "Belong": ("build", "complete", "append", "belong", "store", "contain", "include", "combine"),
    "Generation": ("imply", "establish", "modify", "denote", "utilize", "set", "change", "define", "="),
}


@dataclass(frozen=True)
class PredicateCatalog:
    """The 23 predicate words and their word -> category mapping."""

    category_of: Mapping[str, str] = field(
        default_factory=lambda: MappingProxyType(
            {w: cat for cat, words in _WORDS_BY_CATEGORY.items() for w in words}
        )
    )

    def __post_init__(self):
        if len(self.category_of) != 23:
            raise ValueError(f"catalog must hold 23 words, got {len(self.category_of)}")
        unknown = set(self.category_of.values()) - set(CATEGORIES)
        if unknown:
            raise ValueError(f"unknown categories: {sorted(unknown)}")

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(self.category_of)

    def __contains__(self, word: object) -> bool:
        return word in self.category_of

    def __len__(self) -> int:
        return len(self.category_of)

    def category(self, word: str) -> str:
        return self.category_of[word]

    def words_in(self, category: str) -> tuple[str, ...]:
        return tuple(w for w, c in self.category_of.items() if c == category)


DEFAULT_CATALOG = PredicateCatalog()
