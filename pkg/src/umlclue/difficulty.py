"""Task difficulty rating from size metrics and requirement readability.

Five features feed the rating: class count, average attributes per class,
average methods per class, relationship count, and the Flesch reading-ease
score of the requirement text.  Features are min-max normalized over the
task set (readability inverted, since harder-to-read requirements make
harder tasks), weighted by the entropy weight method, and combined into a
rating in [0, 1].  Tasks are banded at the 33rd and 67th percentiles.

Readability uses 206.835 - 1.015*(words/sentences) - 84.6*(syllables/words)
with a fixed tokenization: sentences split on runs of ``.!?``, words split
on whitespace, syllables counted as vowel groups (a, e, i, o, u, y) with a
trailing silent ``e`` dropped when more than one group remains, minimum one
syllable per word.  Values are only compared relatively, so the heuristic
syllable counter is adequate.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

FEATURE_NAMES = (
    "class_count",
    "avg_attributes",
    "avg_methods",
    "relationship_count",
    "readability",
)

BANDS = ("simple", "moderate", "hard")


class DegenerateFeaturesError(ValueError):
    """Every feature is constant across tasks; weights are undefined."""


class ReadabilityError(ValueError):
    """Text has no words to score."""


@dataclass
class TaskFeatures:
    class_count: float
    avg_attributes: float
    avg_methods: float
    relationship_count: float
    readability: float

    def __post_init__(self) -> None:
        for name in FEATURE_NAMES[:4]:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def as_row(self) -> list[float]:
        return [getattr(self, name) for name in FEATURE_NAMES]


@dataclass
class DifficultyReport:
    normalized: np.ndarray  # tasks x features, after inversion of readability
    weights: np.ndarray  # one weight per feature, summing to 1
    ratings: np.ndarray  # one rating in [0, 1] per task
    bands: list[str]
    thresholds: tuple[float, float]  # 33rd and 67th percentile of ratings

    def to_document(self) -> dict:
        return {
            "features": list(FEATURE_NAMES),
            "weights": {
                name: float(w) for name, w in zip(FEATURE_NAMES, self.weights)
            },
            "thresholds": {
                "simple_upper": self.thresholds[0],
                "moderate_upper": self.thresholds[1],
            },
            "tasks": [
                {
                    "normalized": [float(v) for v in row],
                    "rating": float(rating),
                    "band": band,
                }
                for row, rating, band in zip(self.normalized, self.ratings, self.bands)
            ],
        }


_SENTENCE_SPLIT_RE = re.compile(r"[.!?]+")
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")
_NON_ALPHA_RE = re.compile(r"[^a-z]")


def _count_syllables(word: str) -> int:
    bare = _NON_ALPHA_RE.sub("", word.lower())
    groups = len(_VOWEL_GROUP_RE.findall(bare))
    if groups > 1 and bare.endswith("e"):
        groups -= 1
    return max(groups, 1)


def readability(text: str) -> float:
    """Flesch reading ease of non-empty text; higher reads easier."""
    words = text.split()
    if not words:
        raise ReadabilityError("cannot score empty text")
    sentences = sum(
        1 for part in _SENTENCE_SPLIT_RE.split(text) if part.strip()
    ) or 1
    syllables = sum(_count_syllables(w) for w in words)
    return (
        206.835
        - 1.015 * (len(words) / sentences)
        - 84.6 * (syllables / len(words))
    )


def _normalize_column(column: np.ndarray, invert: bool) -> np.ndarray:
    span = column.max() - column.min()
    if span == 0:
        return np.full(column.shape, 0.5)
    if invert:
        return (column.max() - column) / span
    return (column - column.min()) / span


def entropy_weights(normalized: np.ndarray) -> np.ndarray:
    """Weights from column dispersion; low-entropy columns weigh more."""
    n_tasks = normalized.shape[0]
    leftover = np.empty(normalized.shape[1])
    for j in range(normalized.shape[1]):
        column = normalized[:, j]
        total = column.sum()
        p = column / total
        terms = np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)
        entropy = -terms.sum() / math.log(n_tasks)
        # a uniform column has entropy 1 up to float residue; its weight is 0
        leftover[j] = max(1.0 - entropy, 0.0) if 1.0 - entropy > 1e-12 else 0.0
    denominator = leftover.sum()
    if denominator <= 0.0:
        raise DegenerateFeaturesError(
            "all features are constant across tasks; weights undefined"
        )
    return leftover / denominator


def difficulty_ratings(features: list[TaskFeatures]) -> DifficultyReport:
    if len(features) < 3:
        raise ValueError("need at least 3 tasks to rate difficulty")
    raw = np.array([f.as_row() for f in features], dtype=np.float64)
    normalized = np.column_stack(
        [
            _normalize_column(raw[:, j], invert=(FEATURE_NAMES[j] == "readability"))
            for j in range(raw.shape[1])
        ]
    )
    weights = entropy_weights(normalized)
    ratings = normalized @ weights
    t33 = float(np.percentile(ratings, 33))
    t67 = float(np.percentile(ratings, 67))
    # A rating exactly on a threshold goes to the lower band.
    bands = [
        "simple" if r <= t33 else ("moderate" if r <= t67 else "hard")
        for r in ratings
    ]
    return DifficultyReport(normalized, weights, ratings, bands, (t33, t67))
