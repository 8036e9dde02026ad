"""Weight fitting against human ratings.

The nine free weights (the rest follow from the sum-to-one groups) are
searched to maximize the summed Pearson correlation between the five
metric score vectors and the human ratings of a training set.  The
objective is a black box, so the search is derivative-free: a space-filling
probe of the feasible region followed by Gaussian perturbation around the
incumbent, stopping when no new optimum appears for a fixed number of
consecutive evaluations (50 by default) or when the budget runs out.

Pairs are preprocessed once into :class:`~umlclue.clue.PairEvaluator`
structures, so each candidate configuration costs only the assignment
solving, and evaluations across pairs may run on a thread pool.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .clue import METRIC_NAMES, PairEvaluator, RelationshipTypeLUT, WeightConfig
from .model import ClassModel
from .stats import DegenerateInputError, pearson

_CONSTRAINT_TOLERANCE = 1e-9


class DecisionVectorError(ValueError):
    """A decision variable violated its bound or a pair-sum constraint."""


@dataclass(frozen=True)
class DecisionVector:
    """The nine free weights: (a..k) parameterize
    w_e, w_n, w_a, w_at, w_mp, w_mn, w_pt, w_rt, w_rq."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    g: float
    h: float
    k: float

    def __post_init__(self) -> None:
        for name in "abcdefghk":
            value = getattr(self, name)
            if not (-_CONSTRAINT_TOLERANCE <= value <= 1.0 + _CONSTRAINT_TOLERANCE):
                raise DecisionVectorError(f"{name} = {value} outside [0, 1]")
        for left, right in (("b", "c"), ("e", "f"), ("h", "k")):
            total = getattr(self, left) + getattr(self, right)
            if total > 1.0 + _CONSTRAINT_TOLERANCE:
                raise DecisionVectorError(f"{left}+{right} = {total} exceeds 1")

    @classmethod
    def uniform(cls) -> "DecisionVector":
        third = 1.0 / 3.0
        return cls(a=0.5, b=third, c=third, d=0.5, e=third, f=third, g=0.5, h=third, k=third)


def expand(v: DecisionVector) -> WeightConfig:
    """Fill in the six complementary weights from the sum-to-one groups."""
    return WeightConfig(
        w_e=v.a, w_r=1.0 - v.a,
        w_n=v.b, w_a=v.c, w_m=1.0 - v.b - v.c,
        w_at=v.d, w_an=1.0 - v.d,
        w_mp=v.e, w_mn=v.f, w_mt=1.0 - v.e - v.f,
        w_pt=v.g, w_pn=1.0 - v.g,
        w_rt=v.h, w_rq=v.k, w_rn=1.0 - v.h - v.k,
    )


@dataclass
class RatedPair:
    reference: ClassModel
    candidate: ClassModel
    human_score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.human_score <= 100.0:
            raise ValueError(f"human score {self.human_score} outside [0, 100]")


@dataclass
class IterationRecord:
    iteration: int
    objective: float
    best_objective: float


@dataclass
class OptimizationResult:
    best_vector: DecisionVector
    weights: WeightConfig
    train_objective: float
    train_correlations: dict[str, float]
    test_correlations: dict[str, float]
    iterations: list[IterationRecord] = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return len(self.iterations)


def _bucket(score: float) -> int:
    """Decade bucket index: scores in [1,10] land in 0, (10,20] in 1, ..."""
    return min(9, max(0, math.ceil(score / 10.0) - 1))


def stratified_split(
    pairs: list[RatedPair], train_fraction: float = 0.8, seed: int = 0
) -> tuple[list[RatedPair], list[RatedPair]]:
    """Per-decade split; each bucket sends ceil(fraction * size) to train."""
    if not pairs:
        raise ValueError("no pairs to split")
    buckets: list[list[RatedPair]] = [[] for _ in range(10)]
    for pair in pairs:
        buckets[_bucket(pair.human_score)].append(pair)
    rng = random.Random(seed)
    train: list[RatedPair] = []
    test: list[RatedPair] = []
    for bucket in buckets:
        if not bucket:
            continue
        shuffled = bucket[:]
        rng.shuffle(shuffled)
        n_train = math.ceil(train_fraction * len(shuffled))
        train.extend(shuffled[:n_train])
        test.extend(shuffled[n_train:])
    return train, test


class _ScoreTable:
    """Per-pair evaluators plus the machinery to score a configuration."""

    def __init__(self, pairs: list[RatedPair], provider, lut, workers: int | None):
        self.human = np.array([p.human_score for p in pairs], dtype=np.float64)
        self.evaluators = [
            PairEvaluator(p.reference, p.candidate, provider, lut) for p in pairs
        ]
        self.workers = workers or 1

    def metric_vectors(self, weights: WeightConfig) -> dict[str, np.ndarray]:
        if self.workers > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as pool:
                all_scores = list(pool.map(lambda ev: ev.scores(weights), self.evaluators))
        else:
            all_scores = [ev.scores(weights) for ev in self.evaluators]
        return {
            name: np.array([getattr(s, name) for s in all_scores], dtype=np.float64)
            for name in METRIC_NAMES
        }

    def correlations(self, weights: WeightConfig) -> dict[str, float]:
        vectors = self.metric_vectors(weights)
        return {
            name: pearson(vector, self.human).coefficient
            for name, vector in vectors.items()
        }

    def objective(self, weights: WeightConfig) -> float:
        return sum(self.correlations(weights).values())


def objective(
    v: DecisionVector,
    train: list[RatedPair],
    provider,
    lut: RelationshipTypeLUT | None = None,
) -> float:
    """Summed Pearson correlation of the five metrics with human scores."""
    if len(train) < 3:
        raise ValueError("need at least 3 rated pairs")
    return _ScoreTable(train, provider, lut, workers=None).objective(expand(v))


# --- search-space parameterization -----------------------------------------
#
# z in [0,1]^9 maps to a feasible DecisionVector by construction: singles
# pass through, and each constrained pair (x, y) with x + y <= 1 comes from
# (total, share) as x = total*(1-share), y = total*share.


def _z_to_vector(z: np.ndarray) -> DecisionVector:
    a, tb, sb, d, te, se, g, th, sh = (float(value) for value in z)
    return DecisionVector(
        a=a,
        b=tb * (1.0 - sb), c=tb * sb,
        d=d,
        e=te * (1.0 - se), f=te * se,
        g=g,
        h=th * (1.0 - sh), k=th * sh,
    )


_Z_UNIFORM = np.array([0.5, 2.0 / 3.0, 0.5, 0.5, 2.0 / 3.0, 0.5, 0.5, 2.0 / 3.0, 0.5])


def optimize(
    train: list[RatedPair],
    test: list[RatedPair],
    provider,
    budget: int = 300,
    stall_limit: int = 50,
    seed: int = 0,
    lut: RelationshipTypeLUT | None = None,
    workers: int | None = None,
    init_points: int = 32,
) -> OptimizationResult:
    """Maximize the train objective, starting from uniform weights.

    Stops after ``stall_limit`` consecutive evaluations without a new
    optimum, or when ``budget`` evaluations are spent.  Deterministic for a
    fixed seed.  A candidate whose score vectors degenerate (constant) is
    skipped; if the data itself is degenerate the initial evaluation raises.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if len(train) < 3:
        raise ValueError("need at least 3 training pairs")
    table = _ScoreTable(train, provider, lut, workers)

    iterations: list[IterationRecord] = []
    best_z = _Z_UNIFORM.copy()
    best_value = table.objective(expand(_z_to_vector(best_z)))
    iterations.append(IterationRecord(1, best_value, best_value))

    rng = np.random.default_rng(seed)
    n_init = min(init_points, budget - 1)
    pending = (
        list(qmc.LatinHypercube(d=9, seed=seed).random(n_init)) if n_init > 0 else []
    )
    stall = 0
    evaluation = 1
    step_cycle = (0.25, 0.1, 0.05, 0.02)

    while evaluation < budget and stall < stall_limit:
        if pending:
            z = pending.pop(0)
        elif evaluation % 11 == 0:
            z = rng.uniform(0.0, 1.0, size=9)
        else:
            step = step_cycle[evaluation % len(step_cycle)]
            z = np.clip(best_z + rng.normal(0.0, step, size=9), 0.0, 1.0)
        evaluation += 1
        try:
            value = table.objective(expand(_z_to_vector(z)))
        except DegenerateInputError:
            value = -math.inf
        if value > best_value + 1e-12:
            best_value = value
            best_z = z.copy()
            stall = 0
        else:
            stall += 1
        iterations.append(IterationRecord(evaluation, value, best_value))

    best_vector = _z_to_vector(best_z)
    weights = expand(best_vector)
    train_correlations = table.correlations(weights)
    if len(test) >= 3:
        test_table = _ScoreTable(test, provider, lut, workers)
        test_correlations = test_table.correlations(weights)
    else:
        test_correlations = {}
    return OptimizationResult(
        best_vector=best_vector,
        weights=weights,
        train_objective=best_value,
        train_correlations=train_correlations,
        test_correlations=test_correlations,
        iterations=iterations,
    )
