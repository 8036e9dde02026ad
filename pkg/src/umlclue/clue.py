"""The CLUE metric family for class-diagram similarity.

Five scores are produced for an ordered (reference, candidate) model pair:

* ``clue_class``    — optimal matching over the class similarity matrix,
  whose entries blend class-name similarity with attribute-set and
  method-set similarities;
* ``clue_attribute`` / ``clue_method`` — attribute-set / method-set
  similarities summed over the optimal class assignment, normalized by the
  reference class count;
* ``clue_relation`` — optimal matching over the relationship similarity
  matrix, blending a type lookup table, multiplicity-label agreement and
  the class-matrix entries of the endpoints;
* ``clue``          — the weighted combination of clue_class and
  clue_relation.

All scores normalize by the reference side only: missing candidate
elements cost score, extra candidate elements are ignored.  Fifteen
weights control the blending, organized in groups that each sum to one.

:class:`PairEvaluator` precomputes every weight-independent quantity
(string similarities, lookup values, endpoint indices) so that one model
pair can be re-scored cheaply under many weight configurations.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .matching import MatchingResult, SimilarityMatrix, assignment_score, optimal_matching
from .model import ClassEntity, ClassModel, Method, Relationship, RelationshipKind

_GROUP_TOLERANCE = 1e-9

WEIGHT_NAMES = (
    "w_e", "w_r",
    "w_n", "w_a", "w_m",
    "w_at", "w_an",
    "w_mn", "w_mt", "w_mp",
    "w_pt", "w_pn",
    "w_rt", "w_rq", "w_rn",
)

_WEIGHT_GROUPS = (
    ("w_e", "w_r"),
    ("w_n", "w_a", "w_m"),
    ("w_at", "w_an"),
    ("w_mn", "w_mt", "w_mp"),
    ("w_pt", "w_pn"),
    ("w_rt", "w_rq", "w_rn"),
)


class WeightConfigError(ValueError):
    """A weight fell outside [0, 1] or a group does not sum to one."""


@dataclass(frozen=True)
class WeightConfig:
    """The fifteen blending weights; each named group sums to one."""

    w_e: float
    w_r: float
    w_n: float
    w_a: float
    w_m: float
    w_at: float
    w_an: float
    w_mn: float
    w_mt: float
    w_mp: float
    w_pt: float
    w_pn: float
    w_rt: float
    w_rq: float
    w_rn: float

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not (-_GROUP_TOLERANCE <= value <= 1.0 + _GROUP_TOLERANCE):
                raise WeightConfigError(f"{f.name} = {value} outside [0, 1]")
        for group in _WEIGHT_GROUPS:
            total = sum(getattr(self, name) for name in group)
            if abs(total - 1.0) > _GROUP_TOLERANCE:
                raise WeightConfigError(
                    f"group {'+'.join(group)} sums to {total!r}, expected 1"
                )

    @classmethod
    def default(cls) -> "WeightConfig":
        """The fitted configuration shipped with the package."""
        return cls(
            w_e=0.810, w_r=0.190,
            w_n=0.787, w_a=0.104, w_m=0.109,
            w_at=0.594, w_an=0.406,
            w_mn=0.730, w_mt=0.153, w_mp=0.117,
            w_pt=0.050, w_pn=0.950,
            w_rt=0.156, w_rq=0.220, w_rn=0.624,
        )

    @classmethod
    def uniform(cls) -> "WeightConfig":
        """Every group split evenly; the optimizer's starting point."""
        third = 1.0 / 3.0
        return cls(
            w_e=0.5, w_r=0.5,
            w_n=third, w_a=third, w_m=1.0 - 2 * third,
            w_at=0.5, w_an=0.5,
            w_mn=third, w_mt=third, w_mp=1.0 - 2 * third,
            w_pt=0.5, w_pn=0.5,
            w_rt=third, w_rq=third, w_rn=1.0 - 2 * third,
        )

    def to_mapping(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in WEIGHT_NAMES}

    @classmethod
    def from_mapping(cls, mapping: dict) -> "WeightConfig":
        missing = [name for name in WEIGHT_NAMES if name not in mapping]
        if missing:
            raise WeightConfigError(f"missing weights: {', '.join(missing)}")
        return cls(**{name: float(mapping[name]) for name in WEIGHT_NAMES})

    @classmethod
    def load(cls, path: str | Path) -> "WeightConfig":
        return cls.from_mapping(json.loads(Path(path).read_text()))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_mapping(), indent=2) + "\n")


_KIND_ORDER = tuple(RelationshipKind)


class LUTError(ValueError):
    """The relationship-type table violated symmetry, range or diagonal."""


class RelationshipTypeLUT:
    """Symmetric 6 x 6 similarity table over relationship kinds."""

    def __init__(self, table: dict[str, dict[str, float]]):
        self._values: dict[tuple[RelationshipKind, RelationshipKind], float] = {}
        for k1 in _KIND_ORDER:
            for k2 in _KIND_ORDER:
                try:
                    value = float(table[k1.value][k2.value])
                except KeyError:
                    raise LUTError(f"missing entry ({k1.value}, {k2.value})") from None
                if not 0.0 <= value <= 1.0:
                    raise LUTError(f"entry ({k1.value}, {k2.value}) = {value} outside [0, 1]")
                self._values[(k1, k2)] = value
        for k1 in _KIND_ORDER:
            if self._values[(k1, k1)] != 1.0:
                raise LUTError(f"diagonal entry ({k1.value}, {k1.value}) must be 1.0")
            for k2 in _KIND_ORDER:
                if self._values[(k1, k2)] != self._values[(k2, k1)]:
                    raise LUTError(f"entries ({k1.value}, {k2.value}) not symmetric")

    def value(self, t1: RelationshipKind, t2: RelationshipKind) -> float:
        return self._values[(t1, t2)]

    def to_mapping(self) -> dict[str, dict[str, float]]:
        return {
            k1.value: {k2.value: self._values[(k1, k2)] for k2 in _KIND_ORDER}
            for k1 in _KIND_ORDER
        }

    @classmethod
    def default(cls) -> "RelationshipTypeLUT":
        """Shipped defaults; override via a configuration file as needed."""
        base = {
            ("AS", "AG"): 0.5, ("AS", "CO"): 0.5, ("AG", "CO"): 0.7,
            ("GE", "RE"): 0.5,
            ("DE", "AS"): 0.2, ("DE", "AG"): 0.2, ("DE", "CO"): 0.2,
            ("DE", "GE"): 0.2, ("DE", "RE"): 0.2,
            ("GE", "AS"): 0.1, ("GE", "AG"): 0.1, ("GE", "CO"): 0.1,
            ("RE", "AS"): 0.1, ("RE", "AG"): 0.1, ("RE", "CO"): 0.1,
        }
        table: dict[str, dict[str, float]] = {}
        for k1 in _KIND_ORDER:
            table[k1.value] = {}
            for k2 in _KIND_ORDER:
                if k1 == k2:
                    value = 1.0
                else:
                    value = base.get((k1.value, k2.value), base.get((k2.value, k1.value)))
                table[k1.value][k2.value] = value
        return cls(table)

    @classmethod
    def load(cls, path: str | Path) -> "RelationshipTypeLUT":
        return cls(json.loads(Path(path).read_text()))

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_mapping(), indent=2) + "\n")


@dataclass
class ClueScores:
    clue: float
    clue_class: float
    clue_attribute: float
    clue_method: float
    clue_relation: float

    def to_mapping(self) -> dict[str, float]:
        return {
            "clue": self.clue,
            "clue_class": self.clue_class,
            "clue_attribute": self.clue_attribute,
            "clue_method": self.clue_method,
            "clue_relation": self.clue_relation,
        }


METRIC_NAMES = ("clue", "clue_class", "clue_attribute", "clue_method", "clue_relation")

_QUANTIFIED = {RelationshipKind.AS, RelationshipKind.AG, RelationshipKind.CO}
_UNQUANTIFIED = {RelationshipKind.DE, RelationshipKind.GE, RelationshipKind.RE}
_MANY_RE = re.compile(r"\*|many|much|multi", re.IGNORECASE)


def _label_match(q1: str, q2: str) -> float:
    if q1 == q2:
        return 1.0
    if _MANY_RE.search(q1) and _MANY_RE.search(q2):
        return 1.0
    return 0.0


def sim_rq(r1: Relationship, r2: Relationship) -> float:
    """Multiplicity similarity of two relationships.

    Quantified kinds (association, aggregation, composition) compare their
    end labels; two labels match when equal or when both carry a
    many-marker (``*`` or a word containing many/much/multi, matched
    case-insensitively).  Two unquantified kinds always score 1, and a
    quantified/unquantified mix scores 0.
    """
    if r1.kind in _QUANTIFIED and r2.kind in _QUANTIFIED:
        return 0.5 * _label_match(r1.label.from_end, r2.label.from_end) + 0.5 * _label_match(
            r1.label.to_end, r2.label.to_end
        )
    if r1.kind in _UNQUANTIFIED and r2.kind in _UNQUANTIFIED:
        return 1.0
    return 0.0


def _sigma_matrix(provider, left: list[str], right: list[str]) -> np.ndarray:
    matrix = np.empty((len(left), len(right)), dtype=np.float64)
    for i, s1 in enumerate(left):
        for j, s2 in enumerate(right):
            matrix[i, j] = provider.similarity(s1, s2)
    return matrix


class PairEvaluator:
    """Weight-independent structure of one (reference, candidate) pair.

    Building the evaluator performs every string-similarity call and table
    lookup; :meth:`scores` then re-scores the pair under any weight
    configuration by solving only the assignment problems.
    """

    def __init__(self, reference: ClassModel, candidate: ClassModel, provider,
                 lut: RelationshipTypeLUT | None = None):
        self.reference = reference
        self.candidate = candidate
        lut = lut or RelationshipTypeLUT.default()
        self.n = len(reference.classes)
        self.m = len(candidate.classes)

        self.class_names = _sigma_matrix(
            provider,
            [c.name for c in reference.classes],
            [c.name for c in candidate.classes],
        )
        self.attr_types: list[list[np.ndarray]] = []
        self.attr_names: list[list[np.ndarray]] = []
        self.method_rets: list[list[np.ndarray]] = []
        self.method_names: list[list[np.ndarray]] = []
        self.param_types: list[list[list[list[np.ndarray]]]] = []
        self.param_names: list[list[list[list[np.ndarray]]]] = []
        for c1 in reference.classes:
            at_row, an_row, mr_row, mn_row, pt_row, pn_row = [], [], [], [], [], []
            for c2 in candidate.classes:
                at_row.append(_sigma_matrix(
                    provider,
                    [a.type_name for a in c1.attributes],
                    [a.type_name for a in c2.attributes],
                ))
                an_row.append(_sigma_matrix(
                    provider,
                    [a.name for a in c1.attributes],
                    [a.name for a in c2.attributes],
                ))
                mr_row.append(_sigma_matrix(
                    provider,
                    [m.return_type for m in c1.methods],
                    [m.return_type for m in c2.methods],
                ))
                mn_row.append(_sigma_matrix(
                    provider,
                    [m.name for m in c1.methods],
                    [m.name for m in c2.methods],
                ))
                pt_cell = [
                    [
                        _sigma_matrix(
                            provider,
                            [p.type_name for p in m1.params],
                            [p.type_name for p in m2.params],
                        )
                        for m2 in c2.methods
                    ]
                    for m1 in c1.methods
                ]
                pn_cell = [
                    [
                        _sigma_matrix(
                            provider,
                            [p.name for p in m1.params],
                            [p.name for p in m2.params],
                        )
                        for m2 in c2.methods
                    ]
                    for m1 in c1.methods
                ]
                pt_row.append(pt_cell)
                pn_row.append(pn_cell)
            self.attr_types.append(at_row)
            self.attr_names.append(an_row)
            self.method_rets.append(mr_row)
            self.method_names.append(mn_row)
            self.param_types.append(pt_row)
            self.param_names.append(pn_row)

        ref_index = reference.class_index()
        cand_index = candidate.class_index()
        ref_rels = reference.relationships
        cand_rels = candidate.relationships
        self.p = len(ref_rels)
        self.q = len(cand_rels)
        self.lut_matrix = np.array(
            [[lut.value(r1.kind, r2.kind) for r2 in cand_rels] for r1 in ref_rels],
            dtype=np.float64,
        ).reshape(self.p, self.q)
        self.rq_matrix = np.array(
            [[sim_rq(r1, r2) for r2 in cand_rels] for r1 in ref_rels],
            dtype=np.float64,
        ).reshape(self.p, self.q)
        self.ref_begin = np.array([ref_index[r.source] for r in ref_rels], dtype=int)
        self.ref_end = np.array([ref_index[r.target] for r in ref_rels], dtype=int)
        self.cand_begin = np.array([cand_index[r.source] for r in cand_rels], dtype=int)
        self.cand_end = np.array([cand_index[r.target] for r in cand_rels], dtype=int)

    def attribute_matrix(self, weights: WeightConfig) -> np.ndarray:
        """sim_ca for every class pair."""
        out = np.empty((self.n, self.m), dtype=np.float64)
        for i in range(self.n):
            for j in range(self.m):
                out[i, j] = assignment_score(
                    weights.w_at * self.attr_types[i][j] + weights.w_an * self.attr_names[i][j]
                )
        return out

    def _parameter_score(self, weights: WeightConfig, i: int, j: int, k: int, l: int) -> float:
        return assignment_score(
            weights.w_pt * self.param_types[i][j][k][l]
            + weights.w_pn * self.param_names[i][j][k][l]
        )

    def method_matrix(self, weights: WeightConfig) -> np.ndarray:
        """sim_cm for every class pair."""
        out = np.empty((self.n, self.m), dtype=np.float64)
        for i in range(self.n):
            for j in range(self.m):
                rets = self.method_rets[i][j]
                q1, q2 = rets.shape
                simmp = np.empty((q1, q2), dtype=np.float64)
                for k in range(q1):
                    for l in range(q2):
                        simmp[k, l] = self._parameter_score(weights, i, j, k, l)
                entries = (
                    weights.w_mt * rets
                    + weights.w_mn * self.method_names[i][j]
                    + weights.w_mp * simmp
                )
                out[i, j] = assignment_score(entries)
        return out

    def class_matrix(self, weights: WeightConfig) -> np.ndarray:
        return (
            weights.w_n * self.class_names
            + weights.w_a * self.attribute_matrix(weights)
            + weights.w_m * self.method_matrix(weights)
        )

    def relation_matrix(self, weights: WeightConfig, class_entries: np.ndarray) -> np.ndarray:
        if self.p == 0 or self.q == 0:
            return np.zeros((self.p, self.q), dtype=np.float64)
        begins = class_entries[np.ix_(self.ref_begin, self.cand_begin)]
        ends = class_entries[np.ix_(self.ref_end, self.cand_end)]
        return (
            weights.w_rt * self.lut_matrix
            + weights.w_rq * self.rq_matrix
            + (weights.w_rn / 2.0) * (begins + ends)
        )

    def scores(self, weights: WeightConfig | None = None) -> ClueScores:
        weights = weights or WeightConfig.default()
        attr = self.attribute_matrix(weights)
        meth = self.method_matrix(weights)
        class_entries = (
            weights.w_n * self.class_names + weights.w_a * attr + weights.w_m * meth
        )
        match = optimal_matching(SimilarityMatrix(class_entries))
        clue_class_score = match.score

        if self.n == 0:
            attribute_score = 1.0
            method_score = 1.0
        else:
            attribute_score = float(sum(attr[i, j] for i, j in match.pairs)) / self.n
            method_score = float(sum(meth[i, j] for i, j in match.pairs)) / self.n

        relation_score = assignment_score(self.relation_matrix(weights, class_entries))
        overall = weights.w_e * clue_class_score + weights.w_r * relation_score
        return ClueScores(
            clue=overall,
            clue_class=clue_class_score,
            clue_attribute=attribute_score,
            clue_method=method_score,
            clue_relation=relation_score,
        )


def parameter_set_similarity(m1: Method, m2: Method, provider,
                             weights: WeightConfig | None = None) -> float:
    weights = weights or WeightConfig.default()
    types = _sigma_matrix(
        provider, [p.type_name for p in m1.params], [p.type_name for p in m2.params]
    )
    names = _sigma_matrix(
        provider, [p.name for p in m1.params], [p.name for p in m2.params]
    )
    return assignment_score(weights.w_pt * types + weights.w_pn * names)


def attribute_set_similarity(c1: ClassEntity, c2: ClassEntity, provider,
                             weights: WeightConfig | None = None) -> float:
    weights = weights or WeightConfig.default()
    types = _sigma_matrix(
        provider, [a.type_name for a in c1.attributes], [a.type_name for a in c2.attributes]
    )
    names = _sigma_matrix(
        provider, [a.name for a in c1.attributes], [a.name for a in c2.attributes]
    )
    return assignment_score(weights.w_at * types + weights.w_an * names)


def method_set_similarity(c1: ClassEntity, c2: ClassEntity, provider,
                          weights: WeightConfig | None = None) -> float:
    weights = weights or WeightConfig.default()
    rets = _sigma_matrix(
        provider, [m.return_type for m in c1.methods], [m.return_type for m in c2.methods]
    )
    names = _sigma_matrix(
        provider, [m.name for m in c1.methods], [m.name for m in c2.methods]
    )
    simmp = np.array(
        [
            [parameter_set_similarity(m1, m2, provider, weights) for m2 in c2.methods]
            for m1 in c1.methods
        ],
        dtype=np.float64,
    ).reshape(rets.shape)
    return assignment_score(weights.w_mt * rets + weights.w_mn * names + weights.w_mp * simmp)


def class_similarity_matrix(reference: ClassModel, candidate: ClassModel, provider,
                            weights: WeightConfig | None = None) -> SimilarityMatrix:
    weights = weights or WeightConfig.default()
    return SimilarityMatrix(PairEvaluator(reference, candidate, provider).class_matrix(weights))


def class_matching(reference: ClassModel, candidate: ClassModel, provider,
                   weights: WeightConfig | None = None) -> MatchingResult:
    return optimal_matching(class_similarity_matrix(reference, candidate, provider, weights))


def clue_class(reference: ClassModel, candidate: ClassModel, provider,
               weights: WeightConfig | None = None) -> float:
    return class_matching(reference, candidate, provider, weights).score


def clue_relation(reference: ClassModel, candidate: ClassModel, provider,
                  weights: WeightConfig | None = None,
                  lut: RelationshipTypeLUT | None = None) -> float:
    weights = weights or WeightConfig.default()
    return PairEvaluator(reference, candidate, provider, lut).scores(weights).clue_relation


def clue_attribute(reference: ClassModel, candidate: ClassModel, provider,
                   weights: WeightConfig | None = None) -> float:
    weights = weights or WeightConfig.default()
    return PairEvaluator(reference, candidate, provider).scores(weights).clue_attribute


def clue_method(reference: ClassModel, candidate: ClassModel, provider,
                weights: WeightConfig | None = None) -> float:
    weights = weights or WeightConfig.default()
    return PairEvaluator(reference, candidate, provider).scores(weights).clue_method


def clue(reference: ClassModel, candidate: ClassModel, provider,
         weights: WeightConfig | None = None,
         lut: RelationshipTypeLUT | None = None) -> ClueScores:
    """All five metrics for one ordered pair, sharing one class matching."""
    weights = weights or WeightConfig.default()
    return PairEvaluator(reference, candidate, provider, lut).scores(weights)
