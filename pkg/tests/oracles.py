"""Independent reference implementations used only by the tests.

Everything here is deliberately written from the definitions, by brute
force, without importing any of the production matching or metric code:
assignment by enumerating every injection, metrics by literal recursion,
statistics by textbook formulas.
"""

from __future__ import annotations

import itertools
import math
import re
from math import comb

TIE = 1e-9


# --- assignment by enumeration ---------------------------------------------


def brute_force_matching(entries) -> tuple[float, list[tuple[int, int]]]:
    """(score, lexicographically smallest optimal pair list) by enumeration."""
    n = len(entries)
    m = len(entries[0]) if n else 0
    if n == 0:
        return 1.0, []
    if m == 0:
        return 0.0, []
    candidates: list[tuple[float, list[tuple[int, int]]]] = []
    if n <= m:
        for perm in itertools.permutations(range(m), n):
            pairs = [(i, perm[i]) for i in range(n)]
            total = sum(entries[i][j] for i, j in pairs)
            candidates.append((total, pairs))
    else:
        for perm in itertools.permutations(range(n), m):
            pairs = sorted((perm[j], j) for j in range(m))
            total = sum(entries[i][j] for i, j in pairs)
            candidates.append((total, pairs))
    best_total = max(total for total, _ in candidates)
    best_pairs = min(pairs for total, pairs in candidates if total >= best_total - TIE)
    return best_total / n, best_pairs


def brute_force_score(entries) -> float:
    return brute_force_matching(entries)[0]


# --- CLUE metrics by literal recursion --------------------------------------

_MANY = re.compile(r"\*|many|much|multi", re.IGNORECASE)
_QUANT = {"AS", "AG", "CO"}


def _match_label(q1: str, q2: str) -> float:
    if q1 == q2 or (_MANY.search(q1) and _MANY.search(q2)):
        return 1.0
    return 0.0


def naive_sim_rq(r1, r2) -> float:
    k1, k2 = r1.kind.value, r2.kind.value
    if k1 in _QUANT and k2 in _QUANT:
        return 0.5 * _match_label(r1.label.from_end, r2.label.from_end) + 0.5 * _match_label(
            r1.label.to_end, r2.label.to_end
        )
    if k1 not in _QUANT and k2 not in _QUANT:
        return 1.0
    return 0.0


def naive_sim_mp(m1, m2, sigma, w) -> float:
    entries = [
        [
            w.w_pt * sigma(p1.type_name, p2.type_name) + w.w_pn * sigma(p1.name, p2.name)
            for p2 in m2.params
        ]
        for p1 in m1.params
    ]
    return brute_force_score(entries)


def naive_sim_ca(c1, c2, sigma, w) -> float:
    entries = [
        [
            w.w_at * sigma(a1.type_name, a2.type_name) + w.w_an * sigma(a1.name, a2.name)
            for a2 in c2.attributes
        ]
        for a1 in c1.attributes
    ]
    return brute_force_score(entries)


def naive_sim_cm(c1, c2, sigma, w) -> float:
    entries = [
        [
            w.w_mt * sigma(m1.return_type, m2.return_type)
            + w.w_mn * sigma(m1.name, m2.name)
            + w.w_mp * naive_sim_mp(m1, m2, sigma, w)
            for m2 in c2.methods
        ]
        for m1 in c1.methods
    ]
    return brute_force_score(entries)


def naive_clue(reference, candidate, provider, w, lut) -> dict[str, float]:
    """All five metrics straight from the definitions."""
    sigma = provider.similarity
    n = len(reference.classes)
    m = len(candidate.classes)
    es_ce = [
        [
            w.w_n * sigma(c1.name, c2.name)
            + w.w_a * naive_sim_ca(c1, c2, sigma, w)
            + w.w_m * naive_sim_cm(c1, c2, sigma, w)
            for c2 in candidate.classes
        ]
        for c1 in reference.classes
    ]
    clue_class, pairs = brute_force_matching(es_ce)
    if n == 0:
        clue_attribute = 1.0
        clue_method = 1.0
    else:
        clue_attribute = (
            sum(
                naive_sim_ca(reference.classes[i], candidate.classes[j], sigma, w)
                for i, j in pairs
            )
            / n
        )
        clue_method = (
            sum(
                naive_sim_cm(reference.classes[i], candidate.classes[j], sigma, w)
                for i, j in pairs
            )
            / n
        )

    ref_index = {c.name: i for i, c in enumerate(reference.classes)}
    cand_index = {c.name: i for i, c in enumerate(candidate.classes)}
    es_cr = [
        [
            w.w_rt * lut.value(r1.kind, r2.kind)
            + w.w_rq * naive_sim_rq(r1, r2)
            + (w.w_rn / 2)
            * (
                es_ce[ref_index[r1.source]][cand_index[r2.source]]
                + es_ce[ref_index[r1.target]][cand_index[r2.target]]
            )
            for r2 in candidate.relationships
        ]
        for r1 in reference.relationships
    ]
    clue_relation = brute_force_score(es_cr)
    return {
        "clue": w.w_e * clue_class + w.w_r * clue_relation,
        "clue_class": clue_class,
        "clue_attribute": clue_attribute,
        "clue_method": clue_method,
        "clue_relation": clue_relation,
    }


# --- lexical similarity by an independent Dice implementation ---------------


def dice_similarity(s1: str, s2: str) -> float:
    def grams(text: str) -> set[str]:
        words = re.findall(r"[A-Za-z]+|[0-9]+", text)
        tokens: list[str] = []
        for word in words:
            tokens.extend(
                t.lower()
                for t in re.findall(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+", word)
            )
        out = set()
        for token in tokens:
            if len(token) == 1:
                out.add(token)
            for i in range(len(token) - 1):
                out.add(token[i : i + 2])
        return out

    if s1 == s2:
        return 1.0
    g1, g2 = grams(s1), grams(s2)
    if not g1 or not g2:
        return 0.0
    return 2 * len(g1 & g2) / (len(g1) + len(g2))


# --- textbook statistics -----------------------------------------------------


def textbook_pearson(x, y) -> float:
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    den = math.sqrt(sum((a - mx) ** 2 for a in x) * sum((b - my) ** 2 for b in y))
    return num / den


def average_ranks(values) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def textbook_spearman(x, y) -> float:
    return textbook_pearson(average_ranks(x), average_ranks(y))


def passk_reference(n: int, c: int, k: int) -> float:
    return 1.0 - comb(n - c, k) / comb(n, k)


# --- entropy weighting, spreadsheet style ------------------------------------


def entropy_ratings(rows: list[list[float]], invert_columns: set[int]) -> list[float]:
    """Min-max normalize, entropy-weight, and combine; plain loops."""
    n = len(rows)
    cols = len(rows[0])
    normalized = [[0.0] * cols for _ in range(n)]
    for j in range(cols):
        column = [row[j] for row in rows]
        low, high = min(column), max(column)
        for i in range(n):
            if high == low:
                normalized[i][j] = 0.5
            elif j in invert_columns:
                normalized[i][j] = (high - column[i]) / (high - low)
            else:
                normalized[i][j] = (column[i] - low) / (high - low)
    leftovers = []
    for j in range(cols):
        total = sum(normalized[i][j] for i in range(n))
        entropy = 0.0
        for i in range(n):
            p = normalized[i][j] / total
            if p > 0:
                entropy += p * math.log(p)
        entropy = -entropy / math.log(n)
        leftovers.append(1.0 - entropy)
    weight_sum = sum(leftovers)
    weights = [left / weight_sum for left in leftovers]
    return [sum(weights[j] * normalized[i][j] for j in range(cols)) for i in range(n)]
