"""Syntax Pass@k from per-task validation counts.

For one task with n generated samples of which c validate, the probability
that at least one of k drawn samples validates is 1 - C(n-c, k)/C(n, k);
Pass@k is the mean of that probability over tasks.  The ratio of binomials
is evaluated as a running product so large n cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass


class PassAtKDomainError(ValueError):
    """k exceeded a record's sample count, or a record was inconsistent."""


@dataclass
class TaskSampleRecord:
    task_id: int | str
    n: int
    c: int

    def __post_init__(self) -> None:
        if not 0 <= self.c <= self.n:
            raise PassAtKDomainError(
                f"task {self.task_id!r}: need 0 <= c <= n, got c={self.c}, n={self.n}"
            )


def pass_at_k_single(n: int, c: int, k: int) -> float:
    """1 - C(n-c, k)/C(n, k) in stable product form."""
    if k < 1 or k > n:
        raise PassAtKDomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n - c < k:
        return 1.0
    ratio = 1.0
    for i in range(k):
        ratio *= (n - c - i) / (n - i)
    return 1.0 - ratio


def pass_at_k(records: list[TaskSampleRecord], k: int) -> float:
    if not records:
        raise PassAtKDomainError("need at least one record")
    return sum(pass_at_k_single(r.n, r.c, k) for r in records) / len(records)
