"""Hand-built generalized-Householder recurrence for permutation tracking.

Each step carries a gate beta in [0, 2] and a unit key vector k; its
transition matrix is A = I - beta * k k^T, a symmetric rank-1 update with
eigenvalue 1 - beta on span{k} and 1 on the orthogonal complement. At
beta = 2 with k = (e_i - e_j)/sqrt(2) the matrix is exactly the
transposition of coordinates i and j, so a sequence of such steps composes
permutations through the linear recurrence H_t = A_t H_{t-1}. Gates capped
at beta <= 1 keep every eigenvalue nonnegative, which is why such a
recurrence cannot realize a swap (a swap has determinant -1).

Eigenvalues are checked by direct action on k and on vectors orthogonal to
k; the rank-1 structure makes a general eigensolver unnecessary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class HouseholderStep:
    """A gated reflection: transition matrix I - beta * k k^T with unit k."""

    beta: float
    key: np.ndarray

    def __post_init__(self) -> None:
        key = np.asarray(self.key, dtype=float).copy()
        if key.ndim != 1:
            raise ValueError("key must be a vector")
        norm = np.linalg.norm(key)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"key norm {norm!r} is not 1 within 1e-12")
        if not 0.0 <= self.beta <= 2.0:
            raise ValueError(f"beta {self.beta} outside [0, 2]")
        key.setflags(write=False)
        object.__setattr__(self, "key", key)

    @property
    def n(self) -> int:
        return self.key.shape[0]

    @property
    def eigenvalue(self) -> float:
        """The nontrivial eigenvalue 1 - beta (on span of the key)."""
        return 1.0 - self.beta


def householder_matrix(step: HouseholderStep) -> np.ndarray:
    return np.eye(step.n) - step.beta * np.outer(step.key, step.key)


def swap_head(n: int, i: int, j: int) -> HouseholderStep:
    """The step realizing the transposition of coordinates i and j:
    beta = 2, k = (e_i - e_j)/sqrt(2)."""
    if i == j:
        raise ValueError("swap needs two distinct coordinates")
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"coordinates ({i}, {j}) out of range for n={n}")
    key = np.zeros(n)
    key[i] = 1.0
    key[j] = -1.0
    key /= np.sqrt(2.0)
    return HouseholderStep(2.0, key)


def run_recurrence(steps: Sequence[HouseholderStep], h0: np.ndarray) -> np.ndarray:
    """Fold H <- A(step) @ H over the steps in sequence order."""
    h = np.asarray(h0, dtype=float).copy()
    for step in steps:
        if step.n != h.shape[0]:
            raise ValueError(f"step of size {step.n} applied to state of shape {h.shape}")
        h = householder_matrix(step) @ h
    return h


@dataclass(frozen=True)
class EigenRange:
    min_eig: float
    max_eig: float
    has_negative: bool


def eigenrange_check(steps: Sequence[HouseholderStep]) -> EigenRange:
    """Extremes of the nontrivial eigenvalues 1 - beta across the sequence."""
    if not steps:
        raise ValueError("need at least one step")
    eigs = [step.eigenvalue for step in steps]
    lo, hi = min(eigs), max(eigs)
    return EigenRange(lo, hi, lo < 0.0)
