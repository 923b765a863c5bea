"""Exact arithmetic on the symmetric group S_n.

Conventions used throughout the package:

- A permutation is stored in zero-based one-line notation: ``mapping[i]`` is
  the image of ``i``. The array is always a bijection on ``{0, ..., n-1}``.
- ``compose(p, q)`` applies ``p`` first, then ``q``:
  ``compose(p, q)(i) == q(p(i))``.
- ``to_matrix(p)`` is the column representation ``M @ e_i == e_{p(i)}``,
  so matrices compose in reverse order:
  ``to_matrix(compose(p, q)) == to_matrix(q) @ to_matrix(p)``.
- ``apply(p, items)`` moves the item in slot ``i`` to slot ``p(i)`` (the
  "shuffle cups between positions" action, matching ``to_matrix`` acting on
  one-hot position vectors).
- Randomness always comes from an explicit ``numpy.random.Generator``
  (PCG64 via ``numpy.random.default_rng(seed)``); callers own their
  generators and record the 64-bit seed.

The textual format for a permutation is comma-separated one-line notation,
e.g. ``"2,0,1"``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class Permutation:
    """A permutation of {0, ..., n-1} in one-line notation."""

    mapping: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.mapping)
        if n == 0:
            raise ValueError("permutation must have at least one element")
        if sorted(self.mapping) != list(range(n)):
            raise ValueError(f"{self.mapping!r} is not a bijection on range({n})")

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        return self.mapping[i]

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.mapping))


def identity(n: int) -> Permutation:
    """The identity permutation of S_n. Requires n >= 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Permutation(tuple(range(n)))


def compose(first: Permutation, second: Permutation) -> Permutation:
    """Apply ``first`` then ``second``: result(i) = second(first(i))."""
    if first.n != second.n:
        raise ValueError(f"size mismatch: {first.n} vs {second.n}")
    return Permutation(tuple(second.mapping[first.mapping[i]] for i in range(first.n)))


def inverse(p: Permutation) -> Permutation:
    inv = [0] * p.n
    for i, v in enumerate(p.mapping):
        inv[v] = i
    return Permutation(tuple(inv))


def transposition(n: int, i: int, j: int) -> Permutation:
    """The transposition exchanging i and j in S_n."""
    if not (0 <= i < n and 0 <= j < n):
        raise ValueError(f"indices ({i}, {j}) out of range for n={n}")
    if i == j:
        raise ValueError("transposition requires two distinct indices")
    mapping = list(range(n))
    mapping[i], mapping[j] = mapping[j], mapping[i]
    return Permutation(tuple(mapping))


def to_matrix(p: Permutation) -> np.ndarray:
    """The n-by-n 0/1 matrix with M @ e_i = e_{p(i)}."""
    m = np.zeros((p.n, p.n))
    for i, v in enumerate(p.mapping):
        m[v, i] = 1.0
    return m


def apply(p: Permutation, items):
    """Reorder a sequence: the item in slot i moves to slot p(i)."""
    if len(items) != p.n:
        raise ValueError(f"sequence of length {len(items)} under permutation of size {p.n}")
    out = [None] * p.n
    for i, x in enumerate(items):
        out[p.mapping[i]] = x
    return type(items)(out) if isinstance(items, (list, tuple)) else out


def sample_uniform(n: int, rng: np.random.Generator) -> Permutation:
    """Uniformly random element of S_n; deterministic given a seeded rng."""
    return Permutation(tuple(int(v) for v in rng.permutation(n)))


def format_permutation(p: Permutation) -> str:
    """Comma-separated one-line notation, e.g. '2,0,1'."""
    return ",".join(str(v) for v in p.mapping)


def parse_permutation(text: str) -> Permutation:
    try:
        values = tuple(int(part) for part in text.strip().split(","))
    except ValueError as exc:
        raise ValueError(f"malformed permutation text {text!r}") from exc
    return Permutation(values)


@lru_cache(maxsize=None)
def symmetric_group(n: int) -> tuple[Permutation, ...]:
    """All n! elements of S_n, ordered lexicographically by one-line notation."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return tuple(Permutation(m) for m in itertools.permutations(range(n)))


@lru_cache(maxsize=None)
def _lex_index_table(n: int) -> dict[tuple[int, ...], int]:
    return {p.mapping: i for i, p in enumerate(symmetric_group(n))}


def lex_index(p: Permutation) -> int:
    """Index of p in the lexicographic enumeration of S_n."""
    return _lex_index_table(p.n)[p.mapping]
