"""Probabilistic finite-state automata with state reveals.

An automaton has m states, an alphabet of symbols, and per symbol:

- a column-stochastic transition matrix ``T`` with
  ``T[i, j] = P(next state = i | current state = j)``, and
- a nonempty reveal set ``rho``: the environment may only emit the symbol
  while the true state lies in ``rho``, so observing the symbol prunes every
  state outside ``rho`` from the belief.

Beliefs are plain length-m numpy vectors on the probability simplex. The
exact filtering update for a symbol is

    b' = f(T @ (z * b)),   f(x) = x / ||x||_1

where ``z`` is the 0/1 diagonal mask of the reveal set. A symbol with
``rho`` equal to the whole state set is transition-only (the reveal is
vacuous); a symbol whose ``T`` is the identity is reveal-only (the state
does not move).
"""

from __future__ import annotations

import io
import math
import os
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

_SIMPLEX_ATOL = 1e-12
_NAME_RE = re.compile(r"^[A-Za-z0-9_\-]+$")


class InconsistentObservationError(ValueError):
    """A reveal carried zero belief mass: the observed symbol is impossible
    under the current belief, so the normalized update is undefined."""


class DeadEndError(RuntimeError):
    """No symbol is consistent with the current state during sampling."""


class AutomatonFormatError(ValueError):
    """The textual automaton document is malformed."""


@dataclass(frozen=True)
class Symbol:
    """One input symbol: a transition kernel plus a reveal set."""

    name: str
    transition: np.ndarray  # (m, m), column-stochastic
    reveal: frozenset[int]

    def __post_init__(self) -> None:
        t = np.asarray(self.transition, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise ValueError(f"transition matrix must be square, got {t.shape}")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "reveal", frozenset(int(q) for q in self.reveal))
        if not _NAME_RE.match(self.name):
            raise ValueError(f"symbol name {self.name!r} must match {_NAME_RE.pattern}")

    @property
    def m(self) -> int:
        return self.transition.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Symbol):
            return NotImplemented
        return (
            self.name == other.name
            and self.reveal == other.reveal
            and np.array_equal(self.transition, other.transition)
        )

    def __hash__(self) -> int:
        return hash((self.name, self.reveal, self.transition.tobytes()))


@dataclass(frozen=True)
class Pfsa:
    """An immutable automaton: symbols plus the initial state index."""

    symbols: tuple[Symbol, ...]
    q0: int

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError("automaton needs at least one symbol")
        sizes = {s.m for s in self.symbols}
        if len(sizes) != 1:
            raise ValueError(f"symbols disagree on state count: {sorted(sizes)}")
        names = [s.name for s in self.symbols]
        if len(set(names)) != len(names):
            raise ValueError("symbol names must be unique")

    @property
    def m(self) -> int:
        return self.symbols[0].m

    @property
    def alphabet_size(self) -> int:
        return len(self.symbols)

    def symbol_index(self, name: str) -> int:
        for i, s in enumerate(self.symbols):
            if s.name == name:
                return i
        raise KeyError(name)


def reveal_mask(a: Pfsa, symbol: int) -> np.ndarray:
    """Diagonal of the reveal matrix as a 0/1 vector of length m."""
    z = np.zeros(a.m)
    for q in a.symbols[symbol].reveal:
        z[q] = 1.0
    return z


def reveal_only(m: int, subset, name: str = "reveal") -> Symbol:
    """A symbol that prunes the belief to ``subset`` without moving state."""
    subset = frozenset(int(q) for q in subset)
    if not subset:
        raise ValueError("reveal subset must be nonempty")
    if any(not 0 <= q < m for q in subset):
        raise ValueError(f"reveal subset {sorted(subset)} out of range for m={m}")
    return Symbol(name, np.eye(m), subset)


def transition_only(m: int, transition, name: str = "step") -> Symbol:
    """A symbol that moves state by ``transition`` and reveals nothing."""
    t = np.asarray(transition, dtype=float)
    if t.shape != (m, m):
        raise ValueError(f"expected a {m}x{m} matrix, got {t.shape}")
    sym = Symbol(name, t, frozenset(range(m)))
    bad = _column_violations(t)
    if bad:
        raise ValueError("; ".join(bad))
    return sym


def _column_violations(t: np.ndarray, atol: float = _SIMPLEX_ATOL) -> list[str]:
    out = []
    if np.any(t < 0):
        out.append("transition matrix has negative entries")
    sums = t.sum(axis=0)
    worst = np.argmax(np.abs(sums - 1.0))
    if abs(sums[worst] - 1.0) > atol:
        out.append(f"column {worst} sums to {sums[worst]!r}, expected 1")
    return out


def validate(a: Pfsa, atol: float = _SIMPLEX_ATOL) -> list[str]:
    """Check automaton invariants; returns a list of violations (empty = ok)."""
    problems: list[str] = []
    if not 0 <= a.q0 < a.m:
        problems.append(f"q0={a.q0} out of range for m={a.m}")
    for idx, sym in enumerate(a.symbols):
        for msg in _column_violations(sym.transition, atol):
            problems.append(f"symbol {sym.name!r}: {msg}")
        if not sym.reveal:
            problems.append(f"symbol {sym.name!r}: reveal set is empty")
        elif any(not 0 <= q < a.m for q in sym.reveal):
            problems.append(f"symbol {sym.name!r}: reveal set out of range")
    return problems


def validate_belief(b: np.ndarray, m: int, atol: float = _SIMPLEX_ATOL) -> list[str]:
    """Check that b is a probability vector over m states."""
    problems = []
    b = np.asarray(b)
    if b.shape != (m,):
        problems.append(f"belief shape {b.shape}, expected ({m},)")
        return problems
    if np.any(b < 0):
        problems.append("belief has negative entries")
    if abs(b.sum() - 1.0) > atol:
        problems.append(f"belief sums to {b.sum()!r}")
    return problems


def one_hot(m: int, q: int) -> np.ndarray:
    b = np.zeros(m)
    b[q] = 1.0
    return b


def belief_update(a: Pfsa, b: np.ndarray, symbol: int) -> np.ndarray:
    """Exact normalized belief update for one observed symbol.

    Computes f(T @ (z * b)) with f(x) = x/||x||_1. Raises
    InconsistentObservationError when the reveal keeps zero mass, since the
    normalization of the zero vector is undefined.
    """
    b = np.asarray(b, dtype=float)
    v = a.symbols[symbol].transition @ (reveal_mask(a, symbol) * b)
    mass = v.sum()
    if mass <= 0.0:
        raise InconsistentObservationError(
            f"symbol {a.symbols[symbol].name!r} has zero belief mass"
        )
    return v / mass


def belief_trajectory(a: Pfsa, symbols, b0: np.ndarray | None = None) -> np.ndarray:
    """Beliefs along a symbol sequence; row t is the belief after t symbols.

    Row 0 is the initial belief (one-hot at q0 unless ``b0`` is given).
    This per-step-normalized filter is the reference the deferred-
    normalization trackers are measured against.
    """
    b = one_hot(a.m, a.q0) if b0 is None else np.asarray(b0, dtype=float).copy()
    rows = [b.copy()]
    for s in symbols:
        b = belief_update(a, b, s)
        rows.append(b.copy())
    return np.array(rows)


# Environment policy: given (state, consistent symbol indices, rng) pick one.
Policy = Callable[[int, np.ndarray, np.random.Generator], int]


def uniform_policy(state: int, consistent: np.ndarray, rng: np.random.Generator) -> int:
    return int(consistent[rng.integers(len(consistent))])


def consistent_symbols(a: Pfsa, state: int) -> np.ndarray:
    return np.array([i for i, s in enumerate(a.symbols) if state in s.reveal], dtype=int)


def sample_transition(a: Pfsa, symbol: int, state: int, rng: np.random.Generator) -> int:
    """Draw the next state from column ``state`` of the symbol's kernel."""
    col = a.symbols[symbol].transition[:, state]
    return int(np.searchsorted(np.cumsum(col), rng.random(), side="right").clip(0, a.m - 1))


@dataclass(frozen=True)
class Trajectory:
    states: tuple[int, ...]   # q_0 .. q_T
    symbols: tuple[int, ...]  # sigma_1 .. sigma_T


def sample_trajectory(
    a: Pfsa,
    steps: int,
    rng: np.random.Generator,
    policy: Policy = uniform_policy,
) -> Trajectory:
    """Simulate the environment for ``steps`` symbols.

    At each step the environment, which sees the true state, picks a symbol
    whose reveal set contains that state (the consistency constraint) via
    ``policy``, then the state moves through the symbol's kernel. Raises
    DeadEndError if no symbol is consistent with the current state.
    """
    q = a.q0
    states = [q]
    chosen: list[int] = []
    for t in range(steps):
        options = consistent_symbols(a, q)
        if len(options) == 0:
            raise DeadEndError(f"state {q} at step {t} admits no consistent symbol")
        s = policy(q, options, rng)
        if q not in a.symbols[s].reveal:
            raise DeadEndError(f"policy chose inconsistent symbol {s} in state {q}")
        q = sample_transition(a, s, q, rng)
        chosen.append(s)
        states.append(q)
    return Trajectory(tuple(states), tuple(chosen))


def random_automaton(
    m: int,
    n_symbols: int,
    rng: np.random.Generator,
    reveal_prob: float = 0.5,
) -> Pfsa:
    """A random automaton for property checks.

    Symbol 0 always reveals the full state set, so every state has at least
    one consistent symbol and trajectories never dead-end. Remaining symbols
    get random column-stochastic kernels and random nonempty reveal sets.
    """
    if n_symbols < 1:
        raise ValueError("need at least one symbol")
    symbols = []
    for k in range(n_symbols):
        t = rng.random((m, m)) + 1e-3
        t /= t.sum(axis=0, keepdims=True)
        if k == 0:
            subset = frozenset(range(m))
        else:
            keep = rng.random(m) < reveal_prob
            if not keep.any():
                keep[rng.integers(m)] = True
            subset = frozenset(int(q) for q in np.flatnonzero(keep))
        symbols.append(Symbol(f"s{k}", t, subset))
    return Pfsa(tuple(symbols), q0=int(rng.integers(m)))


def joint_discretization_count(n: int) -> int:
    """Number of DFA states for a binary discretization of a belief over all
    n! arrangements: 2 ** n!. Exact big integer."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2 ** math.factorial(n)


def marginal_discretization_count(n: int, k: int) -> int:
    """Number of DFA states when each of the (n-1)^2 free coordinates of an
    n-by-n doubly stochastic matrix is split into k bins: k ** (n-1)^2."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if k < 2:
        raise ValueError("k must be >= 2")
    return k ** ((n - 1) ** 2)


# Textual automaton format. Layout:
#
#   pfsa v1
#   states <m>
#   q0 <index>
#   symbol <name>
#   reveal <sorted indices>
#   T
#   <m rows of m floats>
#
# with one `symbol` block per alphabet entry. Floats are written with repr
# and therefore round-trip bit-exactly.


def write_automaton(a: Pfsa, sink) -> None:
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            write_automaton(a, fh)
        return
    sink.write("pfsa v1\n")
    sink.write(f"states {a.m}\n")
    sink.write(f"q0 {a.q0}\n")
    for sym in a.symbols:
        sink.write(f"symbol {sym.name}\n")
        sink.write(("reveal " + " ".join(str(q) for q in sorted(sym.reveal))).rstrip() + "\n")
        sink.write("T\n")
        for row in sym.transition:
            sink.write(" ".join(repr(float(v)) for v in row) + "\n")


def dumps_automaton(a: Pfsa) -> str:
    buf = io.StringIO()
    write_automaton(a, buf)
    return buf.getvalue()


def read_automaton(source) -> Pfsa:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as fh:
            return loads_automaton(fh.read())
    return loads_automaton(source.read())


def loads_automaton(text: str) -> Pfsa:
    lines = text.splitlines()
    pos = 0

    def take(keyword: str) -> str:
        nonlocal pos
        if pos >= len(lines):
            raise AutomatonFormatError(f"unexpected end of document, wanted {keyword!r}")
        line = lines[pos]
        head, _, rest = line.partition(" ")
        if head != keyword:
            raise AutomatonFormatError(f"line {pos + 1}: expected {keyword!r}, got {line!r}")
        pos += 1
        return rest.strip()

    def take_row() -> str:
        nonlocal pos
        if pos >= len(lines):
            raise AutomatonFormatError("unexpected end of document inside matrix")
        line = lines[pos]
        pos += 1
        return line

    if take("pfsa") != "v1":
        raise AutomatonFormatError("unsupported format version")
    try:
        m = int(take("states"))
        q0 = int(take("q0"))
    except ValueError as exc:
        raise AutomatonFormatError(str(exc)) from exc

    symbols = []
    while pos < len(lines) and lines[pos].strip():
        name = take("symbol")
        reveal_text = take("reveal")
        try:
            subset = frozenset(int(v) for v in reveal_text.split())
        except ValueError as exc:
            raise AutomatonFormatError(f"bad reveal set for {name!r}") from exc
        take("T")
        rows = []
        for _ in range(m):
            raw = take_row()
            try:
                row = [float(v) for v in raw.split()]
            except ValueError as exc:
                raise AutomatonFormatError(f"bad matrix row {raw!r}") from exc
            if len(row) != m:
                raise AutomatonFormatError(f"row of length {len(row)}, expected {m}")
            rows.append(row)
        symbols.append(Symbol(name, np.array(rows), subset))
    if not symbols:
        raise AutomatonFormatError("document defines no symbols")
    return Pfsa(tuple(symbols), q0=q0)
