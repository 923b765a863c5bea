"""Unnormalized joint belief tracking and joint automata over arrangements.

The joint tracker defers the filter's normalization to decode time:

    h' = T @ (z * h),      decode(h) = h / ||h||_1

Each reveal multiplies the running ell-1 mass by the survival probability
s = ||z * b||_1 of the current belief b, so mass telescopes to the product
of survivals and can shrink exponentially. ``log_mass`` carries the natural
log of that mass alongside h so diagnostics outlive h itself.

Arrangement automata: the states are the n! ways to place n distinct
elements on n positions, encoded as permutations c with
``c(element) = position`` and indexed lexicographically by one-line
notation (``perm.symmetric_group``). With that encoding the marginal of a
point belief at arrangement c is exactly ``perm.to_matrix(c)``. Group
elements act two ways:

- position action: the content of position p moves to position g(p)
  (c -> compose(c, g)); this matches row-mixing of marginal matrices.
- element action: element e trades places with element g(e)
  (c -> compose(g, c)); a "swap items 1 and 2 wherever they are" command.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .automaton import Pfsa, Symbol, reveal_mask
from .perm import Permutation, compose, lex_index, symmetric_group


class MassUnderflowError(ArithmeticError):
    """The unnormalized state has zero mass; decoding is undefined."""


@dataclass(frozen=True)
class JointLinearState:
    """Unnormalized message h plus the running log of its ell-1 mass."""

    h: np.ndarray
    log_mass: float

    def __post_init__(self) -> None:
        h = np.asarray(self.h, dtype=float).copy()
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def mass(self) -> float:
        return float(self.h.sum())


def joint_init(b0: np.ndarray) -> JointLinearState:
    b0 = np.asarray(b0, dtype=float)
    total = b0.sum()
    return JointLinearState(b0, math.log(total) if total > 0 else -math.inf)


def joint_step(state: JointLinearState, a: Pfsa, symbol: int) -> JointLinearState:
    """One linear update h' = T @ (z * h); never renormalizes.

    A state that has decayed to the zero vector is representable: the step
    returns it with log_mass = -inf instead of raising.
    """
    h = a.symbols[symbol].transition @ (reveal_mask(a, symbol) * state.h)
    before = state.h.sum()
    after = h.sum()
    if before > 0 and after > 0:
        log_mass = state.log_mass + math.log(after / before)
    else:
        log_mass = -math.inf
    return JointLinearState(h, log_mass)


def joint_decode(state: JointLinearState) -> np.ndarray:
    """Normalized belief h / ||h||_1. Raises MassUnderflowError on zero mass."""
    total = state.h.sum()
    if total <= 0.0:
        raise MassUnderflowError("joint state mass is zero; cannot decode a belief")
    return state.h / total


def survival(a: Pfsa, b: np.ndarray, symbol: int) -> float:
    """Belief mass consistent with the symbol's reveal, s = ||z * b||_1.

    Zero signals an observation inconsistent with the belief.
    """
    return float((reveal_mask(a, symbol) * np.asarray(b, dtype=float)).sum())


def gated_reset(state: JointLinearState, prior: np.ndarray) -> JointLinearState:
    """Annihilate history and inject a prior: h' = 0 * h + prior.

    With a one-hot prior this is the linear implementation of a full state
    reveal; with a uniform prior it re-inflates the tracker to full mass.
    """
    return joint_init(np.asarray(prior, dtype=float))


def arrangement_states(n: int) -> tuple[Permutation, ...]:
    """The lex-ordered arrangement encoding used by all joint automata here."""
    return symmetric_group(n)


def position_action(g: Permutation, c: Permutation) -> Permutation:
    return compose(c, g)


def element_action(g: Permutation, c: Permutation) -> Permutation:
    return compose(g, c)


def mixture_symbol(
    n: int,
    components: Sequence[tuple[Permutation, float]],
    action: str = "position",
    name: str = "mix",
) -> Symbol:
    """Transition-only symbol applying a convex mixture of group elements.

    ``action`` is "position" or "element" (see module docstring). Weights
    must be nonnegative and sum to 1.
    """
    act = {"position": position_action, "element": element_action}[action]
    weights = np.array([w for _, w in components], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError(f"weights {weights} are not a distribution")
    states = arrangement_states(n)
    t = np.zeros((len(states), len(states)))
    for g, w in components:
        for c in states:
            t[lex_index(act(g, c)), lex_index(c)] += w
    return Symbol(name, t, frozenset(range(len(states))))


def placement_reveal_symbol(n: int, position: int, element: int, name: str = "observe") -> Symbol:
    """Reveal-only symbol for the observation "position holds element"."""
    states = arrangement_states(n)
    if not (0 <= position < n and 0 <= element < n):
        raise ValueError(f"placement ({position}, {element}) out of range for n={n}")
    keep = frozenset(lex_index(c) for c in states if c(element) == position)
    return Symbol(name, np.eye(len(states)), keep)


def arrangement_automaton(n: int, symbols: Sequence[Symbol], q0: Permutation | None = None) -> Pfsa:
    """Bundle arrangement symbols into an automaton starting at ``q0``
    (identity arrangement by default, which is lex index 0)."""
    return Pfsa(tuple(symbols), q0=lex_index(q0) if q0 is not None else 0)
