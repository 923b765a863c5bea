"""Prebuilt automata, decay scenarios, and the per-step decay report.

The two adversarial constructions:

- ``adversarial_joint_scenario``: a 3-state automaton where a mixing symbol
  sends states 1 and 2 to the absorbing state 0 with probability 1/2 each
  (staying put otherwise) and a reveal keeps {1, 2}. Starting from mass
  split evenly over {1, 2}, every mix/reveal cycle halves the unnormalized
  mass while the decoded belief returns to the same two-point distribution,
  so the deferred-normalization tracker decays as 2^-t.

- ``adversarial_marginal_scenario``: over three items, alternate a 50/50
  swap of positions 1 and 2 with the reveal "position 1 holds element 1".
  The reveal replenishes entry (1, 1) but the never-revealed entry (2, 2)
  halves every cycle.

``run_and_report`` replays a scenario and records one row per step. With a
``FloatGrid`` the reported tracker stores every value rounded to a reduced
significand with flush-to-zero below the smallest normal magnitude
2**min_exp; the exact mass is tracked in log space alongside (survivals
come from a per-step-normalized shadow belief, so the diagnostic outlives
the tracker). The reported first underflow step is the first step whose
exact decay quantity (the ell-1 mass for joint runs, the smallest nonzero
entry for marginal runs) drops below 2**min_exp; the rounded tracker's
entries hit hard zero around the same point, visible in the row values.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Union

import numpy as np

from .automaton import (
    InconsistentObservationError,
    Pfsa,
    reveal_mask,
    reveal_only,
    transition_only,
)
from .joint import mixture_symbol, placement_reveal_symbol
from .marginal import MixSpec, RevealSpec, marginal_init, marginal_mix, marginal_reveal
from .perm import identity, transposition

RESET = "reset"


@dataclass(frozen=True)
class FloatGrid:
    """A reduced float format: ``sig_bits`` significand bits, round to
    nearest, and hard flush-to-zero below 2**min_exp (no subnormals)."""

    sig_bits: int
    min_exp: int

    def round_array(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        scale = 2.0 ** self.sig_bits
        mant, exp = np.frexp(x)
        out = np.ldexp(np.rint(mant * scale) / scale, exp)
        return np.where(np.abs(out) < 2.0 ** self.min_exp, 0.0, out)

    @property
    def min_normal(self) -> float:
        return 2.0 ** self.min_exp


SINGLE_PRECISION = FloatGrid(sig_bits=24, min_exp=-126)


@dataclass(frozen=True)
class JointScenario:
    """A joint-tracker run: automaton, initial unnormalized state, and a
    step list of symbol indices with optional ``RESET`` markers."""

    name: str
    automaton: Pfsa
    initial: np.ndarray
    steps: tuple[Union[int, str], ...]

    def __post_init__(self) -> None:
        initial = np.asarray(self.initial, dtype=float).copy()
        initial.setflags(write=False)
        object.__setattr__(self, "initial", initial)


@dataclass(frozen=True)
class MarginalScenario:
    """A marginal-tracker run from the identity state."""

    name: str
    n: int
    steps: tuple[Union[MixSpec, RevealSpec], ...]


def hidden_swap_automaton() -> Pfsa:
    """Two arrangements of a pair under an unobserved conditional swap.

    The ``swap`` symbol exchanges the pair with probability 1/2 and reveals
    nothing; the ``check`` symbol prints the first slot and is only
    consistent with the untouched arrangement (state 0). Starting certain
    of state 0, the belief diffuses to [1/2, 1/2] under ``swap`` and
    collapses back to [1, 0] when ``check`` is observed.
    """
    swap = transition_only(2, [[0.5, 0.5], [0.5, 0.5]], name="swap")
    check = reveal_only(2, {0}, name="check")
    return Pfsa((swap, check), q0=0)


def absorbing_automaton() -> Pfsa:
    """Three states; ``mix`` drains states 1 and 2 into the absorbing
    state 0 with probability 1/2, and ``keep`` reveals {1, 2}."""
    t_mix = np.array(
        [
            [1.0, 0.5, 0.5],
            [0.0, 0.5, 0.0],
            [0.0, 0.0, 0.5],
        ]
    )
    mix = transition_only(3, t_mix, name="mix")
    keep = reveal_only(3, {1, 2}, name="reveal")
    return Pfsa((mix, keep), q0=1)


def adversarial_joint_scenario(cycles: int, reset_every: int | None = None) -> JointScenario:
    """``cycles`` mix/reveal pairs on the absorbing automaton.

    The initial unnormalized state splits mass evenly over states {1, 2}
    (ell-1 norm 1); after t cycles the norm is exactly 2**-t while the
    decoded belief after every reveal is [0, 1/2, 1/2]. With
    ``reset_every=k`` a gated reset (re-inflating the tracker with its own
    decoded belief, the norm-1 prior a full reveal supplies) is inserted
    after every k-th cycle, bounding the norm below by 2**-k.
    """
    if cycles < 0:
        raise ValueError("cycles must be >= 0")
    if reset_every is not None and reset_every < 1:
        raise ValueError("reset_every must be >= 1")
    a = absorbing_automaton()
    steps: list[Union[int, str]] = []
    for cycle in range(1, cycles + 1):
        steps.extend((a.symbol_index("mix"), a.symbol_index("reveal")))
        if reset_every is not None and cycle % reset_every == 0:
            steps.append(RESET)
    name = "joint-absorbing" if reset_every is None else f"full-reveal-every-{reset_every}"
    return JointScenario(name, a, np.array([0.0, 0.5, 0.5]), tuple(steps))


def adversarial_marginal_scenario(cycles: int) -> MarginalScenario:
    """``cycles`` alternations of a 50/50 swap of positions 1 and 2 with
    the reveal "position 1 holds element 1" over three items.

    The smallest nonzero entry after t cycles is exactly 2**-t.
    """
    if cycles < 0:
        raise ValueError("cycles must be >= 0")
    mix = MixSpec(((identity(3), 0.5), (transposition(3, 1, 2), 0.5)))
    reveal = RevealSpec(position=1, element=1)
    steps: list[Union[MixSpec, RevealSpec]] = []
    for _ in range(cycles):
        steps.extend((mix, reveal))
    return MarginalScenario("marginal-swap-reveal", 3, tuple(steps))


def dfa_scenario(steps: int) -> JointScenario:
    """Deterministic regime: permutation kernels, vacuous reveals, one-hot
    start. The tracker's norm stays exactly 1 forever."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    swap01 = transition_only(3, [[0, 1, 0], [1, 0, 0], [0, 0, 1]], name="swap01")
    rotate = transition_only(3, [[0, 0, 1], [1, 0, 0], [0, 1, 0]], name="rotate")
    a = Pfsa((swap01, rotate), q0=0)
    initial = np.zeros(3)
    initial[a.q0] = 1.0
    return JointScenario("dfa", a, initial, tuple(i % 2 for i in range(steps)))


def noisy_swap_s3() -> Pfsa:
    """Six arrangements of three items; a commanded swap of items 1 and 2
    slips to a swap of items 1 and 3 half the time, and an observation pins
    "position 0 holds element 2"."""
    fuzzy = mixture_symbol(
        3,
        [(transposition(3, 0, 1), 0.5), (transposition(3, 0, 2), 0.5)],
        action="element",
        name="fuzzy_swap",
    )
    observe = placement_reveal_symbol(3, position=0, element=2, name="observe")
    return Pfsa((fuzzy, observe), q0=0)


@dataclass(frozen=True)
class DecayRow:
    step: int
    op: str
    l1_norm: float
    survival: float | None
    min_nonzero: float | None
    log2_norm: float


@dataclass(frozen=True)
class DecayReport:
    rows: tuple[DecayRow, ...]
    first_underflow_step: int | None

    def to_csv(self, sink) -> None:
        if isinstance(sink, (str, os.PathLike)):
            with open(sink, "w", encoding="utf-8") as fh:
                self.to_csv(fh)
            return
        sink.write("step,op,l1_norm,survival,min_nonzero,log2_norm\n")
        for row in self.rows:
            sink.write(
                ",".join(
                    (
                        str(row.step),
                        row.op,
                        repr(row.l1_norm),
                        "" if row.survival is None else repr(row.survival),
                        "" if row.min_nonzero is None else repr(row.min_nonzero),
                        repr(row.log2_norm),
                    )
                )
                + "\n"
            )


def _min_nonzero(x: np.ndarray) -> float | None:
    positive = x[x > 0]
    return float(positive.min()) if positive.size else None


def run_and_report(
    scenario: Union[JointScenario, MarginalScenario], grid: FloatGrid | None = None
) -> DecayReport:
    """Replay a scenario, recording norms, survivals, and underflow.

    Rows describe the tracker as stored: rounded to ``grid`` after every
    step when a grid is given, plain float64 otherwise. The underflow step
    compares the exact decay quantity against the grid's smallest normal
    magnitude (see module docstring).
    """
    if isinstance(scenario, JointScenario):
        return _run_joint(scenario, grid)
    if isinstance(scenario, MarginalScenario):
        return _run_marginal(scenario, grid)
    raise TypeError(f"unknown scenario type {type(scenario)!r}")


def _run_joint(scenario: JointScenario, grid: FloatGrid | None) -> DecayReport:
    a = scenario.automaton
    h = scenario.initial.copy()
    total = h.sum()
    if total <= 0:
        raise ValueError("scenario initial state has no mass")
    belief = h / total
    cum_log2 = math.log2(total)
    tracked = grid.round_array(h) if grid else h.copy()

    rows = []
    first_underflow = None
    for step, op in enumerate(scenario.steps, start=1):
        if op == RESET:
            # Gated reset: history annihilated, prior injected at full mass.
            prior = belief.copy()
            h = prior.copy()
            tracked = grid.round_array(prior) if grid else prior.copy()
            cum_log2 = 0.0
            label = "reset"
            surv = None
        else:
            sym = int(op)
            z = reveal_mask(a, sym)
            t = a.symbols[sym].transition
            surv = float((z * belief).sum())
            if surv <= 0.0:
                raise InconsistentObservationError(
                    f"step {step}: symbol {a.symbols[sym].name!r} is inconsistent"
                )
            belief = (t @ (z * belief)) / surv
            h = t @ (z * h)
            tracked = grid.round_array(t @ (z * tracked)) if grid else h.copy()
            cum_log2 += math.log2(surv)
            label = a.symbols[sym].name
        l1 = float(tracked.sum())
        rows.append(
            DecayRow(step, label, l1, surv, _min_nonzero(tracked), cum_log2)
        )
        if grid and first_underflow is None and cum_log2 < grid.min_exp:
            first_underflow = step
    return DecayReport(tuple(rows), first_underflow)


def _run_marginal(scenario: MarginalScenario, grid: FloatGrid | None) -> DecayReport:
    h = marginal_init(scenario.n)
    tracked = grid.round_array(h) if grid else h.copy()

    rows = []
    first_underflow = None
    for step, op in enumerate(scenario.steps, start=1):
        if isinstance(op, MixSpec):
            h = marginal_mix(h, op)
            tracked = grid.round_array(marginal_mix(tracked, op)) if grid else h.copy()
            label = "mix"
        elif isinstance(op, RevealSpec):
            h = marginal_reveal(h, op)
            tracked = grid.round_array(marginal_reveal(tracked, op)) if grid else h.copy()
            label = "reveal"
        else:
            raise TypeError(f"unknown marginal step {op!r}")
        l1 = float(np.abs(tracked).sum())
        exact_floor = _min_nonzero(h)
        rows.append(
            DecayRow(
                step,
                label,
                l1,
                None,
                _min_nonzero(tracked),
                math.log2(l1) if l1 > 0 else -math.inf,
            )
        )
        if (
            grid
            and first_underflow is None
            and exact_floor is not None
            and exact_floor < grid.min_normal
        ):
            first_underflow = step
    return DecayReport(tuple(rows), first_underflow)
