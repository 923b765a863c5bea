"""Named self-checks wired to the ``verify`` CLI command.

Each check replays a construction or property at a configurable size and
returns a pass/fail result with a one-line detail. The ``verify`` command
prints one line per check and exits nonzero if any fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import householder as hh
from . import joint as jt
from . import marginal as mg
from . import scenarios as sc
from . import trace as tr
from .automaton import (
    belief_trajectory,
    belief_update,
    joint_discretization_count,
    marginal_discretization_count,
    one_hot,
    random_automaton,
    sample_trajectory,
)
from .perm import Permutation, compose, identity, lex_index, symmetric_group, to_matrix, transposition


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name, bool(passed), detail)


def check_absorbing_decay(cycles: int = 20) -> CheckResult:
    scenario = sc.adversarial_joint_scenario(cycles)
    state = jt.joint_init(scenario.initial)
    expected_belief = np.array([0.0, 0.5, 0.5])
    worst = 0.0
    exact_norms = True
    for cycle in range(1, cycles + 1):
        state = jt.joint_step(state, scenario.automaton, 0)
        state = jt.joint_step(state, scenario.automaton, 1)
        if state.mass != 2.0 ** -cycle:
            exact_norms = False
        worst = max(worst, np.abs(jt.joint_decode(state) - expected_belief).max())
    ok = exact_norms and worst <= 1e-15
    return _result(
        "joint-absorbing-decay",
        ok,
        f"norms exact={exact_norms}, max decode error {worst:.2e} over {cycles} cycles",
    )


def check_swap_reveal_decay() -> CheckResult:
    scenario = sc.adversarial_marginal_scenario(3)
    expected = [
        np.array([[1, 0, 0], [0, 0.5, 0.5], [0, 0.5, 0.5]]),
        np.array([[1, 0, 0], [0, 1, 0], [0, 0, 0.5]]),
        np.array([[1, 0, 0], [0, 0.5, 0.25], [0, 0.5, 0.25]]),
        np.array([[1, 0, 0], [0, 1, 0], [0, 0, 0.25]]),
        np.array([[1, 0, 0], [0, 0.5, 0.125], [0, 0.5, 0.125]]),
    ]
    h = mg.marginal_init(3)
    states = []
    for op in scenario.steps:
        h = mg.marginal_mix(h, op) if isinstance(op, mg.MixSpec) else mg.marginal_reveal(h, op)
        states.append(h)
    exact = all(np.array_equal(states[k], expected[k]) for k in range(5))
    floors = [float(states[k][2, 2]) for k in (1, 3, 5)]
    return _result(
        "marginal-swap-reveal-decay",
        exact and floors == [0.5, 0.25, 0.125],
        f"five matrices exact={exact}, unrevealed entry follows {floors}",
    )


def check_noisy_swap_example() -> CheckResult:
    a = sc.noisy_swap_s3()
    state = jt.joint_init(one_hot(6, a.q0))
    state = jt.joint_step(state, a, a.symbol_index("fuzzy_swap"))
    h1_expected = np.zeros(6)
    h1_expected[lex_index(Permutation((1, 0, 2)))] = 0.5
    h1_expected[lex_index(Permutation((2, 1, 0)))] = 0.5
    ok1 = np.array_equal(state.h, h1_expected)
    state = jt.joint_step(state, a, a.symbol_index("observe"))
    h2_expected = np.zeros(6)
    h2_expected[lex_index(Permutation((2, 1, 0)))] = 0.5
    ok2 = np.array_equal(state.h, h2_expected)
    reset = jt.gated_reset(state, np.full(6, 1.0 / 6.0))
    ok3 = np.abs(reset.h - 1.0 / 6.0).max() <= 1e-15
    return _result(
        "noisy-swap-worked-example",
        ok1 and ok2 and ok3,
        f"h1 exact={ok1}, h2 exact={ok2}, uniform reset ok={ok3}",
    )


def check_hidden_swap_belief() -> CheckResult:
    a = sc.hidden_swap_automaton()
    b0 = one_hot(2, a.q0)
    b1 = belief_update(a, b0, a.symbol_index("swap"))
    b2 = belief_update(a, b1, a.symbol_index("check"))
    ok = (
        np.array_equal(b0, [1.0, 0.0])
        and np.array_equal(b1, [0.5, 0.5])
        and np.array_equal(b2, [1.0, 0.0])
    )
    return _result("hidden-swap-belief", ok, f"trajectory {b0} -> {b1} -> {b2}")


def check_oracle_equivalence(
    runs: int = 200, max_m: int = 5, steps: int = 40, seed: int = 20260810
) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_decode = 0.0
    worst_telescope = 0.0
    for _ in range(runs):
        m = int(rng.integers(2, max_m + 1))
        a = random_automaton(m, int(rng.integers(2, 4)), rng)
        symbols = sample_trajectory(a, steps, rng).symbols
        exact = belief_trajectory(a, symbols)
        state = jt.joint_init(one_hot(a.m, a.q0))
        log_product = 0.0
        for t, s in enumerate(symbols, start=1):
            log_product += math.log(jt.survival(a, jt.joint_decode(state), s))
            state = jt.joint_step(state, a, s)
            worst_decode = max(worst_decode, np.abs(jt.joint_decode(state) - exact[t]).max())
        product = math.exp(log_product)
        worst_telescope = max(worst_telescope, abs(state.mass - product) / product)
    ok = worst_decode <= 1e-9 and worst_telescope <= 1e-9
    return _result(
        "joint-oracle-equivalence",
        ok,
        f"{runs} runs of {steps} steps: decode err {worst_decode:.2e}, "
        f"telescoping err {worst_telescope:.2e}",
    )


def check_marginal_bridge(runs: int = 50, max_n: int = 4, steps: int = 20, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(runs):
        n = int(rng.integers(2, max_n + 1))
        group = symmetric_group(n)
        b = one_hot(len(group), 0)
        h = mg.marginal_init(n)
        for _ in range(steps):
            k = int(rng.integers(1, min(4, len(group)) + 1))
            picks = rng.choice(len(group), size=k, replace=False)
            weights = rng.dirichlet(np.ones(k))
            components = tuple((group[i], float(w)) for i, w in zip(picks, weights))
            symbol = jt.mixture_symbol(n, components, action="position")
            b = symbol.transition @ b
            h = mg.marginal_mix(h, mg.MixSpec(components))
        worst = max(worst, np.abs(h - mg.joint_to_marginal(b, n)).max())
    support_ok, support_detail = _reveal_support_exhaustive(seed)
    ok = worst <= 1e-9 and support_ok
    return _result(
        "marginal-joint-bridge",
        ok,
        f"mixing error {worst:.2e} over {runs} runs; {support_detail}",
    )


def _reveal_support_exhaustive(seed: int) -> tuple[bool, str]:
    """Every entry zeroed by a reveal must be zero in the conditioned joint's
    marginal; exhaustive over reveal targets for n = 3."""
    rng = np.random.default_rng(seed)
    group = symmetric_group(3)
    checked = 0
    for _ in range(20):
        b = one_hot(6, 0)
        h = mg.marginal_init(3)
        for _ in range(int(rng.integers(1, 6))):
            k = int(rng.integers(1, 4))
            picks = rng.choice(6, size=k, replace=False)
            weights = rng.dirichlet(np.ones(k))
            components = tuple((group[i], float(w)) for i, w in zip(picks, weights))
            b = jt.mixture_symbol(3, components, action="position").transition @ b
            h = mg.marginal_mix(h, mg.MixSpec(components))
        for position in range(3):
            for element in range(3):
                mask = np.array([1.0 if c(element) == position else 0.0 for c in group])
                mass = float((mask * b).sum())
                if mass <= 0.0:
                    continue  # observation impossible here
                posterior = mg.joint_to_marginal(mask * b / mass, 3)
                tracked = mg.marginal_reveal(h, mg.RevealSpec(position, element))
                if np.any((tracked == 0.0) & (posterior > 1e-12)):
                    return False, f"support leak at reveal ({position}, {element})"
                checked += 1
    return True, f"reveal support contained in posterior support ({checked} reveals)"


def check_sinkhorn(runs: int = 200, seed: int = 11) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(runs):
        result = mg.sinkhorn_project(rng.random((5, 5)) + 1e-3)
        if not result.converged:
            return _result("sinkhorn-projection", False, "failed to converge on positive input")
        worst = max(worst, result.residual)
    pinned = mg.sinkhorn_project(np.diag([1.0, 1.0, 0.5]))
    identity_ok = np.allclose(pinned.matrix, np.eye(3), atol=1e-9)
    ok = worst <= 1e-9 and identity_ok
    return _result(
        "sinkhorn-projection",
        ok,
        f"{runs} positive matrices residual <= {worst:.2e}; diagonal support -> identity {identity_ok}",
    )


def check_kronecker(runs: int = 200, seed: int = 13) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(runs):
        n = int(rng.integers(2, 5))
        h = rng.standard_normal((n, n))
        a_l = rng.standard_normal((n, n))
        a_r = rng.standard_normal((n, n))
        inject = rng.standard_normal((n, n))
        direct = mg.bilinear_step(h, a_l, a_r, inject)
        vectorized = mg.vectorized_step(h, a_l, a_r, inject)
        worst = max(worst, np.abs(direct - vectorized).max())
    d_l, d_r, inject = mg.reveal_operators(3, mg.RevealSpec(1, 1))
    h1 = np.array([[1, 0, 0], [0, 0.5, 0.5], [0, 0.5, 0.5]])
    reveal_ok = np.allclose(
        mg.vectorized_step(h1, d_l, d_r, inject),
        np.array([[1, 0, 0], [0, 1, 0], [0, 0, 0.5]]),
        atol=1e-12,
    )
    ok = worst <= 1e-12 and reveal_ok
    return _result(
        "kronecker-vectorization",
        ok,
        f"{runs} random instances max gap {worst:.2e}; reveal via kron ok={reveal_ok}",
    )


def check_householder_composition(length: int = 256, n: int = 8, seed: int = 17) -> CheckResult:
    rng = np.random.default_rng(seed)
    steps = []
    cumulative = identity(n)
    for _ in range(length):
        i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
        steps.append(hh.swap_head(n, i, j))
        cumulative = compose(cumulative, transposition(n, i, j))
    tracked = hh.run_recurrence(steps, np.eye(n))
    gap = np.abs(tracked - to_matrix(cumulative)).max()
    return _result(
        "householder-composition",
        gap <= 1e-12,
        f"{length} swaps in S_{n}: max deviation {gap:.2e}",
    )


def check_eigen_gate(seed: int = 19) -> CheckResult:
    rng = np.random.default_rng(seed)
    swaps = [hh.swap_head(4, 0, 1), hh.swap_head(4, 2, 3)]
    swap_range = hh.eigenrange_check(swaps)
    capped = []
    for _ in range(64):
        key = rng.standard_normal(4)
        key /= np.linalg.norm(key)
        capped.append(hh.HouseholderStep(float(rng.uniform(0.0, 1.0)), key))
    capped_range = hh.eigenrange_check(capped)
    det = float(np.linalg.det(hh.run_recurrence(capped, np.eye(4))))
    ok = (
        swap_range.min_eig == -1.0
        and swap_range.has_negative
        and capped_range.min_eig >= 0.0
        and not capped_range.has_negative
        and det >= -1e-12
    )
    return _result(
        "householder-eigen-gate",
        ok,
        f"beta=2 min eig {swap_range.min_eig}; capped min eig {capped_range.min_eig:.3f}, "
        f"product det {det:.3e} (a swap needs det -1)",
    )


def check_state_counts() -> CheckResult:
    ok = (
        joint_discretization_count(3) == 64
        and marginal_discretization_count(10, 10) == 10**81
        and marginal_discretization_count(2, 5) == 5
    )
    return _result("discretized-state-counts", ok, "2**3! = 64, 10**81, 5**1 = 5")


def check_trace_roundtrip(count: int = 300, seed: int = 23) -> CheckResult:
    rng = np.random.default_rng(seed)
    reparsed_ok = True
    disagreements = 0
    for _ in range(count):
        config = tr.TraceConfig(
            n_vars=int(rng.integers(2, 7)),
            n_commands=int(rng.integers(1, 41)),
            reveal_spacing=int(rng.integers(1, 9)),
            command_kind=tr.ELEMENTARY_SWAP if rng.random() < 0.5 else tr.FULL_PERMUTATION,
            seed=int(rng.integers(0, 2**63)),
        )
        trace = tr.generate(config)
        parsed = tr.parse(tr.render(trace))
        if parsed.events != trace.events:
            reparsed_ok = False
        disagreements += len(tr.execute(parsed.events).disagreements)
        if tr.generate(config).text != trace.text:
            reparsed_ok = False
    ok = reparsed_ok and disagreements == 0
    return _result(
        "trace-roundtrip",
        ok,
        f"{count} traces reparsed={reparsed_ok}, reveal disagreements={disagreements}",
    )


def check_underflow_threshold(long_cycles: int = 1000) -> CheckResult:
    joint_report = sc.run_and_report(
        sc.adversarial_joint_scenario(130), sc.SINGLE_PRECISION
    )
    joint_cycle = (
        None
        if joint_report.first_underflow_step is None
        else (joint_report.first_underflow_step + 1) // 2
    )
    marginal_report = sc.run_and_report(
        sc.adversarial_marginal_scenario(130), sc.SINGLE_PRECISION
    )
    marginal_cycle = (
        None
        if marginal_report.first_underflow_step is None
        else (marginal_report.first_underflow_step + 1) // 2
    )
    reset_report = sc.run_and_report(
        sc.adversarial_joint_scenario(long_cycles, reset_every=8), sc.SINGLE_PRECISION
    )
    ok = joint_cycle == 127 and marginal_cycle == 127 and reset_report.first_underflow_step is None
    return _result(
        "underflow-threshold",
        ok,
        f"joint underflow at cycle {joint_cycle}, marginal at {marginal_cycle}, "
        f"with 8-cycle resets none over {long_cycles} cycles",
    )


def check_fault_probe() -> CheckResult:
    return _result("fault-injection-probe", False, "deliberate failure requested")


def run_all(
    runs: int = 200,
    max_n: int = 5,
    steps: int = 40,
    trace_count: int = 300,
    seed: int = 20260810,
    inject_fault: bool = False,
) -> list[CheckResult]:
    results = [
        check_absorbing_decay(),
        check_swap_reveal_decay(),
        check_noisy_swap_example(),
        check_hidden_swap_belief(),
        check_oracle_equivalence(runs=runs, max_m=max_n, steps=steps, seed=seed),
        check_marginal_bridge(runs=max(10, runs // 4), max_n=min(max_n, 4), steps=min(steps, 20), seed=seed + 1),
        check_sinkhorn(runs=runs, seed=seed + 2),
        check_kronecker(runs=runs, seed=seed + 3),
        check_householder_composition(seed=seed + 4),
        check_eigen_gate(seed=seed + 5),
        check_state_counts(),
        check_trace_roundtrip(count=trace_count, seed=seed + 6),
        check_underflow_threshold(),
    ]
    if inject_fault:
        results.append(check_fault_probe())
    return results
