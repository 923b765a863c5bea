"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance is pinned in the assertions below.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager

import numpy as np

import revealtrack as rt
from revealtrack.cli import main

# Maps the worked example's arrangement numbering ([1,2,3], [2,1,3], [3,2,1],
# [1,3,2], [2,3,1], [3,1,2]) onto the package's lexicographic indexing.
ARRANGEMENT_ORDER = [0, 2, 5, 1, 4, 3]


@contextmanager
def criterion(cid: str, description: str):
    try:
        yield
    except BaseException:
        print(f"[acceptance] {cid} FAIL: {description}")
        raise
    print(f"[acceptance] {cid} PASS: {description}")


def test_c01_joint_absorbing_decay(tmp_path):
    with criterion("C01", "joint absorbing scenario: exact halving norms, decode [0,.5,.5]"):
        started = time.perf_counter()
        out = tmp_path / "joint.csv"
        assert main(["decay", "--scenario", "joint-absorbing", "--cycles", "20", "--out", str(out)]) == 0
        rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
        assert len(rows) == 40
        for row in rows:
            step = int(row[0])
            assert float(row[2]) == 2.0 ** -(step // 2)  # bitwise: halving is exact

        scenario = rt.adversarial_joint_scenario(20)
        state = rt.joint_init(scenario.initial)
        for step, symbol in enumerate(scenario.steps, start=1):
            state = rt.joint_step(state, scenario.automaton, symbol)
            if step % 2 == 0:
                assert state.mass == 2.0 ** -(step // 2)
                decode_gap = np.abs(rt.joint_decode(state) - np.array([0.0, 0.5, 0.5])).max()
                assert decode_gap <= 1e-15
        assert time.perf_counter() - started < 1.0


def test_c02_marginal_swap_reveal_decay(tmp_path):
    with criterion("C02", "marginal swap/reveal cycle: five exact matrices, floors .5/.25/.125"):
        started = time.perf_counter()
        expected = [
            np.array([[1, 0, 0], [0, 0.5, 0.5], [0, 0.5, 0.5]]),
            np.array([[1, 0, 0], [0, 1, 0], [0, 0, 0.5]]),
            np.array([[1, 0, 0], [0, 0.5, 0.25], [0, 0.5, 0.25]]),
            np.array([[1, 0, 0], [0, 1, 0], [0, 0, 0.25]]),
            np.array([[1, 0, 0], [0, 0.5, 0.125], [0, 0.5, 0.125]]),
        ]
        scenario = rt.adversarial_marginal_scenario(3)
        h = rt.marginal_init(3)
        produced = []
        for op in scenario.steps:
            h = rt.marginal_mix(h, op) if isinstance(op, rt.MixSpec) else rt.marginal_reveal(h, op)
            produced.append(h)
        for got, want in zip(produced, expected):
            assert np.array_equal(got, want)  # entrywise exact

        out = tmp_path / "marginal.csv"
        assert main(["decay", "--scenario", "marginal-swap-reveal", "--cycles", "3", "--out", str(out)]) == 0
        rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
        floors = [float(row[4]) for row in rows if row[1] == "reveal"]
        assert floors == [0.5, 0.25, 0.125]
        assert time.perf_counter() - started < 1.0


def test_c03_three_item_worked_example():
    with criterion("C03", "six-state noisy swap: h1/h2 exact, uniform reset to 1/6"):
        a = rt.noisy_swap_s3()
        state = rt.joint_init(rt.one_hot(6, a.q0))
        state = rt.joint_step(state, a, a.symbol_index("fuzzy_swap"))
        assert np.array_equal(state.h[ARRANGEMENT_ORDER], [0.0, 0.5, 0.5, 0.0, 0.0, 0.0])
        state = rt.joint_step(state, a, a.symbol_index("observe"))
        assert np.array_equal(state.h[ARRANGEMENT_ORDER], [0.0, 0.0, 0.5, 0.0, 0.0, 0.0])
        reset = rt.gated_reset(state, np.full(6, 1.0 / 6.0))
        assert np.abs(reset.h - 1.0 / 6.0).max() <= 1e-15


def test_c04_hidden_swap_belief_collapse():
    with criterion("C04", "conditional swap: belief [1,0] -> [.5,.5] -> [1,0] exact"):
        a = rt.hidden_swap_automaton()
        b0 = rt.one_hot(2, a.q0)
        b1 = rt.belief_update(a, b0, a.symbol_index("swap"))
        b2 = rt.belief_update(a, b1, a.symbol_index("check"))
        assert np.array_equal(b0, [1.0, 0.0])
        assert np.array_equal(b1, [0.5, 0.5])
        assert np.array_equal(b2, [1.0, 0.0])


def test_c05_oracle_equivalence_property():
    with criterion("C05", "1000 random automata: decode matches exact filter, mass telescopes"):
        started = time.perf_counter()
        rng = np.random.default_rng(20260810)
        for _ in range(1000):
            m = int(rng.integers(2, 6))
            a = rt.random_automaton(m, int(rng.integers(2, 4)), rng)
            symbols = rt.sample_trajectory(a, 40, rng).symbols
            exact = rt.belief_trajectory(a, symbols)
            state = rt.joint_init(rt.one_hot(a.m, a.q0))
            log_product = 0.0
            for t, symbol in enumerate(symbols, start=1):
                s = rt.survival(a, rt.joint_decode(state), symbol)
                log_product += math.log(s)
                state = rt.joint_step(state, a, symbol)
                assert np.abs(rt.joint_decode(state) - exact[t]).max() <= 1e-9
            product = math.exp(log_product)
            assert abs(state.mass - product) <= 1e-9 * product
        elapsed = time.perf_counter() - started
        assert elapsed < 30.0, f"oracle property took {elapsed:.1f}s"


def test_c06_marginal_joint_bridge():
    with criterion("C06", "mixing-only bridge to 1e-9; reveal zero-set containment (n=3 exhaustive)"):
        rng = np.random.default_rng(99)
        # mixing-only equality over 20 steps for n <= 4
        for _ in range(60):
            n = int(rng.integers(2, 5))
            group = rt.symmetric_group(n)
            b = rt.one_hot(len(group), 0)
            h = rt.marginal_init(n)
            for _ in range(20):
                k = int(rng.integers(1, min(4, len(group)) + 1))
                picks = rng.choice(len(group), size=k, replace=False)
                weights = rng.dirichlet(np.ones(k))
                components = tuple((group[i], float(w)) for i, w in zip(picks, weights))
                b = rt.mixture_symbol(n, components, action="position").transition @ b
                h = rt.marginal_mix(h, rt.MixSpec(components))
                assert np.abs(h - rt.joint_to_marginal(b, n)).max() <= 1e-9

        # reveal support: exhaustive over all nine targets for n = 3,
        # across a batch of mixed states including the identity state
        group = rt.symmetric_group(3)
        prefixes = [rt.one_hot(6, 0)]
        for _ in range(50):
            b = rt.one_hot(6, 0)
            for _ in range(int(rng.integers(1, 7))):
                k = int(rng.integers(1, 4))
                picks = rng.choice(6, size=k, replace=False)
                weights = rng.dirichlet(np.ones(k))
                components = tuple((group[i], float(w)) for i, w in zip(picks, weights))
                b = rt.mixture_symbol(3, components, action="position").transition @ b
            prefixes.append(b)
        for b in prefixes:
            h = rt.joint_to_marginal(b, 3)
            for position in range(3):
                for element in range(3):
                    mask = np.array([1.0 if c(element) == position else 0.0 for c in group])
                    mass = float((mask * b).sum())
                    if mass <= 0.0:
                        continue
                    posterior = rt.joint_to_marginal(mask * b / mass, 3)
                    tracked = rt.marginal_reveal(h, rt.RevealSpec(position, element))
                    zeroed = tracked == 0.0
                    assert np.all(posterior[zeroed] <= 1e-12)


def test_c07_sinkhorn_projection():
    with criterion("C07", "Sinkhorn: 1000 positive 5x5 to 1e-9; diag(1,1,.5) -> identity"):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            result = rt.sinkhorn_project(rng.random((5, 5)) + 1e-3)
            assert result.converged
            assert np.abs(result.matrix.sum(axis=0) - 1.0).max() <= 1e-9
            assert np.abs(result.matrix.sum(axis=1) - 1.0).max() <= 1e-9
        pinned = rt.sinkhorn_project(np.diag([1.0, 1.0, 0.5]))
        assert np.allclose(pinned.matrix, np.eye(3), atol=1e-9)


def test_c08_vectorized_step_identity():
    with criterion("C08", "Kronecker-vectorized step equals bilinear step to 1e-12 (1000 cases)"):
        rng = np.random.default_rng(8)
        worst = 0.0
        for _ in range(1000):
            n = int(rng.integers(2, 6))
            h = rng.standard_normal((n, n))
            a_l = rng.standard_normal((n, n))
            a_r = rng.standard_normal((n, n))
            inject = rng.standard_normal((n, n))
            gap = np.abs(
                rt.bilinear_step(h, a_l, a_r, inject) - rt.vectorized_step(h, a_l, a_r, inject)
            ).max()
            worst = max(worst, gap)
        assert worst <= 1e-12


def test_c09_householder_permutation_tracking():
    with criterion("C09", "256 swap gates in S_8 track composition to 1e-12; eigen gates"):
        rng = np.random.default_rng(9)
        for _ in range(5):
            steps = []
            cumulative = rt.identity(8)
            for _ in range(256):
                i, j = (int(v) for v in rng.choice(8, size=2, replace=False))
                steps.append(rt.swap_head(8, i, j))
                cumulative = rt.compose(cumulative, rt.transposition(8, i, j))
            tracked = rt.run_recurrence(steps, np.eye(8))
            assert np.abs(tracked - rt.to_matrix(cumulative)).max() <= 1e-12
            report = rt.eigenrange_check(steps)
            assert report.min_eig == -1.0 and report.has_negative

        capped = []
        for _ in range(64):
            key = rng.standard_normal(8)
            key /= np.linalg.norm(key)
            capped.append(rt.HouseholderStep(float(rng.uniform(0.0, 1.0)), key))
        capped_report = rt.eigenrange_check(capped)
        assert capped_report.min_eig >= 0.0 and not capped_report.has_negative


def test_c10_discretized_state_counts():
    with criterion("C10", "exact big-integer state counts"):
        assert rt.marginal_discretization_count(10, 10) == 10**81
        assert rt.joint_discretization_count(3) == 64


def test_c11_trace_pipeline(tmp_path):
    with criterion("C11", "10,000 traces round-trip; curriculum quadruples; byte-identical regen"):
        started = time.perf_counter()
        rng = np.random.default_rng(11)
        configs = [
            rt.TraceConfig(
                n_vars=int(rng.integers(2, 7)),
                n_commands=int(rng.integers(1, 65)),
                reveal_spacing=int(rng.integers(1, 9)),
                command_kind=rt.ELEMENTARY_SWAP if rng.random() < 0.5 else rt.FULL_PERMUTATION,
                seed=int(rng.integers(0, 2**63)),
            )
            for _ in range(10_000)
        ]
        for config in configs:
            trace = rt.generate(config)
            parsed = rt.parse(rt.render(trace))
            assert parsed.events == trace.events
            assert rt.execute(parsed.events).disagreements == ()

        batches = rt.curriculum(stage_samples=1)
        assert [(b[0].n_commands, b[0].reveal_spacing) for b in batches] == [
            (8, 1), (16, 2), (32, 4), (64, 8),
        ]

        first = tmp_path / "regen1.jsonl"
        second = tmp_path / "regen2.jsonl"
        subset = configs[:500]
        rt.export_dataset((rt.generate(c) for c in subset), first)
        rt.export_dataset((rt.generate(c) for c in subset), second)
        assert first.read_bytes() == second.read_bytes()
        elapsed = time.perf_counter() - started
        assert elapsed < 60.0, f"trace pipeline took {elapsed:.1f}s"


def test_c12_underflow_threshold_and_reset_stability():
    with criterion("C12", "single-precision underflow at cycle 127; resets keep 1e4 cycles alive"):
        report = rt.run_and_report(rt.adversarial_joint_scenario(130), rt.SINGLE_PRECISION)
        assert report.first_underflow_step is not None
        first_cycle = (report.first_underflow_step + 1) // 2
        assert first_cycle == 127

        stabilized = rt.run_and_report(
            rt.adversarial_joint_scenario(10_000, reset_every=8), rt.SINGLE_PRECISION
        )
        assert stabilized.first_underflow_step is None
        assert min(row.l1_norm for row in stabilized.rows) == 2.0**-8
