from __future__ import annotations

import io

import numpy as np
import pytest

from revealtrack.marginal import MixSpec, RevealSpec
from revealtrack.scenarios import (
    RESET,
    FloatGrid,
    SINGLE_PRECISION,
    adversarial_joint_scenario,
    adversarial_marginal_scenario,
    dfa_scenario,
    run_and_report,
)


def test_float_grid_rounding():
    grid = FloatGrid(sig_bits=24, min_exp=-126)
    assert grid.round_array(np.array([1.0]))[0] == 1.0
    # one ulp below the 24-bit grid rounds away
    assert grid.round_array(np.array([1.0 + 2.0**-25]))[0] == 1.0
    assert grid.round_array(np.array([1.0 + 2.0**-23]))[0] == 1.0 + 2.0**-23
    # flush-to-zero strictly below the smallest normal
    assert grid.round_array(np.array([2.0**-126]))[0] == 2.0**-126
    assert grid.round_array(np.array([2.0**-127]))[0] == 0.0
    assert grid.round_array(np.array([0.0]))[0] == 0.0
    assert grid.round_array(np.array([-3.0]))[0] == -3.0
    assert SINGLE_PRECISION.min_normal == 2.0**-126


def test_joint_scenario_shape():
    empty = adversarial_joint_scenario(0)
    assert empty.steps == ()
    assert empty.initial.sum() == 1.0
    with_resets = adversarial_joint_scenario(4, reset_every=2)
    labels = [with_resets.automaton.symbols[s].name if s != RESET else RESET for s in with_resets.steps]
    assert labels == ["mix", "reveal", "mix", "reveal", RESET, "mix", "reveal", "mix", "reveal", RESET]
    with pytest.raises(ValueError):
        adversarial_joint_scenario(-1)
    with pytest.raises(ValueError):
        adversarial_joint_scenario(2, reset_every=0)


def test_joint_absorbing_norms_are_exact_halvings():
    report = run_and_report(adversarial_joint_scenario(50))
    assert report.first_underflow_step is None
    for row in report.rows:
        cycle_completed = row.step // 2
        assert row.l1_norm == 2.0 ** -cycle_completed
        assert row.log2_norm == -float(cycle_completed)
        assert row.survival == (0.5 if row.op == "reveal" else 1.0)


def test_dfa_scenario_constant_norm():
    report = run_and_report(dfa_scenario(100))
    assert len(report.rows) == 100
    for row in report.rows:
        assert row.l1_norm == 1.0
        assert row.survival == 1.0
        assert row.min_nonzero == 1.0


def test_marginal_scenario_values():
    scenario = adversarial_marginal_scenario(3)
    assert len(scenario.steps) == 6
    assert isinstance(scenario.steps[0], MixSpec)
    assert isinstance(scenario.steps[1], RevealSpec)
    assert adversarial_marginal_scenario(0).steps == ()
    report = run_and_report(scenario)
    floors = [row.min_nonzero for row in report.rows if row.op == "reveal"]
    assert floors == [0.5, 0.25, 0.125]
    assert all(row.survival is None for row in report.rows)


def test_joint_underflow_cycle():
    report = run_and_report(adversarial_joint_scenario(130), SINGLE_PRECISION)
    assert report.first_underflow_step == 254  # reveal of cycle 127
    # the rounded tracker's entries flush to zero during cycle 126
    dead = [row.step for row in report.rows if row.l1_norm == 0.0]
    assert dead[0] == 252


def test_marginal_underflow_cycle():
    report = run_and_report(adversarial_marginal_scenario(130), SINGLE_PRECISION)
    assert report.first_underflow_step == 253  # mix of cycle 127


def test_gated_resets_prevent_underflow():
    report = run_and_report(adversarial_joint_scenario(500, reset_every=8), SINGLE_PRECISION)
    assert report.first_underflow_step is None
    norms = [row.l1_norm for row in report.rows]
    assert min(norms) == 2.0**-8
    resets = [row for row in report.rows if row.op == "reset"]
    assert all(row.l1_norm == 1.0 for row in resets)
    assert all(row.survival is None for row in resets)


def test_reset_keeps_decode_exact():
    # Re-inflation must not change the decoded belief: norms return to 1
    # and the post-reveal survival pattern is unchanged afterwards.
    report = run_and_report(adversarial_joint_scenario(20, reset_every=4))
    survivals = [row.survival for row in report.rows if row.op == "reveal"]
    assert survivals == [0.5] * 20


def test_csv_layout():
    report = run_and_report(adversarial_joint_scenario(1))
    buf = io.StringIO()
    report.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "step,op,l1_norm,survival,min_nonzero,log2_norm"
    assert lines[1] == "1,mix,1.0,1.0,0.25,0.0"
    assert lines[2] == "2,reveal,0.5,0.5,0.25,-1.0"

    marginal_buf = io.StringIO()
    run_and_report(adversarial_marginal_scenario(1)).to_csv(marginal_buf)
    first = marginal_buf.getvalue().splitlines()[1].split(",")
    assert first[3] == ""  # survival not applicable to marginal runs


def test_csv_to_path(tmp_path):
    out = tmp_path / "report.csv"
    run_and_report(adversarial_joint_scenario(2)).to_csv(out)
    assert out.read_text().startswith("step,op,")


def test_emulated_rows_match_exact_until_flush():
    exact = run_and_report(adversarial_joint_scenario(40))
    emulated = run_and_report(adversarial_joint_scenario(40), SINGLE_PRECISION)
    for row_exact, row_emulated in zip(exact.rows, emulated.rows):
        assert row_exact.l1_norm == row_emulated.l1_norm  # powers of two fit in 24 bits
