"""Interpreter-session transcripts that interleave shuffles with reveals.

A trace is a rendered session over single-letter variables ``a``..``z``
initialized to 1..n, followed by shuffle commands with a print-based reveal
of one uniformly chosen variable after every S-th command. The grammar is
bit-exact; every line ends with a newline and carries no trailing spaces:

    init                >>> a = 1
    elementary swap     >>> a, c = c, a
    full permutation    >>> a, b, c = b, c, a
    reveal              >>> print('a', a)
                        a 2

A full-permutation command lists every variable on the left in canonical
order and variable ``sigma(i)`` at right-hand position ``i``, so executing
it assigns each variable the previous value of ``sigma(i)``; the stored
``Permutation`` is exactly that right-hand index map. An elementary swap
stores the equivalent full-size transposition. Rendering then parsing
reproduces the event list, and the executor replays the session to check
every revealed value.

Randomness: all sampling runs off ``numpy.random.default_rng(config.seed)``
in a fixed draw order (per command slot: the command, then the revealed
variable if the slot ends a reveal window), so a config regenerates its
trace byte-for-byte. Full permutations are drawn uniformly excluding the
identity, which carries no signal; the revealed variable is uniform.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .perm import Permutation, sample_uniform, transposition

ELEMENTARY_SWAP = "elementary_swap"
FULL_PERMUTATION = "full_permutation"
COMMAND_KINDS = (ELEMENTARY_SWAP, FULL_PERMUTATION)

_MAX_VARS = 26
_MAX_SEED = 2**64

_INIT_RE = re.compile(r"^>>> ([a-z]) = (\d+)$")
_PRINT_RE = re.compile(r"^>>> print\('([a-z])', ([a-z])\)$")
_OUTPUT_RE = re.compile(r"^([a-z]) (\d+)$")
_ASSIGN_RE = re.compile(r"^>>> ([a-z](?:, [a-z])+) = ([a-z](?:, [a-z])+)$")


class TraceParseError(ValueError):
    """Malformed transcript; carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class TraceConfig:
    n_vars: int
    n_commands: int
    reveal_spacing: int
    command_kind: str
    seed: int

    def __post_init__(self) -> None:
        if not 2 <= self.n_vars <= _MAX_VARS:
            raise ValueError(f"n_vars must be in [2, {_MAX_VARS}], got {self.n_vars}")
        if self.n_commands < 1:
            raise ValueError(f"n_commands must be >= 1, got {self.n_commands}")
        if self.reveal_spacing < 1:
            raise ValueError(f"reveal_spacing must be >= 1, got {self.reveal_spacing}")
        if self.command_kind not in COMMAND_KINDS:
            raise ValueError(f"command_kind must be one of {COMMAND_KINDS}")
        if not 0 <= self.seed < _MAX_SEED:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def n_reveals(self) -> int:
        return self.n_commands // self.reveal_spacing


@dataclass(frozen=True)
class TraceEvent:
    """One transcript event; ``text_lines`` is its exact rendering."""

    kind: str  # "init" | "command" | "reveal"
    text_lines: tuple[str, ...]
    permutation: Permutation | None = None
    var: int | None = None
    value: int | None = None


@dataclass(frozen=True)
class Trace:
    config: TraceConfig
    events: tuple[TraceEvent, ...]
    text: str
    reveal_spans: tuple[tuple[int, int], ...]
    final_state: tuple[int, ...]


@dataclass(frozen=True)
class RevealMismatch:
    event_index: int
    var: int
    simulated: int
    printed: int


@dataclass(frozen=True)
class ExecutionResult:
    final_state: tuple[int, ...]
    disagreements: tuple[RevealMismatch, ...]


def var_name(index: int) -> str:
    if not 0 <= index < _MAX_VARS:
        raise ValueError(f"variable index {index} out of range")
    return chr(ord("a") + index)


def _init_lines(var: int, value: int) -> tuple[str, ...]:
    return (f">>> {var_name(var)} = {value}",)


def _command_lines(p: Permutation, kind: str) -> tuple[str, ...]:
    if kind == ELEMENTARY_SWAP:
        moved = [i for i in range(p.n) if p(i) != i]
        if len(moved) != 2:
            raise ValueError(f"{p.mapping} is not a transposition")
        i, j = moved
        return (f">>> {var_name(i)}, {var_name(j)} = {var_name(j)}, {var_name(i)}",)
    lhs = ", ".join(var_name(i) for i in range(p.n))
    rhs = ", ".join(var_name(p(i)) for i in range(p.n))
    return (f">>> {lhs} = {rhs}",)


def _reveal_lines(var: int, value: int) -> tuple[str, ...]:
    name = var_name(var)
    return (f">>> print('{name}', {name})", f"{name} {value}")


def _assemble(events: Sequence[TraceEvent]) -> tuple[str, tuple[tuple[int, int], ...]]:
    """Join event lines into the transcript and locate revealed-value spans."""
    parts: list[str] = []
    spans: list[tuple[int, int]] = []
    offset = 0
    for ev in events:
        for line_index, line in enumerate(ev.text_lines):
            if ev.kind == "reveal" and line_index == 1:
                start = offset + len(var_name(ev.var)) + 1
                spans.append((start, start + len(str(ev.value))))
            parts.append(line)
            offset += len(line) + 1
    return "".join(part + "\n" for part in parts), tuple(spans)


def render(trace: Trace) -> str:
    """The transcript text; a pure function of the events."""
    return _assemble(trace.events)[0]


def execute(events: Sequence[TraceEvent]) -> ExecutionResult:
    """Replay a session and check every reveal against the simulated state.

    Disagreements are collected and reported, never raised.
    """
    state: list[int] = []
    mismatches: list[RevealMismatch] = []
    for index, ev in enumerate(events):
        if ev.kind == "init":
            if ev.var != len(state):
                raise ValueError(f"init event {index} out of order")
            state.append(ev.value)
        elif ev.kind == "command":
            if ev.permutation.n != len(state):
                raise ValueError(f"command over {ev.permutation.n} vars, state has {len(state)}")
            state = [state[ev.permutation(i)] for i in range(len(state))]
        elif ev.kind == "reveal":
            if ev.var >= len(state):
                raise ValueError(f"reveal of unknown variable index {ev.var}")
            if state[ev.var] != ev.value:
                mismatches.append(RevealMismatch(index, ev.var, state[ev.var], ev.value))
        else:
            raise ValueError(f"unknown event kind {ev.kind!r}")
    return ExecutionResult(tuple(state), tuple(mismatches))


def build_trace(
    config: TraceConfig,
    commands: Sequence[Permutation],
    reveal_vars: Sequence[int],
) -> Trace:
    """Deterministic trace assembly from explicit commands and reveal picks.

    ``generate`` samples its inputs and delegates here; calling it directly
    pins down a specific session (useful for worked examples and tests).
    """
    if len(commands) != config.n_commands:
        raise ValueError(f"expected {config.n_commands} commands, got {len(commands)}")
    if len(reveal_vars) != config.n_reveals:
        raise ValueError(f"expected {config.n_reveals} reveal choices, got {len(reveal_vars)}")
    events: list[TraceEvent] = []
    state = list(range(1, config.n_vars + 1))
    for var, value in enumerate(state):
        events.append(TraceEvent("init", _init_lines(var, value), var=var, value=value))
    reveal_index = 0
    for slot, command in enumerate(commands, start=1):
        if command.n != config.n_vars:
            raise ValueError(f"command over {command.n} vars in a {config.n_vars}-var trace")
        events.append(TraceEvent("command", _command_lines(command, config.command_kind), permutation=command))
        state = [state[command(i)] for i in range(config.n_vars)]
        if slot % config.reveal_spacing == 0:
            var = reveal_vars[reveal_index]
            reveal_index += 1
            events.append(TraceEvent("reveal", _reveal_lines(var, state[var]), var=var, value=state[var]))
    text, spans = _assemble(events)
    return Trace(config, tuple(events), text, spans, tuple(state))


def _sample_command(config: TraceConfig, rng: np.random.Generator) -> Permutation:
    if config.command_kind == ELEMENTARY_SWAP:
        i, j = (int(v) for v in rng.choice(config.n_vars, size=2, replace=False))
        return transposition(config.n_vars, i, j)
    while True:
        p = sample_uniform(config.n_vars, rng)
        if not p.is_identity():
            return p


def generate(config: TraceConfig, rng: np.random.Generator | None = None) -> Trace:
    """Sample a trace; with the default rng the result is a pure function
    of the config (seed included)."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    commands: list[Permutation] = []
    reveal_vars: list[int] = []
    for slot in range(1, config.n_commands + 1):
        commands.append(_sample_command(config, rng))
        if slot % config.reveal_spacing == 0:
            reveal_vars.append(int(rng.integers(config.n_vars)))
    return build_trace(config, commands, reveal_vars)


def parse(text: str) -> Trace:
    """Parse a transcript back into a trace.

    Inverse of ``render`` on the event list. The returned config carries
    reconstructed metadata: counts are exact, the command kind is inferred
    from statement shapes, the spacing is inferred when the reveal cadence
    is regular (1 otherwise), and the seed is unknowable (0).
    """
    lines = text.splitlines()
    events: list[TraceEvent] = []
    names: list[str] = []
    pending_print: tuple[str, int] | None = None  # (var name, line no)
    saw_command_or_reveal = False

    for lineno, line in enumerate(lines, start=1):
        if pending_print is not None:
            out = _OUTPUT_RE.match(line)
            if not out:
                raise TraceParseError(f"expected reveal output line, got {line!r}", lineno)
            name, value = out.group(1), int(out.group(2))
            if name != pending_print[0]:
                raise TraceParseError(
                    f"output line names {name!r} but print revealed {pending_print[0]!r}",
                    lineno,
                )
            var = names.index(name)
            events.append(
                TraceEvent("reveal", (lines[lineno - 2], line), var=var, value=value)
            )
            pending_print = None
            continue

        init = _INIT_RE.match(line)
        if init:
            name, value = init.group(1), int(init.group(2))
            if saw_command_or_reveal:
                raise TraceParseError("initialization after the first command", lineno)
            if name in names:
                raise TraceParseError(f"variable {name!r} initialized twice", lineno)
            if names and name != var_name(len(names)):
                raise TraceParseError(f"out-of-order variable {name!r}", lineno)
            names.append(name)
            events.append(TraceEvent("init", (line,), var=len(names) - 1, value=value))
            continue

        printed = _PRINT_RE.match(line)
        if printed:
            label, operand = printed.group(1), printed.group(2)
            if label != operand:
                raise TraceParseError(f"print label {label!r} differs from variable {operand!r}", lineno)
            if label not in names:
                raise TraceParseError(f"unknown variable {label!r}", lineno, line.index(label) + 1)
            saw_command_or_reveal = True
            pending_print = (label, lineno)
            continue

        assign = _ASSIGN_RE.match(line)
        if assign:
            saw_command_or_reveal = True
            events.append(_parse_command(assign, names, line, lineno))
            continue

        raise TraceParseError(f"unrecognized line {line!r}", lineno)

    if pending_print is not None:
        raise TraceParseError("transcript ends inside a reveal", len(lines) + 1)
    if len(names) < 2:
        raise TraceParseError("transcript initializes fewer than two variables", len(lines) + 1)

    return _trace_from_events(events, len(names))


def _parse_command(match: re.Match, names: list[str], line: str, lineno: int) -> TraceEvent:
    lhs = match.group(1).split(", ")
    rhs = match.group(2).split(", ")
    for name in lhs + rhs:
        if name not in names:
            raise TraceParseError(f"unknown variable {name!r}", lineno, line.index(name) + 1)
    if len(lhs) != len(rhs):
        raise TraceParseError("left and right sides differ in length", lineno)
    if len(set(lhs)) != len(lhs) or len(set(rhs)) != len(rhs):
        raise TraceParseError("assignment tuple is not bijective", lineno)
    n = len(names)
    if len(lhs) == 2 and len(lhs) < n:
        if rhs != [lhs[1], lhs[0]]:
            raise TraceParseError("two-variable command must be a swap", lineno)
        p = transposition(n, names.index(lhs[0]), names.index(lhs[1]))
    else:
        if lhs != names:
            raise TraceParseError("full command must list every variable in order", lineno)
        if sorted(rhs) != sorted(names):
            raise TraceParseError("assignment tuple is not bijective", lineno)
        p = Permutation(tuple(names.index(name) for name in rhs))
    return TraceEvent("command", (line,), permutation=p)


def _trace_from_events(events: list[TraceEvent], n_vars: int) -> Trace:
    commands = [e for e in events if e.kind == "command"]
    reveals = [e for e in events if e.kind == "reveal"]
    kind = ELEMENTARY_SWAP
    for e in commands:
        if len(e.text_lines[0].split(" = ")[0].split(", ")) > 2:
            kind = FULL_PERMUTATION
            break
    config = TraceConfig(
        n_vars=n_vars,
        n_commands=max(len(commands), 1),
        reveal_spacing=_infer_spacing(events),
        command_kind=kind,
        seed=0,
    )
    text, spans = _assemble(events)
    result = execute(events)
    return Trace(config, tuple(events), text, spans, result.final_state)


def _infer_spacing(events: list[TraceEvent]) -> int:
    gaps = []
    since_reveal = 0
    for e in events:
        if e.kind == "command":
            since_reveal += 1
        elif e.kind == "reveal":
            gaps.append(since_reveal)
            since_reveal = 0
    if gaps and len(set(gaps)) == 1 and gaps[0] >= 1:
        return gaps[0]
    return 1


# Line-delimited dataset export. One JSON object per trace with the fields
# text, n_vars, n_commands, reveal_spacing, command_kind, seed,
# reveal_spans, final_state; spans are [start, end) character offsets of
# the revealed value inside `text`, usable for loss masking.


def export_dataset(traces: Iterable[Trace], sink) -> int:
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            return export_dataset(traces, fh)
    count = 0
    for trace in traces:
        record = {
            "text": trace.text,
            "n_vars": trace.config.n_vars,
            "n_commands": trace.config.n_commands,
            "reveal_spacing": trace.config.reveal_spacing,
            "command_kind": trace.config.command_kind,
            "seed": trace.config.seed,
            "reveal_spans": [list(span) for span in trace.reveal_spans],
            "final_state": list(trace.final_state),
        }
        sink.write(json.dumps(record, separators=(",", ":")) + "\n")
        count += 1
    return count


CURRICULUM_STAGES = ((8, 1), (16, 2), (32, 4), (64, 8))


def derive_seed(base_seed: int, stage: int, index: int) -> int:
    """Per-trace 64-bit seed split deterministically from a base seed."""
    seq = np.random.SeedSequence(entropy=base_seed, spawn_key=(stage, index))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def curriculum(
    stage_samples: int = 15000, n_vars: int = 5, base_seed: int = 0
) -> list[list[TraceConfig]]:
    """Four batches of full-permutation configs over ``n_vars`` variables
    with (length, spacing) rising through {(8,1), (16,2), (32,4), (64,8)}."""
    if stage_samples < 1:
        raise ValueError("stage_samples must be >= 1")
    batches = []
    for stage, (length, spacing) in enumerate(CURRICULUM_STAGES):
        batches.append(
            [
                TraceConfig(
                    n_vars=n_vars,
                    n_commands=length,
                    reveal_spacing=spacing,
                    command_kind=FULL_PERMUTATION,
                    seed=derive_seed(base_seed, stage, index),
                )
                for index in range(stage_samples)
            ]
        )
    return batches
