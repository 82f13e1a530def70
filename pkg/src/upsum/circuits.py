"""Feynman path sums for {CNOT, H, pi/8} circuits.

Basis states are bit strings with character ``i`` giving qubit ``i``.
Internally a configuration is an int with qubit ``i`` at bit ``i``.

Phases live on the 1/16-turn grid: the pi/8 gate ``T`` multiplies |0> by
e^{+i pi/8} (+1/16 turn) and |1> by e^{-i pi/8} (-1/16 turn); a Hadamard
branch a -> b contributes (-1)^(a b) (a half turn when a = b = 1) and a
factor 2^{-1/2} that is collected into the amplitude's global scale.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .bitcore import BitString
from .machine import DEFAULT_MACHINE, Dialect, Machine
from .pathsum import ExactAmplitude

__all__ = [
    "Gate",
    "Circuit",
    "PathSumResult",
    "RealPartConstruction",
    "NonDiagonalCircuitError",
    "pathsum_amplitude",
    "pathsum_amplitudes",
    "statevector_oracle",
    "oracle_amplitude",
    "phase_oracle_sigma",
    "realpart_construction",
    "random_circuit",
    "parse_circuit",
    "diagonal_expectation",
    "all_states",
]

GRID = 4  # phases in units of 2**-4 turn
_T0, _T1, _HALF = 1, 15, 8
MAX_ORACLE_QUBITS = 14


@dataclass(frozen=True)
class Gate:
    kind: str  # "H", "T" or "CNOT"
    qubits: tuple[int, ...]

    def __post_init__(self) -> None:
        arity = 2 if self.kind == "CNOT" else 1
        if self.kind not in ("H", "T", "CNOT") or len(self.qubits) != arity:
            raise ValueError(f"bad gate {self.kind} {self.qubits}")
        if self.kind == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise ValueError("CNOT control and target must differ")

    @classmethod
    def H(cls, q: int) -> Gate:
        return cls("H", (q,))

    @classmethod
    def T(cls, q: int) -> Gate:
        return cls("T", (q,))

    @classmethod
    def CNOT(cls, control: int, target: int) -> Gate:
        return cls("CNOT", (control, target))

    def __str__(self) -> str:
        return " ".join([self.kind, *map(str, self.qubits)])


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(not 0 <= q < self.n for q in g.qubits):
                raise ValueError(f"{g} out of range for {self.n} qubits")

    @property
    def h(self) -> int:
        return sum(g.kind == "H" for g in self.gates)

    @property
    def is_diagonal(self) -> bool:
        return all(g.kind == "T" for g in self.gates)

    def to_text(self) -> str:
        return "".join(f"{g}\n" for g in self.gates)

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> Circuit:
        gates = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            kind, *args = line.split()
            kind = kind.upper()
            try:
                gates.append(Gate(kind, tuple(int(a) for a in args)))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        if n is None:
            n = 1 + max((q for g in gates for q in g.qubits), default=0)
        return cls(n, gates)


def parse_circuit(path: str | Path, n: int | None = None) -> Circuit:
    return Circuit.from_text(Path(path).read_text(encoding="utf-8"), n)


@dataclass(frozen=True)
class PathSumResult:
    amplitude: ExactAmplitude
    path_count: int  # 2**h: every branch assignment, visited or pruned
    leaves_visited: int


def _config(state: BitString | str, n: int) -> int:
    state = BitString(state) if isinstance(state, str) else state
    if len(state) != n:
        raise ValueError(f"state {state} has {len(state)} bits, circuit has {n} qubits")
    return sum(b << i for i, b in enumerate(state))


def _state(cfg: int, n: int) -> BitString:
    return BitString("".join("1" if cfg >> i & 1 else "0" for i in range(n)))


def _ops(c: Circuit) -> list[tuple[int, int, int]]:
    code = {"CNOT": 0, "T": 1, "H": 2}
    return [(code[g.kind], g.qubits[0], g.qubits[-1]) for g in c.gates]


def _final_constraints(c: Circuit) -> list[list[tuple[int, int]]]:
    """For each gate position, the output qubits already fixed by the current configuration.

    Entry ``g`` lists ``(mask, j)``: just before gate ``g``, final qubit ``j``
    equals the parity of ``cfg & mask`` whatever the later branches do.
    """
    masks: list[int | None] = [1 << j for j in range(c.n)]
    table: list[list[tuple[int, int]]] = [[] for _ in range(len(c.gates) + 1)]
    table[-1] = [(m, j) for j, m in enumerate(masks)]
    for g in range(len(c.gates) - 1, -1, -1):
        gate = c.gates[g]
        if gate.kind == "CNOT":
            ctl, tgt = gate.qubits
            masks = [m ^ (1 << ctl) if m is not None and m >> tgt & 1 else m for m in masks]
        elif gate.kind == "H":
            q = gate.qubits[0]
            masks = [None if m is not None and m >> q & 1 else m for m in masks]
        table[g] = [(m, j) for j, m in enumerate(masks) if m is not None]
    return table


def pathsum_amplitude(
    c: Circuit, in_state: BitString | str, out_state: BitString | str, prune: bool = True
) -> PathSumResult:
    """<out| C |in> as an exact sum over Hadamard branch assignments.

    Depth-first over branches. With ``prune`` a branch is dropped as soon as
    an output qubit that no later Hadamard can influence disagrees with
    ``out_state``; such branches contribute nothing, so the sum is unchanged.
    """
    n = c.n
    start, target = _config(in_state, n), _config(out_state, n)
    ops = _ops(c)
    n_gates = len(ops)
    h_after = [0] * (n_gates + 1)
    for g in range(n_gates - 1, -1, -1):
        h_after[g] = h_after[g + 1] + (ops[g][0] == 2)
    checks = _final_constraints(c) if prune else [[] for _ in range(n_gates + 1)]
    wanted = [[(m, target >> j & 1) for m, j in row] for row in checks]

    def dead(pos: int, cfg: int) -> bool:
        for m, bit in wanted[pos]:
            if (cfg & m).bit_count() & 1 != bit:
                return True
        return False

    counts = [0] * (1 << GRID)
    leaves = 0
    stack = [] if dead(0, start) else [(0, start, 0)]
    while stack:
        g, cfg, ph = stack.pop()
        while g < n_gates:
            kind, a, b = ops[g]
            if kind == 0:
                if cfg >> a & 1:
                    cfg ^= 1 << b
            elif kind == 1:
                ph += _T1 if cfg >> a & 1 else _T0
            else:
                old = cfg >> a & 1
                for nb in (1, 0):
                    ncfg = (cfg & ~(1 << a)) | (nb << a)
                    if not dead(g + 1, ncfg):
                        stack.append((g + 1, ncfg, ph + (_HALF if old and nb else 0)))
                break
            g += 1
        else:
            leaves += 1
            if cfg == target:
                counts[ph & 15] += 1
    amp = ExactAmplitude.from_grid({j: k for j, k in enumerate(counts) if k}, GRID, 0, c.h)
    return PathSumResult(amp, 1 << c.h, leaves)


def pathsum_amplitudes(c: Circuit, in_state: BitString | str) -> dict[BitString, ExactAmplitude]:
    """All nonzero-path outputs at once: every branch assignment evaluated in a vectorised sweep."""
    n = c.n
    paths = np.arange(1 << c.h, dtype=np.int64)
    cfg = np.full(paths.shape, _config(in_state, n), dtype=np.int64)
    ph = np.zeros(paths.shape, dtype=np.int64)
    k = 0
    for kind, a, b in _ops(c):
        if kind == 0:
            cfg ^= ((cfg >> a) & 1) << b
        elif kind == 1:
            ph += np.where((cfg >> a) & 1, _T1, _T0)
        else:
            old = (cfg >> a) & 1
            new = (paths >> k) & 1
            ph += _HALF * (old & new)
            cfg = (cfg & ~(1 << a)) | (new << a)
            k += 1
    bins = np.bincount(cfg * 16 + (ph & 15), minlength=16 << n).reshape(1 << n, 16)
    out = {}
    for idx in np.flatnonzero(bins.any(axis=1)):
        row = bins[idx]
        counts = {j: int(row[j]) for j in range(16) if row[j]}
        out[_state(int(idx), n)] = ExactAmplitude.from_grid(counts, GRID, 0, c.h)
    return out


def statevector_oracle(c: Circuit, in_state: BitString | str) -> np.ndarray:
    """Dense double-precision simulation; vector index = configuration int."""
    n = c.n
    if n > MAX_ORACLE_QUBITS:
        raise ValueError(f"state-vector oracle limited to {MAX_ORACLE_QUBITS} qubits, got {n}")
    dim = 1 << n
    psi = np.zeros(dim, dtype=np.complex128)
    psi[_config(in_state, n)] = 1.0
    idx = np.arange(dim)
    bit = [(idx >> q) & 1 for q in range(n)]
    t_phase = (np.exp(1j * math.pi / 8), np.exp(-1j * math.pi / 8))
    s = 1 / math.sqrt(2)
    for g in c.gates:
        if g.kind == "H":
            q = g.qubits[0]
            lo = idx[bit[q] == 0]
            hi = lo | (1 << q)
            v0, v1 = psi[lo].copy(), psi[hi].copy()
            psi[lo] = s * (v0 + v1)
            psi[hi] = s * (v0 - v1)
        elif g.kind == "T":
            psi *= np.where(bit[g.qubits[0]] == 1, t_phase[1], t_phase[0])
        else:
            ctl, tgt = g.qubits
            lo = idx[(bit[ctl] == 1) & (bit[tgt] == 0)]
            hi = lo | (1 << tgt)
            psi[lo], psi[hi] = psi[hi].copy(), psi[lo].copy()
    return psi


def oracle_amplitude(c: Circuit, in_state: BitString | str, out_state: BitString | str) -> complex:
    return complex(statevector_oracle(c, in_state)[_config(out_state, c.n)])


def phase_oracle_sigma(
    n: int, t: int, dialect: Dialect = Dialect.A, machine: Machine = DEFAULT_MACHINE
) -> ExactAmplitude:
    """<Psi_n| V_t |Psi_n> for the uniform superposition over n input bits.

    ``V_t |b> = e(U_t(b)) |b>`` with ``U_t(b)`` the output read as a binary
    fraction if the machine halts within ``t`` steps having read at most the
    ``n`` bits of ``b``, else 0. Each of the 2**n inputs is run on its own.
    """
    if not 0 <= n <= 20:
        raise ValueError("phase_oracle_sigma supports 0 <= n <= 20")
    phases: dict[BitString, int] = {}
    for value in range(1 << n):
        res = machine.run(BitString.from_int(value, n), t, dialect)
        out = res.output if res.halted else BitString()
        phases[out] = phases.get(out, 0) + 1
    grid = max((len(o) for o in phases), default=0)
    counts: dict[int, int] = {}
    for out, k in phases.items():
        j = out.to_int() << (grid - len(out))
        counts[j] = counts.get(j, 0) + k
    return ExactAmplitude.from_grid(counts, grid, n)


class NonDiagonalCircuitError(ValueError):
    """The real-part construction only accepts diagonal (T-only) circuits."""


@dataclass(frozen=True)
class RealPartConstruction:
    """Ancilla circuit whose return probability is ``(Re <Psi|V|Psi>)**2``.

    ``circuit`` acts on ``n + 1`` qubits (ancilla last). It prepares
    ``|Psi>|+>`` from all-zeros, applies V when the ancilla is 0 and
    conj(V) when it is 1, then undoes the preparation. The probability of
    reading ``outcome`` (all zeros) is exactly ``(Re <Psi|V|Psi>)**2``.
    """

    source: Circuit
    circuit: Circuit
    ancilla: int
    outcome: BitString

    @property
    def recipe(self) -> str:
        return (
            f"prepare |0>^{self.circuit.n}, run the circuit, measure all qubits; "
            f"P({self.outcome.bits}) = (Re <Psi|V|Psi>)^2 with Psi uniform over {self.source.n} qubits"
        )

    def return_amplitude(self) -> ExactAmplitude:
        """Exact <0...0| W |0...0>, which equals Re <Psi|V|Psi>."""
        return pathsum_amplitude(self.circuit, self.outcome, self.outcome).amplitude

    def probability(self) -> float:
        return abs(self.return_amplitude().to_complex()) ** 2

    def probability_oracle(self) -> float:
        return abs(oracle_amplitude(self.circuit, self.outcome, self.outcome)) ** 2


def realpart_construction(c: Circuit) -> RealPartConstruction:
    if not c.is_diagonal:
        raise NonDiagonalCircuitError("real-part construction needs a diagonal (T-only) circuit")
    n = c.n
    anc = n
    prep = [Gate.H(q) for q in range(n + 1)]
    body: list[Gate] = []
    for g in c.gates:
        q = g.qubits[0]
        # T on q when ancilla=0, T-dagger when ancilla=1: phase sign follows q XOR a
        body += [Gate.CNOT(anc, q), Gate.T(q), Gate.CNOT(anc, q)]
    w = Circuit(n + 1, prep + body + prep)
    return RealPartConstruction(c, w, anc, BitString("0" * (n + 1)))


def diagonal_expectation(c: Circuit) -> ExactAmplitude:
    """<Psi|V|Psi> for a diagonal circuit, summed directly over basis states."""
    if not c.is_diagonal:
        raise NonDiagonalCircuitError("expected a T-only circuit")
    counts: dict[int, int] = {}
    for cfg in range(1 << c.n):
        ph = sum(_T1 if cfg >> g.qubits[0] & 1 else _T0 for g in c.gates) & 15
        counts[ph] = counts.get(ph, 0) + 1
    return ExactAmplitude.from_grid(counts, GRID, c.n)


def random_circuit(
    rng: random.Random, n: int, max_gates: int = 40, max_h: int = 16, n_gates: int | None = None
) -> Circuit:
    """Uniformly mixed random circuit with at most ``max_h`` Hadamards."""
    if n_gates is None:
        n_gates = rng.randint(1, max_gates)
    gates: list[Gate] = []
    h = 0
    kinds = ["H", "T", "CNOT"] if n > 1 else ["H", "T"]
    for _ in range(n_gates):
        kind = rng.choice(kinds)
        if kind == "H" and h >= max_h:
            kind = "T"
        if kind == "CNOT":
            ctl, tgt = rng.sample(range(n), 2)
            gates.append(Gate.CNOT(ctl, tgt))
        else:
            gates.append(Gate(kind, (rng.randrange(n),)))
            h += kind == "H"
    return Circuit(n, gates)


def all_states(n: int) -> Iterable[BitString]:
    return (BitString.from_int(v, n) for v in range(1 << n))
