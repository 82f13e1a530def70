"""A self-delimiting two-counter bytecode machine.

Opcodes (dialect A), read MSB-first from the tape of consumed input bits::

    00              OUT0   append 0 to the output
    01              OUT1   append 1 to the output
    100 r           INC r
    101 r           DEC r  (saturates at 0)
    110 r dddd      JNZ r  if counter r != 0: ip <- max(origin, start - (d + 1))
    1110            XLATE  switch to dialect B; origin <- next instruction
    1111            HALT

Dialect B is dialect A with the meanings of ``00`` and ``01`` exchanged.
``origin`` starts at 0; XLATE moves it so a translated program cannot
jump back into the code that translated it.

The code is complete and prefix-free, and the machine only ever reads bits
at or before the end of what it has consumed, so the set of halting
programs (consumed prefixes at HALT) is prefix-free.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from .bitcore import BitString, PhaseFraction, bits_to_dyadic, is_proper_prefix

__all__ = [
    "Dialect",
    "Op",
    "Instruction",
    "Outcome",
    "ExecResult",
    "Machine",
    "DEFAULT_MACHINE",
    "decode_instruction",
    "run",
    "trace",
    "check_prefix_free",
]


class Dialect(str, enum.Enum):
    A = "A"
    B = "B"


class Op(str, enum.Enum):
    OUT0 = "OUT0"
    OUT1 = "OUT1"
    INC = "INC"
    DEC = "DEC"
    JNZ = "JNZ"
    XLATE = "XLATE"
    HALT = "HALT"


@dataclass(frozen=True)
class Instruction:
    op: Op
    width: int
    reg: int | None = None
    offset: int | None = None

    def __str__(self) -> str:
        if self.op is Op.JNZ:
            return f"JNZ r{self.reg} {self.offset}"
        if self.reg is not None:
            return f"{self.op.value} r{self.reg}"
        return self.op.value


class Outcome(str, enum.Enum):
    HALTED = "Halted"
    OUT_OF_GAS = "OutOfGas"


@dataclass(frozen=True)
class ExecResult:
    """Outcome of one budgeted run.

    ``program`` is set only for halted runs. ``consumed`` is the input read
    either way. ``starved`` marks an out-of-gas result caused by the bit
    source running dry rather than by the budget.
    """

    kind: Outcome
    program: BitString | None
    output: BitString
    phase: PhaseFraction
    steps_used: int
    consumed: BitString = BitString()
    starved: bool = False

    @property
    def halted(self) -> bool:
        return self.kind is Outcome.HALTED


BitSource = Union[BitString, str, Iterable[int]]

# status codes of the engine
HALT, GAS, NEED = 0, 1, 2


class MachineState:
    """Mutable execution state. Owned by exactly one execution at a time."""

    __slots__ = ("tape", "ip", "r0", "r1", "out", "steps", "dialect", "origin", "looping")

    def __init__(self) -> None:
        self.tape = bytearray()
        self.ip = 0
        self.r0 = 0
        self.r1 = 0
        self.out = bytearray()
        self.steps = 0
        self.dialect = 0  # 0 = A, 1 = B
        self.origin = 0
        self.looping = False

    def fork(self, bit: int) -> MachineState:
        """Copy of this state with ``bit`` appended to the tape."""
        st = MachineState.__new__(MachineState)
        st.tape = self.tape + bytes((bit,))
        st.ip = self.ip
        st.r0 = self.r0
        st.r1 = self.r1
        st.out = bytearray(self.out)
        st.steps = self.steps
        st.dialect = self.dialect
        st.origin = self.origin
        st.looping = False
        return st


class Machine:
    """The machine definition: which output bit each OUT opcode emits per dialect.

    ``out_table[dialect] = (bit emitted by 00, bit emitted by 01)``. Swapping
    in a different table is how tests build deliberately broken variants.
    """

    def __init__(self, out_table: Mapping[Dialect, Sequence[int]] | None = None) -> None:
        if out_table is None:
            out_table = {Dialect.A: (0, 1), Dialect.B: (1, 0)}
        self.out_table = {Dialect(k): (int(v[0]), int(v[1])) for k, v in out_table.items()}
        self._outmap = (self.out_table[Dialect.A], self.out_table[Dialect.B])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Machine) and self.out_table == other.out_table

    def __hash__(self) -> int:
        return hash(self.fingerprint)

    def __repr__(self) -> str:
        return f"Machine({self.fingerprint[:12]})"

    @property
    def fingerprint(self) -> str:
        """Content hash of the opcode table, stored in cache files."""
        desc = {
            "semantics": "upsum-2counter-v1",
            "opcodes": {
                "00": "OUT", "01": "OUT", "100r": "INC", "101r": "DEC",
                "110rdddd": "JNZ max(origin,S-(d+1))", "1110": "XLATE->B origin", "1111": "HALT",
            },
            "out": {d.value: list(v) for d, v in sorted(self.out_table.items())},
        }
        return hashlib.sha256(json.dumps(desc, sort_keys=True).encode()).hexdigest()

    # -- reference semantics (slow, used for tracing and cross-checks) --

    def decode(self, tape: BitString | str | Sequence[int], ip: int, dialect: Dialect) -> Instruction | None:
        """Decode the instruction starting at bit ``ip``; ``None`` if the tape ends mid-opcode."""
        bits = _bit_list(tape)
        n = len(bits)

        def need(k: int) -> bool:
            return ip + k > n

        if need(2):
            return None
        if bits[ip] == 0:
            emitted = self.out_table[Dialect(dialect)][bits[ip + 1]]
            return Instruction(Op.OUT1 if emitted else Op.OUT0, 2)
        if bits[ip + 1] == 0:
            if need(4):
                return None
            return Instruction(Op.DEC if bits[ip + 2] else Op.INC, 4, reg=bits[ip + 3])
        if need(3):
            return None
        if bits[ip + 2] == 0:
            if need(8):
                return None
            d = bits[ip + 4] << 3 | bits[ip + 5] << 2 | bits[ip + 6] << 1 | bits[ip + 7]
            return Instruction(Op.JNZ, 8, reg=bits[ip + 3], offset=d)
        if need(4):
            return None
        return Instruction(Op.HALT if bits[ip + 3] else Op.XLATE, 4)

    def steps(self, source: BitSource, budget: int, dialect: Dialect = Dialect.A) -> Iterator[tuple]:
        """Execute one instruction at a time, yielding a trace row after each.

        Rows are ``(step, ip, instruction, r0, r1, out, tape)`` with ``ip``
        the address the instruction started at and the rest taken after it ran.
        Straightforward and slow; ``run`` is the fast path.
        """
        bits_in = _bit_iter(source)
        tape: list[int] = []
        ip = origin = 0
        regs = [0, 0]
        out: list[int] = []
        dialect = Dialect(dialect)
        for step in range(1, budget + 1):
            while (ins := self.decode(tape, ip, dialect)) is None:
                bit = next(bits_in, None)
                if bit is None:
                    return
                tape.append(bit)
            start = ip
            ip += ins.width
            if ins.op is Op.OUT0:
                out.append(0)
            elif ins.op is Op.OUT1:
                out.append(1)
            elif ins.op is Op.INC:
                regs[ins.reg] += 1
            elif ins.op is Op.DEC:
                regs[ins.reg] = max(0, regs[ins.reg] - 1)
            elif ins.op is Op.JNZ:
                if regs[ins.reg]:
                    ip = max(origin, start - (ins.offset + 1))
            elif ins.op is Op.XLATE:
                dialect = Dialect.B
                origin = ip
            yield step, start, ins, regs[0], regs[1], BitString.from_bits(out), BitString.from_bits(tape)
            if ins.op is Op.HALT:
                return

    # -- fast engine --

    def advance(self, st: MachineState, budget: int, detect_cycles: bool = True) -> int:
        """Run ``st`` until HALT, budget exhaustion, or the tape runs out.

        Returns ``HALT``, ``GAS`` or ``NEED``. On ``NEED`` the state is left
        at the start of the undecodable instruction, ready to be forked with
        one more bit. With ``detect_cycles`` a run that provably never halts
        and never reads new input skips ahead by whole periods, so the final
        state (output included) is exactly what plain simulation reaches.
        The proof: two visits to the same jump target with the same
        dialect/origin, counters not smaller, and no zero-test seen on any
        counter that grew in between, means the same stretch repeats forever.
        """
        tape = st.tape
        n = len(tape)
        ip, r0, r1, steps = st.ip, st.r0, st.r1, st.steps
        dia, origin, out = st.dialect, st.origin, st.out
        outmap = self._outmap[dia]
        seen: dict | None = {} if detect_cycles else None
        zero0 = zero1 = -1  # last step index at which a counter was observed at 0
        status = GAS
        while steps < budget:
            if ip + 2 > n:
                status = NEED
                break
            b1 = tape[ip + 1]
            if tape[ip] == 0:
                out.append(outmap[b1])
                ip += 2
                steps += 1
                continue
            if b1 == 0:
                if ip + 4 > n:
                    status = NEED
                    break
                if tape[ip + 2] == 0:
                    if tape[ip + 3]:
                        r1 += 1
                    else:
                        r0 += 1
                elif tape[ip + 3]:
                    if r1:
                        r1 -= 1
                    else:
                        zero1 = steps
                elif r0:
                    r0 -= 1
                else:
                    zero0 = steps
                ip += 4
                steps += 1
                continue
            if ip + 3 > n:
                status = NEED
                break
            if tape[ip + 2] == 0:
                if ip + 8 > n:
                    status = NEED
                    break
                reg = tape[ip + 3]
                val = r1 if reg else r0
                if not val:
                    if reg:
                        zero1 = steps
                    else:
                        zero0 = steps
                    ip += 8
                    steps += 1
                    continue
                d = tape[ip + 4] << 3 | tape[ip + 5] << 2 | tape[ip + 6] << 1 | tape[ip + 7]
                ip = ip - d - 1
                if ip < origin:
                    ip = origin
                steps += 1
                if seen is not None:
                    key = (ip, dia, origin)
                    prev = seen.get(key)
                    if (
                        prev is not None
                        and r0 >= prev[1]
                        and r1 >= prev[2]
                        and (r0 == prev[1] or zero0 < prev[0])
                        and (r1 == prev[2] or zero1 < prev[0])
                    ):
                        # fast-forward whole repetitions, simulate the tail
                        st.looping = True
                        period = steps - prev[0]
                        reps = (budget - steps) // period
                        out += out[prev[3]:] * reps
                        r0 += (r0 - prev[1]) * reps
                        r1 += (r1 - prev[2]) * reps
                        steps += period * reps
                        seen = None
                        continue
                    seen[key] = (steps, r0, r1, len(out))
                continue
            if ip + 4 > n:
                status = NEED
                break
            steps += 1
            if tape[ip + 3]:
                ip += 4
                status = HALT
                break
            ip += 4
            dia = 1
            origin = ip
            outmap = self._outmap[1]
            if seen is not None:
                seen.clear()
        st.ip, st.r0, st.r1, st.steps = ip, r0, r1, steps
        st.dialect, st.origin = dia, origin
        return status

    def start(self, dialect: Dialect = Dialect.A) -> MachineState:
        st = MachineState()
        st.dialect = 0 if Dialect(dialect) is Dialect.A else 1
        return st

    def run(
        self,
        source: BitSource,
        budget: int,
        dialect: Dialect = Dialect.A,
        detect_cycles: bool = True,
    ) -> ExecResult:
        """Run on bits drawn lazily from ``source`` for at most ``budget`` steps."""
        if budget < 1:
            raise ValueError("budget must be at least 1")
        bits_in = _bit_iter(source)
        st = self.start(dialect)
        while True:
            status = self.advance(st, budget, detect_cycles)
            if status == NEED:
                bit = next(bits_in, None)
                if bit is None:
                    return _result(st, GAS, starved=True)
                st.tape.append(bit)
                continue
            return _result(st, status)


def to_bitstring(raw: bytes | bytearray) -> BitString:
    return BitString(raw.translate(_TO_CHARS).decode())


def _result(st: MachineState, status: int, starved: bool = False) -> ExecResult:
    output = to_bitstring(st.out)
    consumed = to_bitstring(st.tape)
    phase = PhaseFraction(bits_to_dyadic(output))
    if status == HALT:
        return ExecResult(Outcome.HALTED, consumed, output, phase, st.steps, consumed)
    return ExecResult(Outcome.OUT_OF_GAS, None, output, phase, st.steps, consumed, starved)


_TO_CHARS = bytes.maketrans(b"\x00\x01", b"01")


def _bit_list(tape) -> list[int]:
    if isinstance(tape, BitString):
        return list(tape)
    if isinstance(tape, str):
        return list(BitString(tape))
    return list(tape)


def _bit_iter(source: BitSource) -> Iterator[int]:
    if isinstance(source, str):
        source = BitString(source)
    return iter(source)


DEFAULT_MACHINE = Machine()


def decode_instruction(tape: BitString | str, ip: int, dialect: Dialect = Dialect.A) -> Instruction | None:
    return DEFAULT_MACHINE.decode(tape, ip, dialect)


def run(source: BitSource, budget: int, dialect: Dialect = Dialect.A, detect_cycles: bool = True) -> ExecResult:
    return DEFAULT_MACHINE.run(source, budget, dialect, detect_cycles)


def trace(
    source: BitSource,
    budget: int,
    dialect: Dialect = Dialect.A,
    machine: Machine = DEFAULT_MACHINE,
    emit: Callable[[str], None] | None = None,
) -> list[str]:
    """Debug trace, one line per step: ``step ip opcode r0 r1 out``."""
    lines = []
    for step, ip, ins, r0, r1, out, _ in machine.steps(source, budget, dialect):
        line = f"{step} {ip} {str(ins).replace(' ', ':')} {r0} {r1} {out.bits or '-'}"
        lines.append(line)
        if emit is not None:
            emit(line)
    return lines


def check_prefix_free(halting_set: Iterable[BitString | str]) -> bool:
    """True iff no element is a proper prefix of another."""
    progs = sorted(BitString(p) if isinstance(p, str) else p for p in halting_set)
    # in sorted order any prefix relation shows up between neighbours
    for a, b in zip(progs, progs[1:]):
        if is_proper_prefix(a, b):
            return False
    return True
