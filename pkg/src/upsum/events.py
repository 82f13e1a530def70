"""Coarse-grained events over two-part programs.

A two-part program ``p = p0 p1`` is a header ``p0`` followed by ``k`` path
bits ``p1 = w``. The machine's output on ``p0 w``, read as a binary fraction
of a turn, is the action of path ``w``; each path carries weight
``2**-(|p0| + k)``. Events are sets of paths, their amplitudes are sums of
path amplitudes, and probabilities are only meaningful for families of
events that (nearly) obey the probability sum rule.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bitcore import BitString, DyadicRational, PhaseFraction, bits_to_dyadic
from .machine import DEFAULT_MACHINE, Dialect, Machine
from .pathsum import ExactAmplitude

__all__ = [
    "PathEnsemble",
    "CoarseGrain",
    "ConsistencyVerdict",
    "ProbabilityReport",
    "EnsembleError",
    "OverlapError",
    "PartitionError",
    "ZeroAmplitudeError",
    "grain_amplitude",
    "grain_union_amplitude",
    "decoherence",
    "consistency",
    "probabilities",
    "SUM_RULE_TOL",
]

SUM_RULE_TOL = 1e-12


class EnsembleError(ValueError):
    """Some path of a machine-backed ensemble does not halt on exactly ``p0 w``."""


class OverlapError(ValueError):
    """Events that were required to be mutually exclusive share a path."""


class PartitionError(ValueError):
    pass


class ZeroAmplitudeError(ZeroDivisionError):
    """The consistency ratio divides by |A|^2 and is undefined for a zero amplitude."""


@dataclass(frozen=True)
class PathEnsemble:
    """Paths ``{0,1}**k`` behind a header, with one machine output per path.

    Build with ``from_machine`` (runs and validates every path) or
    ``from_outputs`` (outputs given directly, e.g. for ensembles larger than
    any header this machine can realise).
    """

    header: BitString
    k: int
    outputs: tuple[BitString, ...]
    steps: tuple[int, ...] | None = None
    dialect: Dialect | None = None
    max_steps: int | None = None

    def __post_init__(self) -> None:
        if len(self.outputs) != 1 << self.k:
            raise EnsembleError(f"expected {1 << self.k} path outputs, got {len(self.outputs)}")

    @classmethod
    def from_machine(
        cls,
        header: BitString | str,
        k: int,
        max_steps: int,
        dialect: Dialect = Dialect.A,
        machine: Machine = DEFAULT_MACHINE,
    ) -> PathEnsemble:
        header = BitString(header) if isinstance(header, str) else header
        outputs, steps = [], []
        for w in range(1 << k):
            program = header + BitString.from_int(w, k)
            res = machine.run(program, max_steps, dialect)
            if not res.halted:
                raise EnsembleError(f"path {program.bits[len(header):] or '-'}: {program} did not halt within {max_steps} steps")
            if res.program != program:
                raise EnsembleError(f"path {program.bits[len(header):]}: halted after reading only {res.program}")
            outputs.append(res.output)
            steps.append(res.steps_used)
        return cls(header, k, tuple(outputs), tuple(steps), Dialect(dialect), max_steps)

    @classmethod
    def from_outputs(cls, header: BitString | str, outputs: Sequence[BitString | str]) -> PathEnsemble:
        header = BitString(header) if isinstance(header, str) else header
        k = max(len(outputs) - 1, 0).bit_length()
        return cls(header, k, tuple(BitString(o) if isinstance(o, str) else o for o in outputs))

    @property
    def weight_exponent(self) -> int:
        """Each path weighs ``2**-weight_exponent``."""
        return len(self.header) + self.k

    def action(self, w: int | BitString | str) -> PhaseFraction:
        return PhaseFraction(bits_to_dyadic(self.outputs[_path_index(w, self.k)]))

    def path_amplitude(self, w: int | BitString | str) -> ExactAmplitude:
        return ExactAmplitude.unit(self.action(w), _weight(self.weight_exponent))

    def full(self) -> CoarseGrain:
        return CoarseGrain.full(self.k)


def _weight(exponent: int) -> DyadicRational:
    return DyadicRational(1, exponent)


def _path_index(w: int | BitString | str, k: int) -> int:
    if isinstance(w, int):
        return w
    w = BitString(w) if isinstance(w, str) else w
    if len(w) != k:
        raise ValueError(f"path {w} is not {k} bits")
    return w.to_int()


@dataclass(frozen=True)
class CoarseGrain:
    """A set of paths of one ensemble, stored as path indices (``w`` read MSB-first)."""

    k: int
    members: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(self.members))
        if any(not 0 <= m < 1 << self.k for m in self.members):
            raise ValueError(f"grain members out of range for k={self.k}")

    @classmethod
    def full(cls, k: int) -> CoarseGrain:
        return cls(k, frozenset(range(1 << k)))

    @classmethod
    def empty(cls, k: int) -> CoarseGrain:
        return cls(k)

    @classmethod
    def from_pattern(cls, pattern: str) -> CoarseGrain:
        """Fixed-bit mask such as ``0**1``: ``*`` matches either bit."""
        k = len(pattern)
        if pattern.strip("01*"):
            raise ValueError(f"bad grain pattern {pattern!r}")
        members = [
            w for w in range(1 << k)
            if all(c == "*" or int(c) == (w >> (k - 1 - i) & 1) for i, c in enumerate(pattern))
        ]
        return cls(k, frozenset(members))

    @classmethod
    def from_paths(cls, k: int, paths: Iterable[BitString | str]) -> CoarseGrain:
        return cls(k, frozenset(_path_index(p, k) for p in paths))

    @classmethod
    def parse(cls, spec: str, k: int) -> CoarseGrain:
        """CLI syntax: a pattern (``0**1``), a comma-separated path list, or ``-`` for empty."""
        spec = spec.strip()
        if spec in ("", "-"):
            return cls.empty(k)
        if "," in spec:
            return cls.from_paths(k, [p.strip() for p in spec.split(",")])
        grain = cls.from_pattern(spec)
        if grain.k != k:
            raise ValueError(f"grain {spec!r} has {grain.k} bits, ensemble has k={k}")
        return grain

    def __contains__(self, w: int | BitString | str) -> bool:
        return _path_index(w, self.k) in self.members

    def __len__(self) -> int:
        return len(self.members)

    def complement(self) -> CoarseGrain:
        return CoarseGrain(self.k, frozenset(range(1 << self.k)) - self.members)

    def disjoint(self, other: CoarseGrain) -> bool:
        return not self.members & other.members

    def union(self, other: CoarseGrain) -> CoarseGrain:
        if self.k != other.k:
            raise ValueError("grains over different path spaces")
        if not self.disjoint(other):
            raise OverlapError("grains overlap; their union is not an OR of exclusive events")
        return CoarseGrain(self.k, self.members | other.members)

    def paths(self) -> list[BitString]:
        return [BitString.from_int(w, self.k) for w in sorted(self.members)]

    def __str__(self) -> str:
        return "{" + ",".join(p.bits for p in self.paths()) + "}"


def _check(e: PathEnsemble, g: CoarseGrain) -> None:
    if g.k != e.k:
        raise ValueError(f"grain over k={g.k} paths used with an ensemble of k={e.k}")


def grain_amplitude(e: PathEnsemble, g: CoarseGrain) -> ExactAmplitude:
    """Sum of ``2**-(|p0|+k) e(S(w))`` over the paths of ``g``."""
    _check(e, g)
    if not g.members:
        return ExactAmplitude()
    outs = [e.outputs[w] for w in g.members]
    grid = max(len(o) for o in outs)
    counts: dict[int, int] = {}
    for o in outs:
        j = o.to_int() << (grid - len(o))
        counts[j] = counts.get(j, 0) + 1
    return ExactAmplitude.from_grid(counts, grid, e.weight_exponent)


def grain_union_amplitude(e: PathEnsemble, g1: CoarseGrain, g2: CoarseGrain) -> ExactAmplitude:
    """Amplitude of ``g1 OR g2`` for exclusive grains: the sum of the two amplitudes."""
    _check(e, g1)
    _check(e, g2)
    if not g1.disjoint(g2):
        raise OverlapError(f"grains {g1} and {g2} share paths")
    return grain_amplitude(e, g1) + grain_amplitude(e, g2)


def interference_term(a1: ExactAmplitude, a2: ExactAmplitude) -> ExactAmplitude:
    """``Re(a1 conj(a2))`` kept exact."""
    return (a1 * a2.conj()).real_part()


def decoherence(a1: ExactAmplitude, a2: ExactAmplitude) -> float:
    """``Re(a1 conj(a2))``; exactly 0.0 when the product cancels on the phase grid."""
    exact = interference_term(a1, a2)
    if exact.is_zero():
        return 0.0
    return exact.to_complex().real


@dataclass(frozen=True)
class ConsistencyVerdict:
    d: float
    ratio: float
    epsilon: float
    consistent: bool
    exact_zero: bool = False

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "ratio": self.ratio,
            "epsilon": self.epsilon,
            "consistent": self.consistent,
            "exact_zero": self.exact_zero,
        }


def consistency(a1: ExactAmplitude, a2: ExactAmplitude, epsilon: float) -> ConsistencyVerdict:
    """``(Re a1 conj a2)**2 / (|a1|**2 |a2|**2) <= epsilon``."""
    if a1.is_zero() or a2.is_zero():
        raise ZeroAmplitudeError("consistency ratio undefined for a zero amplitude")
    exact = interference_term(a1, a2)
    exact_zero = exact.is_zero()
    d = 0.0 if exact_zero else exact.to_complex().real
    n1 = abs(a1.to_complex()) ** 2
    n2 = abs(a2.to_complex()) ** 2
    ratio = 0.0 if exact_zero else d * d / (n1 * n2)
    return ConsistencyVerdict(d, ratio, epsilon, ratio <= epsilon, exact_zero)


@dataclass(frozen=True)
class ProbabilityReport:
    grains: tuple[CoarseGrain, ...]
    amplitudes: tuple[ExactAmplitude, ...]
    unnormalized: tuple[float, ...]
    normalized: tuple[float, ...]
    verdicts: dict[tuple[int, int], ConsistencyVerdict | None]
    residual: float  # |A(union)|^2 - sum |A_i|^2
    epsilon: float

    @property
    def consistent(self) -> bool:
        return all(v is None or v.consistent for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "grains": [
                {
                    "paths": [p.bits for p in g.paths()],
                    "amplitude": a.to_dict(),
                    "unnormalized": u,
                    "probability": p,
                }
                for g, a, u, p in zip(self.grains, self.amplitudes, self.unnormalized, self.normalized)
            ],
            "pairs": [
                {"i": i, "j": j, "verdict": None if v is None else v.to_dict()}
                for (i, j), v in sorted(self.verdicts.items())
            ],
            "sum_rule_residual": self.residual,
            "epsilon": self.epsilon,
            "consistent": self.consistent,
        }


def probabilities(e: PathEnsemble, partition: Sequence[CoarseGrain], epsilon: float) -> ProbabilityReport:
    """Probabilities for an exhaustive family of exclusive grains.

    Unnormalised values are ``|A|**2``; normalised ones divide by their total
    over the partition. Pairs involving a zero amplitude get no verdict.
    """
    covered: set[int] = set()
    for g in partition:
        _check(e, g)
        if covered & g.members:
            raise PartitionError("partition grains overlap")
        covered |= g.members
    if covered != set(range(1 << e.k)):
        raise PartitionError(f"partition covers {len(covered)} of {1 << e.k} paths")
    amps = tuple(grain_amplitude(e, g) for g in partition)
    unnorm = tuple(abs(a.to_complex()) ** 2 for a in amps)
    total = math.fsum(unnorm)
    norm = tuple(u / total if total else 0.0 for u in unnorm)
    verdicts: dict[tuple[int, int], ConsistencyVerdict | None] = {}
    for i, j in itertools.combinations(range(len(amps)), 2):
        if amps[i].is_zero() or amps[j].is_zero():
            verdicts[(i, j)] = None
        else:
            verdicts[(i, j)] = consistency(amps[i], amps[j], epsilon)
    union = ExactAmplitude()
    for a in amps:
        union = union + a
    residual = abs(union.to_complex()) ** 2 - total
    return ProbabilityReport(tuple(partition), amps, unnorm, norm, verdicts, residual, epsilon)
