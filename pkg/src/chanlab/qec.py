"""Statevector simulation of the 3-qubit repetition code and the 9-qubit Shor code.

Qubit 1 is the most significant bit of a basis index, so ``|100>`` is index 4.
A :class:`PauliString` stores ``i^delta * prod_j X_j^{x_j} Z_j^{z_j}``; ``Y = iXZ``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .sampling import SeedLike, rng_from

__all__ = [
    "StateVector",
    "PauliString",
    "Syndrome",
    "StabilizerCode",
    "UncorrectableError",
    "NotEigenstateError",
    "CircuitSyndrome",
    "RoundtripReport",
    "three_qubit_code",
    "shor_code",
    "encode",
    "apply_pauli",
    "measure_syndrome_direct",
    "decode",
    "roundtrip",
    "circuit_syndrome",
    "single_qubit_errors",
    "sweep",
]

NORM_TOL = 1e-9
EIGEN_TOL = 1e-6


class UncorrectableError(ValueError):
    def __init__(self, syndrome: "Syndrome"):
        super().__init__(f"uncorrectable syndrome {syndrome.bits}")
        self.syndrome = syndrome


class NotEigenstateError(ValueError):
    def __init__(self, generator: "PauliString", expectation: float):
        super().__init__(f"state is not an eigenstate of {generator.label()}: <g> = {expectation:.6f}")
        self.generator = generator
        self.expectation = expectation


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2**self.n_qubits:
            raise ValueError(f"{amps.size} amplitudes for {self.n_qubits} qubits")
        if abs(np.linalg.norm(amps) - 1) > NORM_TOL:
            raise ValueError(f"state norm {np.linalg.norm(amps):.12f} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, bits: str) -> "StateVector":
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int(bits, 2)] = 1
        return cls(amps, len(bits))

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "StateVector") -> float:
        """``|<self|other>|^2``; insensitive to global phase."""
        return abs(self.overlap(other)) ** 2


_TOKEN = re.compile(r"([IXYZ])(\d+)")


@dataclass(frozen=True)
class PauliString:
    n: int
    x: tuple[int, ...]
    z: tuple[int, ...]
    phase: int = 0  # exponent of i, mod 4

    def __post_init__(self):
        if len(self.x) != self.n or len(self.z) != self.n:
            raise ValueError("bit vectors must have length n")
        object.__setattr__(self, "x", tuple(int(b) & 1 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) & 1 for b in self.z))
        object.__setattr__(self, "phase", self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, (0,) * n, (0,) * n)

    @classmethod
    def parse(cls, label: str, n: int) -> "PauliString":
        """Parse ``"X1X2"``, ``"Z5"``, ``"-Y3"``, ``"iZ1"`` or ``"I"`` (qubits 1-based).

        A dense string of ``n`` letters such as ``"XIZ"`` is accepted as well.
        """
        s = label.strip().replace(" ", "")
        phase = 0
        if s.startswith("-"):
            phase, s = 2, s[1:]
        elif s.startswith("+"):
            s = s[1:]
        if s.startswith("i"):
            phase, s = phase + 1, s[1:]
        if len(s) == n and n > 1 and set(s) <= set("IXYZ"):
            s = "".join(f"{op}{q}" for q, op in enumerate(s, 1) if op != "I")
        x, z = [0] * n, [0] * n
        if s in ("", "I"):
            return cls(n, tuple(x), tuple(z), phase)
        pos = 0
        for m in _TOKEN.finditer(s):
            if m.start() != pos:
                break
            pos = m.end()
            op, q = m.group(1), int(m.group(2))
            if not 1 <= q <= n:
                raise ValueError(f"qubit {q} out of range 1..{n} in {label!r}")
            if x[q - 1] or z[q - 1]:
                raise ValueError(f"qubit {q} repeated in {label!r}")
            if op in "XY":
                x[q - 1] = 1
            if op in "ZY":
                z[q - 1] = 1
            if op == "Y":
                phase += 1
        if pos != len(s):
            raise ValueError(f"cannot parse Pauli label {label!r}")
        return cls(n, tuple(x), tuple(z), phase)

    def label(self) -> str:
        parts = []
        ys = 0
        for j, (xb, zb) in enumerate(zip(self.x, self.z), start=1):
            if xb and zb:
                parts.append(f"Y{j}")
                ys += 1
            elif xb:
                parts.append(f"X{j}")
            elif zb:
                parts.append(f"Z{j}")
        prefix = {0: "", 1: "i", 2: "-", 3: "-i"}[(self.phase - ys) % 4]
        return prefix + ("".join(parts) or "I")

    @property
    def weight(self) -> int:
        return sum(a | b for a, b in zip(self.x, self.z))

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == sum(a & b for a, b in zip(self.x, self.z)) % 2

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("qubit counts differ")
        # Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1
        swap = sum(a & b for a, b in zip(self.z, other.x))
        return PauliString(
            self.n,
            tuple(a ^ b for a, b in zip(self.x, other.x)),
            tuple(a ^ b for a, b in zip(self.z, other.z)),
            self.phase + other.phase + 2 * swap,
        )

    def commutes_with(self, other: "PauliString") -> bool:
        sym = sum(a & b for a, b in zip(self.x, other.z)) + sum(a & b for a, b in zip(self.z, other.x))
        return sym % 2 == 0

    def _masks(self) -> tuple[int, int]:
        xm = sum(1 << (self.n - 1 - j) for j, b in enumerate(self.x) if b)
        zm = sum(1 << (self.n - 1 - j) for j, b in enumerate(self.z) if b)
        return xm, zm

    def matrix(self) -> np.ndarray:
        dim = 2**self.n
        out = np.zeros((dim, dim), dtype=complex)
        xm, zm = self._masks()
        coeff = 1j**self.phase
        for b in range(dim):
            out[b ^ xm, b] = coeff * (-1) ** bin(b & zm).count("1")
        return out


@dataclass(frozen=True)
class Syndrome:
    bits: tuple[int, ...]  # +1 / -1, one per generator

    def __post_init__(self):
        if any(b not in (1, -1) for b in self.bits):
            raise ValueError("syndrome entries must be +1 or -1")

    def as_binary(self) -> str:
        return "".join("1" if b == -1 else "0" for b in self.bits)


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    name: str
    n: int
    codewords: tuple[StateVector, StateVector]
    stabilizer_generators: tuple[PauliString, ...]
    logical_x: PauliString
    logical_z: PauliString
    decode_table: Mapping[tuple[int, ...], PauliString] = field(repr=False)

    def invariant_report(self) -> dict[str, bool]:
        gens = self.stabilizer_generators
        fixes = all(
            np.max(np.abs(apply_pauli(c, g).amplitudes - c.amplitudes)) <= 1e-12
            for g in gens for c in self.codewords
        )
        commute = all(a.commutes_with(b) for a in gens for b in gens)
        logicals = (not self.logical_x.commutes_with(self.logical_z)
                    and all(self.logical_x.commutes_with(g) and self.logical_z.commutes_with(g)
                            for g in gens))
        trivial = self.decode_table.get((1,) * len(gens)) == PauliString.identity(self.n)
        return {"generators_fix_codewords": fixes, "generators_commute": commute,
                "logicals_valid": logicals, "identity_decodes_trivial": trivial}


def _pauli(label: str, n: int) -> PauliString:
    return PauliString.parse(label, n)


def _table(n: int, gens: Sequence[PauliString], corrections: Sequence[PauliString]
           ) -> dict[tuple[int, ...], PauliString]:
    table: dict[tuple[int, ...], PauliString] = {}
    for c in corrections:
        key = tuple(1 if c.commutes_with(g) else -1 for g in gens)
        if key in table:
            raise AssertionError(f"{c.label()} collides with {table[key].label()}")
        table[key] = c
    return table


def three_qubit_code() -> StabilizerCode:
    n = 3
    zero = np.zeros(8, dtype=complex)
    zero[[0b000, 0b111]] = 1 / np.sqrt(2)
    one = np.zeros(8, dtype=complex)
    one[0b000], one[0b111] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    gens = (_pauli("Z1Z2", n), _pauli("Z2Z3", n))
    corrections = [PauliString.identity(n)] + [_pauli(f"X{i}", n) for i in (1, 2, 3)]
    return StabilizerCode(
        "three-qubit", n, (StateVector(zero, n), StateVector(one, n)), gens,
        logical_x=_pauli("Z1", n), logical_z=_pauli("X1X2X3", n),
        decode_table=_table(n, gens, corrections),
    )


def shor_code() -> StabilizerCode:
    n = 9
    plus = np.zeros(8, dtype=complex)
    plus[[0, 7]] = 1 / np.sqrt(2)
    minus = plus.copy()
    minus[7] *= -1
    zero = np.kron(np.kron(plus, plus), plus)
    one = np.kron(np.kron(minus, minus), minus)
    z_pairs = ["Z1Z2", "Z2Z3", "Z4Z5", "Z5Z6", "Z7Z8", "Z8Z9"]
    gens = tuple(_pauli(s, n) for s in z_pairs) + (
        _pauli("X1X2X3X4X5X6", n), _pauli("X4X5X6X7X8X9", n))
    # one correction per single-qubit error class; Z errors by block representative
    reps = [1, 4, 7]
    corrections = [PauliString.identity(n)]
    corrections += [_pauli(f"X{i}", n) for i in range(1, 10)]
    corrections += [_pauli(f"Z{r}", n) for r in reps]
    corrections += [_pauli(f"X{i}", n) * _pauli(f"Z{reps[(i - 1) // 3]}", n)
                    for i in range(1, 10)]
    return StabilizerCode(
        "shor", n, (StateVector(zero, n), StateVector(one, n)), gens,
        logical_x=_pauli("Z1Z4Z7", n), logical_z=_pauli("X1X2X3", n),
        decode_table=_table(n, gens, corrections),
    )


def encode(code: StabilizerCode, alpha: complex, beta: complex) -> StateVector:
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1) > NORM_TOL:
        raise ValueError("logical amplitudes must satisfy |alpha|^2 + |beta|^2 = 1")
    zero, one = code.codewords
    return StateVector(alpha * zero.amplitudes + beta * one.amplitudes, code.n)


def apply_pauli(state: StateVector, p: PauliString) -> StateVector:
    if state.n_qubits != p.n:
        raise ValueError(f"{p.n}-qubit Pauli on a {state.n_qubits}-qubit state")
    xm, zm = p._masks()
    idx = np.arange(2**p.n)
    signs = 1 - 2 * (np.array([bin(b).count("1") for b in idx & zm]) % 2)
    out = np.empty_like(state.amplitudes)
    out[idx ^ xm] = (1j**p.phase) * signs * state.amplitudes
    return StateVector(out, p.n)


def _expectation(state: StateVector, g: PauliString) -> float:
    return float(np.real(state.overlap(apply_pauli(state, g))))


def measure_syndrome_direct(code: StabilizerCode, state: StateVector) -> Syndrome:
    bits = []
    for g in code.stabilizer_generators:
        e = _expectation(state, g)
        if abs(e) < 1 - EIGEN_TOL:
            raise NotEigenstateError(g, e)
        bits.append(1 if e > 0 else -1)
    return Syndrome(tuple(bits))


def decode(code: StabilizerCode, syndrome: Syndrome) -> PauliString:
    if len(syndrome.bits) != len(code.stabilizer_generators):
        raise ValueError("syndrome length does not match the generator count")
    try:
        return code.decode_table[syndrome.bits]
    except KeyError:
        raise UncorrectableError(syndrome) from None


@dataclass(frozen=True)
class RoundtripReport:
    error: str
    syndrome: Syndrome
    correction: str
    fidelity: float
    recovered: bool

    def to_json(self) -> dict:
        return {"error": self.error, "syndrome": list(self.syndrome.bits),
                "correction": self.correction, "fidelity": self.fidelity,
                "recovered": self.recovered}


def roundtrip(code: StabilizerCode, logical: tuple[complex, complex],
              error: PauliString | str) -> RoundtripReport:
    """Encode, corrupt, read the syndrome, correct, and compare with the input."""
    if isinstance(error, str):
        error = PauliString.parse(error, code.n)
    if error.weight > 1:
        raise ValueError("roundtrip takes the identity or a single-qubit Pauli")
    psi = encode(code, *logical)
    corrupted = apply_pauli(psi, error)
    syn = measure_syndrome_direct(code, corrupted)
    corr = decode(code, syn)
    out = apply_pauli(corrupted, corr)
    f = psi.fidelity(out)
    return RoundtripReport(error.label(), syn, corr.label(), f, f >= 1 - NORM_TOL)


def single_qubit_errors(n: int) -> list[PauliString]:
    return [PauliString.parse(f"{p}{i}", n) for i in range(1, n + 1) for p in "XYZ"]


def sweep(code: StabilizerCode, logical: tuple[complex, complex]) -> list[RoundtripReport]:
    return [roundtrip(code, logical, e) for e in single_qubit_errors(code.n)]


@dataclass(frozen=True, eq=False)
class CircuitSyndrome:
    """Ancilla readout of one generator.

    ``bit`` is the ancilla outcome (0 for eigenvalue +1, 1 for -1) and is
    ``None`` when the outcome is random and no sampling seed was given.
    """

    generator: str
    probabilities: tuple[float, float]
    deterministic: bool
    bit: int | None
    post_state: StateVector | None

    @property
    def eigenvalue(self) -> int | None:
        return None if self.bit is None else 1 - 2 * self.bit


_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def _hadamard(t: np.ndarray, q: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(_H, t, axes=([1], [q])), 0, q)


def _cnot(t: np.ndarray, control: int, target: int) -> np.ndarray:
    t = t.copy()
    sl = [slice(None)] * t.ndim
    sl[control] = 1
    sub = t[tuple(sl)]
    tgt = target - (1 if target > control else 0)
    t[tuple(sl)] = np.flip(sub, axis=tgt)
    return t


def circuit_syndrome(code: StabilizerCode, state: StateVector, index: int,
                     seed: SeedLike | None = None) -> CircuitSyndrome:
    """Measure generator ``index`` with an ancilla appended as the last qubit.

    Z-type generators: CNOT from each supported data qubit onto the ancilla.
    X-type generators: the same, conjugated by Hadamards on the data qubits.
    """
    g = code.stabilizer_generators[index]
    if g.n != state.n_qubits:
        raise ValueError("state and code sizes differ")
    support = [j for j in range(g.n) if g.x[j] or g.z[j]]
    x_type = all(g.x[j] and not g.z[j] for j in support)
    z_type = all(g.z[j] and not g.x[j] for j in support)
    if not (x_type or z_type) or g.phase % 2:
        raise ValueError(f"circuit extraction needs a pure X- or Z-type Hermitian generator, got {g.label()}")
    n = g.n
    t = np.zeros((2,) * (n + 1), dtype=complex)
    t[..., 0] = state.amplitudes.reshape((2,) * n)
    if x_type:
        for q in support:
            t = _hadamard(t, q)
    for q in support:
        t = _cnot(t, q, n)
    if x_type:
        for q in support:
            t = _hadamard(t, q)
    branches = [t[..., 0].reshape(-1), t[..., 1].reshape(-1)]
    if g.phase == 2:  # -g flips the outcome labels
        branches.reverse()
    probs = tuple(float(np.vdot(b, b).real) for b in branches)
    deterministic = max(probs) >= 1 - NORM_TOL
    if deterministic:
        bit = int(np.argmax(probs))
    elif seed is not None:
        bit = int(rng_from(seed).random() < probs[1])
    else:
        return CircuitSyndrome(g.label(), probs, False, None, None)
    post = branches[bit] / np.sqrt(probs[bit])
    return CircuitSyndrome(g.label(), probs, deterministic, bit, StateVector(post, n))

