"""Quantum channels in Kraus, Choi and isometric-dilation form.

Conventions: a Kraus operator maps ``in_dim -> out_dim`` and is stored as an
``(out_dim, in_dim)`` array. The Choi operator lives on ``R (x) B`` with the
reference ``R`` (a copy of the input) as the first factor::

    C = sum_ij |i><j|_R (x) N(|i><j|)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from .entropy import NATS, EntropyConfig, InequalityReport, relative_entropy
from .operators import (
    DEFAULT_TOL,
    NotPositiveError,
    Operator,
    Tolerance,
    herm_eigendecompose,
    operator_norm,
    partial_trace_matrix,
    trace_norm,
)
from .sampling import SeedLike, random_kraus
from .states import DensityOperator, make_density

__all__ = [
    "KrausMap",
    "KrausChannel",
    "NotTracePreservingError",
    "ChoiOperator",
    "IsometricDilation",
    "CptpCertificate",
    "apply",
    "apply_map",
    "verify_cptp",
    "choi_of",
    "choi_of_linear_map",
    "kraus_from_choi",
    "dilate",
    "rotate_kraus",
    "adjoint",
    "compose",
    "canonicalize",
    "identity_channel",
    "unitary_channel",
    "environment_channel",
    "random_channel",
    "transpose_map",
    "nonlinear_counterexample",
    "linearity_gap",
    "monotonicity_audit",
    "choi_distance",
]

COMPLETENESS_TOL = 1e-8


class NotTracePreservingError(ValueError):
    def __init__(self, residual: float):
        super().__init__(f"Kraus completeness residual {residual:.3e} exceeds {COMPLETENESS_TOL}")
        self.residual = residual


def _as_stack(kraus_ops, in_dim: int | None, out_dim: int | None) -> np.ndarray:
    ops = [np.asarray(k, dtype=complex) for k in kraus_ops]
    if not ops:
        if in_dim is None or out_dim is None:
            raise ValueError("in_dim and out_dim are required for an empty Kraus list")
        return np.zeros((0, out_dim, in_dim), dtype=complex)
    stack = np.stack(ops)
    if stack.ndim != 3:
        raise ValueError("Kraus operators must be matrices")
    if in_dim is not None and stack.shape[2] != in_dim:
        raise ValueError(f"Kraus operators have input dim {stack.shape[2]}, expected {in_dim}")
    if out_dim is not None and stack.shape[1] != out_dim:
        raise ValueError(f"Kraus operators have output dim {stack.shape[1]}, expected {out_dim}")
    return stack


@dataclass(frozen=True, eq=False, init=False)
class KrausMap:
    """Completely positive map ``X -> sum_l M_l X M_l^dagger`` (not necessarily TP)."""

    kraus: np.ndarray  # (n, out_dim, in_dim)
    in_dim: int
    out_dim: int

    def __init__(self, kraus_ops, in_dim: int | None = None, out_dim: int | None = None):
        stack = _as_stack(kraus_ops, in_dim, out_dim)
        stack.setflags(write=False)
        object.__setattr__(self, "kraus", stack)
        object.__setattr__(self, "in_dim", int(stack.shape[2]))
        object.__setattr__(self, "out_dim", int(stack.shape[1]))

    @property
    def kraus_ops(self) -> list[np.ndarray]:
        return list(self.kraus)

    @property
    def n_kraus(self) -> int:
        return self.kraus.shape[0]

    def completeness(self) -> np.ndarray:
        return np.einsum("kji,kjl->il", self.kraus.conj(), self.kraus)

    def completeness_residual(self) -> float:
        return operator_norm(self.completeness() - np.eye(self.in_dim))

    def __call__(self, x) -> np.ndarray:
        return apply_map(self, x)

    def to_json(self) -> dict[str, Any]:
        return {
            "kraus": [Operator.from_matrix(k).to_json() for k in self.kraus],
            "in_dim": self.in_dim,
            "out_dim": self.out_dim,
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]):
        ops = [np.asarray(Operator.from_json(k)) for k in obj["kraus"]]
        return cls(ops, obj["in_dim"], obj["out_dim"])


class KrausChannel(KrausMap):
    """CPTP map; construction fails unless ``||sum M^dagger M - I|| <= 1e-8``."""

    def __init__(self, kraus_ops, in_dim: int | None = None, out_dim: int | None = None):
        super().__init__(kraus_ops, in_dim, out_dim)
        residual = self.completeness_residual()
        if residual > COMPLETENESS_TOL:
            raise NotTracePreservingError(residual)


@dataclass(frozen=True, eq=False)
class ChoiOperator:
    matrix: Operator  # on R (x) B, dims (in_dim, out_dim)
    in_dim: int
    out_dim: int

    def __array__(self, dtype=None, copy=None):
        return self.matrix.__array__(dtype)

    def min_eigenvalue(self) -> float:
        return float(herm_eigendecompose(self.matrix.entries).eigenvalues[-1])

    def reference_marginal(self) -> np.ndarray:
        return partial_trace_matrix(self.matrix.entries, (self.in_dim, self.out_dim), [0])


@dataclass(frozen=True, eq=False)
class IsometricDilation:
    isometry: Operator  # in_dim -> out_dim (x) env_dim
    env_dim: int

    @property
    def in_dim(self) -> int:
        return self.isometry.col_dims[0]

    @property
    def out_dim(self) -> int:
        return self.isometry.row_dims[0]

    def isometry_residual(self) -> float:
        v = self.isometry.entries
        return operator_norm(v.conj().T @ v - np.eye(v.shape[1]))

    def projector_residual(self) -> float:
        v = self.isometry.entries
        p = v @ v.conj().T
        return operator_norm(p @ p - p)

    def apply(self, x) -> np.ndarray:
        v = self.isometry.entries
        y = v @ np.asarray(x, dtype=complex) @ v.conj().T
        return partial_trace_matrix(y, (self.out_dim, self.env_dim), [0])


@dataclass(frozen=True)
class CptpCertificate:
    completeness_residual: float
    choi_min_eigenvalue: float
    kraus_count: int
    passed: bool

    def to_json(self) -> dict:
        return {
            "completeness_residual": self.completeness_residual,
            "choi_min_eigenvalue": self.choi_min_eigenvalue,
            "kraus_count": self.kraus_count,
            "passed": self.passed,
        }


def apply_map(ch: KrausMap, x) -> np.ndarray:
    """``sum_l M_l X M_l^dagger`` on an arbitrary (not necessarily Hermitian) matrix."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (ch.in_dim, ch.in_dim):
        raise ValueError(f"input has shape {x.shape}, channel expects dim {ch.in_dim}")
    k = ch.kraus
    return np.einsum("kab,bc,kdc->ad", k, x, k.conj())


def apply(ch: KrausMap, rho: DensityOperator, tol: Tolerance = DEFAULT_TOL) -> DensityOperator:
    """Image of a state; the result is re-certified as a density operator."""
    out = apply_map(ch, np.asarray(rho))
    out = (out + out.conj().T) / 2
    return make_density(out, tol)


def choi_of_linear_map(fn: Callable[[np.ndarray], np.ndarray], in_dim: int) -> np.ndarray:
    """Choi matrix of any linear map given as a function on matrices."""
    blocks = []
    for i in range(in_dim):
        row = []
        for j in range(in_dim):
            e = np.zeros((in_dim, in_dim), dtype=complex)
            e[i, j] = 1
            row.append(np.asarray(fn(e), dtype=complex))
        blocks.append(row)
    return np.block(blocks)


def choi_of(ch: KrausMap) -> ChoiOperator:
    # phi_l[(i, b)] = M_l[b, i]
    phis = ch.kraus.transpose(0, 2, 1).reshape(ch.n_kraus, -1)
    c = phis.T @ phis.conj()
    c = (c + c.conj().T) / 2
    return ChoiOperator(Operator(c, (ch.in_dim, ch.out_dim), (ch.in_dim, ch.out_dim)),
                        ch.in_dim, ch.out_dim)


def choi_distance(a: KrausMap, b: KrausMap) -> float:
    return operator_norm(choi_of(a).matrix.entries - choi_of(b).matrix.entries)


def kraus_from_choi(choi: ChoiOperator, tol: Tolerance = DEFAULT_TOL,
                    trace_preserving: bool = True) -> KrausMap:
    """Canonical Kraus set: weighted eigenvectors of the Choi matrix.

    Each eigenvector ``|phi_l>`` on ``R (x) B`` with eigenvalue above the cutoff
    becomes ``M_l |psi> = <psi*|_R |phi_l>``, so there are exactly rank(C)
    operators. Returns a :class:`KrausChannel` when ``trace_preserving``.
    """
    es = herm_eigendecompose(np.asarray(choi), tol)
    w, v = es.eigenvalues, es.eigenvectors
    if w.size and w[-1] < -tol.eigenvalue_cutoff:
        raise NotPositiveError(float(w[-1]), tol.eigenvalue_cutoff)
    keep = w > tol.eigenvalue_cutoff
    phis = v[:, keep] * np.sqrt(w[keep])
    ops = [phi.reshape(choi.in_dim, choi.out_dim).T for phi in phis.T]
    cls = KrausChannel if trace_preserving else KrausMap
    return cls(ops, choi.in_dim, choi.out_dim)


def canonicalize(ch: KrausMap, tol: Tolerance = DEFAULT_TOL) -> KrausMap:
    return kraus_from_choi(choi_of(ch), tol, trace_preserving=isinstance(ch, KrausChannel))


def verify_cptp(ch: KrausMap, tol: Tolerance = DEFAULT_TOL) -> CptpCertificate:
    residual = ch.completeness_residual()
    min_eig = choi_of(ch).min_eigenvalue()
    passed = residual <= COMPLETENESS_TOL and min_eig >= -tol.hermiticity_tol
    return CptpCertificate(residual, min_eig, ch.n_kraus, passed)


def dilate(ch: KrausMap) -> IsometricDilation:
    """``V = sum_j M_j (x) |e_j>`` with the environment as the second output factor."""
    n = ch.n_kraus
    v = ch.kraus.transpose(1, 0, 2).reshape(ch.out_dim * n, ch.in_dim)
    return IsometricDilation(Operator(v, (ch.out_dim, n), (ch.in_dim,)), n)


def rotate_kraus(ch: KrausMap, mixing, atol: float = 1e-9) -> KrausMap:
    """``N_j = sum_i w_ij M_i`` for a unitary ``w`` acting on the Kraus index."""
    w = np.asarray(mixing, dtype=complex)
    n = ch.n_kraus
    if w.shape != (n, n):
        raise ValueError(f"mixing matrix must be {n}x{n}")
    if operator_norm(w.conj().T @ w - np.eye(n)) > atol:
        raise ValueError("mixing matrix is not unitary")
    new = np.einsum("ij,iab->jab", w, ch.kraus)
    return type(ch)(list(new), ch.in_dim, ch.out_dim)


def adjoint(ch: KrausMap) -> KrausMap:
    """Heisenberg-picture map with Kraus operators ``M_l^dagger`` (unital for channels)."""
    return KrausMap(list(ch.kraus.conj().transpose(0, 2, 1)), ch.out_dim, ch.in_dim)


def compose(second: KrausMap, first: KrausMap, tol: Tolerance = DEFAULT_TOL) -> KrausMap:
    """``second o first``; canonicalized through Choi if the product list is too long."""
    if first.out_dim != second.in_dim:
        raise ValueError(f"cannot compose: {first.out_dim} -> {second.in_dim}")
    prods = np.einsum("jab,ibc->jiac", second.kraus, first.kraus).reshape(
        -1, second.out_dim, first.in_dim)
    tp = isinstance(first, KrausChannel) and isinstance(second, KrausChannel)
    cls = KrausChannel if tp else KrausMap
    out = cls(list(prods), first.in_dim, second.out_dim)
    if out.n_kraus > first.in_dim * second.out_dim:
        out = kraus_from_choi(choi_of(out), tol, trace_preserving=tp)
    return out


def identity_channel(d: int) -> KrausChannel:
    return KrausChannel([np.eye(d)], d, d)


def unitary_channel(unitary) -> KrausChannel:
    u = np.asarray(unitary, dtype=complex)
    return KrausChannel([u], u.shape[1], u.shape[0])


def environment_channel(unitary, d_a: int, d_b: int) -> KrausChannel:
    """``rho -> Tr_B[U (rho (x) |0><0|_B) U^dagger]`` with ``M_j = <j|_B U |0>_B``."""
    u = np.asarray(unitary, dtype=complex).reshape(d_a, d_b, d_a, d_b)
    return KrausChannel([u[:, j, :, 0] for j in range(d_b)], d_a, d_a)


def random_channel(d_in: int, d_out: int, n_kraus: int, seed: SeedLike) -> KrausChannel:
    """Channel from the Kraus slices of a Haar-random isometry into out (x) env."""
    return KrausChannel(random_kraus(d_in, d_out, n_kraus, seed), d_in, d_out)


def transpose_map(x) -> np.ndarray:
    """``|i><j| -> |j><i|``: positive but not completely positive, so not a KrausMap."""
    return np.asarray(x).T.copy()


_X = np.array([[0, 1], [1, 0]], dtype=complex)


def nonlinear_counterexample(rho) -> np.ndarray:
    """``exp(i pi X Tr[X rho]) rho exp(-i pi X Tr[X rho])`` on a qubit.

    A state-dependent rotation: trace preserving but not linear.
    """
    r = np.asarray(rho, dtype=complex)
    if r.shape != (2, 2):
        raise ValueError("the map is defined on qubit states only")
    theta = np.pi * np.real(np.trace(_X @ r))
    u = np.cos(theta) * np.eye(2) + 1j * np.sin(theta) * _X
    return u @ r @ u.conj().T


def linearity_gap(fn: Callable[[np.ndarray], np.ndarray], weights: Sequence[float],
                  states: Sequence) -> float:
    """``|| fn(sum p_i rho_i) - sum p_i fn(rho_i) ||_1``; zero for linear maps."""
    mix = sum(p * np.asarray(s) for p, s in zip(weights, states))
    lhs = np.asarray(fn(mix))
    rhs = sum(p * np.asarray(fn(np.asarray(s))) for p, s in zip(weights, states))
    return trace_norm(lhs - rhs)


def monotonicity_audit(ch: KrausMap, rho: DensityOperator, sigma: DensityOperator,
                       cfg: EntropyConfig = NATS, tol: Tolerance = DEFAULT_TOL
                       ) -> InequalityReport:
    """``D(N rho || N sigma) <= D(rho || sigma)``; slack is the recoverability gap."""
    before = relative_entropy(rho, sigma, cfg, tol)
    after = relative_entropy(apply(ch, rho, tol), apply(ch, sigma, tol), cfg, tol)
    return InequalityReport.le("monotonicity", after, before, tol=1e-8, base=cfg.log_base)
