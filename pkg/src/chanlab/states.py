"""Validated density operators and pure states on multipartite spaces."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .operators import (
    DEFAULT_TOL,
    NotSquareError,
    Operator,
    Tolerance,
    herm_eigendecompose,
    partial_trace_matrix,
)
from .sampling import SeedLike, complex_gaussian, rng_from

__all__ = [
    "DensityOperator",
    "PureState",
    "SchmidtDecomposition",
    "DensityViolation",
    "StateValidationError",
    "HermiticityViolation",
    "PositivityViolation",
    "TraceViolation",
    "check_density",
    "make_density",
    "density",
    "tensor",
    "partial_trace",
    "schmidt",
    "max_entangled",
    "purify",
    "random_pure",
    "random_density",
    "basis_state",
]


@dataclass(frozen=True)
class DensityViolation:
    """Which density-operator axiom failed and by how much."""

    axiom: str  # "hermiticity" | "positivity" | "trace"
    amount: float


class StateValidationError(ValueError):
    def __init__(self, violation: DensityViolation):
        super().__init__(f"{violation.axiom} violated by {violation.amount:.3e}")
        self.violation = violation


class HermiticityViolation(StateValidationError):
    pass


class PositivityViolation(StateValidationError):
    pass


class TraceViolation(StateValidationError):
    pass


_ERRORS = {
    "hermiticity": HermiticityViolation,
    "positivity": PositivityViolation,
    "trace": TraceViolation,
}


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """A certified state. Build it through :func:`make_density`."""

    op: Operator
    validated: bool = field(default=False)

    def __array__(self, dtype=None, copy=None):
        return self.op.__array__(dtype)

    @property
    def matrix(self) -> np.ndarray:
        return self.op.entries

    @property
    def dims(self) -> tuple[int, ...]:
        return self.op.row_dims

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    def eigenvalues(self, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
        return herm_eigendecompose(self.matrix, tol).eigenvalues

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def to_json(self) -> dict:
        return {"kind": "density", **self.op.to_json()}


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray
    factor_dims: tuple[int, ...]

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(int(d) for d in self.factor_dims)
        if prod(dims) != amps.size:
            raise ValueError(f"factor dims {dims} do not match {amps.size} amplitudes")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "factor_dims", dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def density(self, tol: Tolerance = DEFAULT_TOL) -> DensityOperator:
        psi = self.amplitudes
        return make_density(Operator.from_matrix(np.outer(psi, psi.conj()), self.factor_dims), tol)

    def to_json(self) -> dict:
        return {
            "kind": "pure",
            "re": self.amplitudes.real.tolist(),
            "im": self.amplitudes.imag.tolist(),
            "row_dims": list(self.factor_dims),
            "col_dims": [1],
        }


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    coefficients: np.ndarray
    left_vectors: np.ndarray  # columns on factor A
    right_vectors: np.ndarray  # columns on factor B

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,ak,bk->ab", self.coefficients, self.left_vectors,
                         self.right_vectors).reshape(-1)


def check_density(op, tol: Tolerance = DEFAULT_TOL) -> DensityViolation | None:
    """Return the first failed axiom (hermiticity, positivity, trace), else None."""
    m = np.asarray(op, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquareError(f"expected a square matrix, got shape {m.shape}")
    dev = float(np.linalg.norm(m - m.conj().T, 2))
    if dev > tol.hermiticity_tol:
        return DensityViolation("hermiticity", dev)
    w = herm_eigendecompose(m, tol).eigenvalues
    if w[-1] < -tol.eigenvalue_cutoff:
        return DensityViolation("positivity", float(-w[-1]))
    tr = float(np.real(np.trace(m)))
    if abs(tr - 1) > tol.trace_tol:
        return DensityViolation("trace", abs(tr - 1))
    return None


def make_density(op, tol: Tolerance = DEFAULT_TOL, dims: Sequence[int] | None = None
                 ) -> DensityOperator:
    """Certify ``op`` as a density operator or raise the matching violation."""
    if not isinstance(op, Operator):
        op = Operator.from_matrix(op, dims)
    elif dims is not None:
        op = Operator(op.entries, tuple(dims), tuple(dims))
    if not op.is_square:
        raise NotSquareError(f"expected a square matrix, got shape {op.shape}")
    violation = check_density(op, tol)
    if violation is not None:
        raise _ERRORS[violation.axiom](violation)
    m = op.entries
    op = Operator((m + m.conj().T) / 2, op.row_dims, op.col_dims)
    return DensityOperator(op, validated=True)


def density(m, dims: Sequence[int] | None = None) -> DensityOperator:
    """Shorthand for ``make_density`` with default tolerances."""
    return make_density(m, dims=dims)


def basis_state(index: int | Sequence[int], dims: Sequence[int]) -> PureState:
    dims = tuple(dims)
    if isinstance(index, Iterable):
        index = int(np.ravel_multi_index(tuple(index), dims))
    amps = np.zeros(prod(dims), dtype=complex)
    amps[index] = 1
    return PureState(amps, dims)


def tensor(*states: DensityOperator) -> DensityOperator:
    m = np.ones((1, 1), dtype=complex)
    dims: tuple[int, ...] = ()
    for s in states:
        m = np.kron(m, s.matrix)
        dims += s.dims
    return DensityOperator(Operator(m, dims, dims), validated=True)


def partial_trace(rho: DensityOperator, keep: Iterable[int]) -> DensityOperator:
    """Reduced state on the factors listed in ``keep`` (ascending order)."""
    keep = sorted(set(keep))
    m = partial_trace_matrix(rho.matrix, rho.dims, keep)
    dims = tuple(rho.dims[k] for k in keep)
    m = (m + m.conj().T) / 2
    return DensityOperator(Operator(m, dims, dims), validated=True)


def _bipartite_matrix(psi: PureState, cut: Sequence[int]) -> tuple[np.ndarray, tuple, tuple]:
    n = len(psi.factor_dims)
    left = sorted(set(cut))
    if not left or left[0] < 0 or left[-1] >= n or len(left) == n:
        raise ValueError(f"cut {cut} is not a proper bipartition of {n} factors")
    right = [k for k in range(n) if k not in left]
    t = psi.amplitudes.reshape(psi.factor_dims).transpose(left + right)
    da = prod(psi.factor_dims[k] for k in left)
    return t.reshape(da, -1), tuple(left), tuple(right)


def schmidt(psi: PureState, cut: Sequence[int] = (0,), tol: Tolerance = DEFAULT_TOL
            ) -> SchmidtDecomposition:
    """Schmidt decomposition across ``cut`` (factors of A) versus the rest.

    Reconstruction via :meth:`SchmidtDecomposition.reconstruct` is in the
    permuted order ``cut + rest``, which is the original order for the usual
    ``cut=(0, ..., k-1)``.
    """
    if len(psi.factor_dims) < 2:
        raise ValueError("Schmidt decomposition needs at least two factors")
    c, _, _ = _bipartite_matrix(psi, cut)
    u, s, vh = np.linalg.svd(c, full_matrices=False)
    # Schmidt coefficients squared are eigenvalues, so the cutoff applies to s**2
    keep = s**2 > tol.eigenvalue_cutoff
    return SchmidtDecomposition(s[keep], u[:, keep], vh[keep].T)


def max_entangled(d: int, normalize: bool = False) -> PureState:
    """``sum_i |i>|i>``, optionally scaled by ``1/sqrt(d)``."""
    if d < 1:
        raise ValueError("d must be at least 1")
    amps = np.eye(d, dtype=complex).reshape(-1)
    if normalize:
        amps = amps / np.sqrt(d)
    return PureState(amps, (d, d))


def purify(rho: DensityOperator, tol: Tolerance = DEFAULT_TOL) -> PureState:
    """Purification on ``dim (x) rank`` with the ancilla as the last factor."""
    es = herm_eigendecompose(rho.matrix, tol)
    supp = es.eigenvalues > tol.eigenvalue_cutoff
    p = es.eigenvalues[supp]
    v = es.eigenvectors[:, supp]
    amps = (v * np.sqrt(p)).reshape(-1)
    return PureState(amps / np.linalg.norm(amps), (rho.dim, int(supp.sum())))


def random_pure(factor_dims: Sequence[int] | int, seed: SeedLike) -> PureState:
    """Unitarily invariant random pure state (normalized complex Gaussian)."""
    if isinstance(factor_dims, int):
        factor_dims = (factor_dims,)
    dims = tuple(factor_dims)
    z = complex_gaussian(rng_from(seed), prod(dims))
    return PureState(z / np.linalg.norm(z), dims)


def random_density(dim: int | Sequence[int], rank: int, seed: SeedLike) -> DensityOperator:
    """Partial trace of a random pure state on ``dim (x) rank``.

    ``dim`` may be a tuple of factor dimensions; the result is tagged with it.
    """
    dims = (dim,) if isinstance(dim, int) else tuple(dim)
    d = prod(dims)
    if rank < 1 or rank > d:
        raise ValueError(f"rank must be in [1, {d}], got {rank}")
    psi = random_pure((d, rank), seed)
    c = psi.amplitudes.reshape(d, rank)
    m = c @ c.conj().T
    m = (m + m.conj().T) / 2
    return DensityOperator(Operator(m, dims, dims), validated=True)
