"""Dense complex-matrix substrate shared by every other module.

Everything here works on plain numpy arrays; :class:`Operator` adds the
ordered tensor-factor bookkeeping that partial traces and JSON reports need.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import prod
from typing import Any, Sequence

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Operator",
    "HermitianEigensystem",
    "NotSquareError",
    "NotHermitianError",
    "NotPositiveError",
    "herm_eigendecompose",
    "matrix_function_on_support",
    "support_rotation",
    "support_projector",
    "trace_norm",
    "operator_norm",
    "fidelity",
    "partial_trace_matrix",
    "fix_phase",
]


class NotSquareError(ValueError):
    pass


class NotHermitianError(ValueError):
    def __init__(self, deviation: float, tol: float):
        super().__init__(f"matrix deviates from Hermitian by {deviation:.3e} (tol {tol:.1e})")
        self.deviation = deviation


class NotPositiveError(ValueError):
    def __init__(self, min_eigenvalue: float, cutoff: float):
        super().__init__(
            f"minimum eigenvalue {min_eigenvalue:.3e} is below -{cutoff:.1e}"
        )
        self.min_eigenvalue = min_eigenvalue


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds used across the package.

    ``eigenvalue_cutoff`` defines the support of a PSD operator: eigenvalues at
    or below it are treated as exact zeros by every pseudo-function.
    """

    eigenvalue_cutoff: float = 1e-10
    hermiticity_tol: float = 1e-9
    trace_tol: float = 1e-9

    def __post_init__(self):
        for name in ("eigenvalue_cutoff", "hermiticity_tol", "trace_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_TOL = Tolerance()


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix tagged with tensor-factor dimensions.

    ``row_dims`` describes the output space and ``col_dims`` the input space,
    so a ket is an ``Operator`` with ``col_dims == (1,)``.
    """

    entries: np.ndarray
    row_dims: tuple[int, ...]
    col_dims: tuple[int, ...]

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.ndim != 2:
            raise ValueError(f"operator entries must be 2-d, got shape {entries.shape}")
        row_dims = tuple(int(d) for d in self.row_dims)
        col_dims = tuple(int(d) for d in self.col_dims)
        if not row_dims or not col_dims or min(row_dims + col_dims) < 1:
            raise ValueError("factor dimension lists must be non-empty and positive")
        if prod(row_dims) != entries.shape[0] or prod(col_dims) != entries.shape[1]:
            raise ValueError(
                f"dims {row_dims}x{col_dims} do not match matrix shape {entries.shape}"
            )
        object.__setattr__(self, "entries", _frozen(entries))
        object.__setattr__(self, "row_dims", row_dims)
        object.__setattr__(self, "col_dims", col_dims)

    @classmethod
    def from_matrix(cls, m, row_dims: Sequence[int] | None = None,
                    col_dims: Sequence[int] | None = None) -> "Operator":
        m = np.asarray(m, dtype=complex)
        if m.ndim == 1:
            m = m.reshape(-1, 1)
        row_dims = tuple(row_dims) if row_dims is not None else (m.shape[0],)
        if col_dims is None:
            col_dims = row_dims if m.shape[0] == m.shape[1] else (m.shape[1],)
        return cls(m, tuple(row_dims), tuple(col_dims))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return np.array(self.entries)
        return np.array(self.entries, dtype=dtype)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def is_square(self) -> bool:
        return self.entries.shape[0] == self.entries.shape[1]

    @property
    def dag(self) -> "Operator":
        return Operator(self.entries.conj().T, self.col_dims, self.row_dims)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.entries @ other.entries, self.row_dims, other.col_dims)
        return self.entries @ np.asarray(other)

    def allclose(self, other, atol: float = 1e-9) -> bool:
        return np.allclose(self.entries, np.asarray(other), atol=atol, rtol=0)

    def to_json(self) -> dict[str, Any]:
        return {
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
            "row_dims": list(self.row_dims),
            "col_dims": list(self.col_dims),
        }

    @classmethod
    def from_json(cls, obj: dict[str, Any]) -> "Operator":
        m = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
        if m.ndim == 1:
            m = m.reshape(-1, 1)
        return cls(m, tuple(obj["row_dims"]), tuple(obj["col_dims"]))


@dataclass(frozen=True, eq=False)
class HermitianEigensystem:
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # columns
    source_dim: int

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def _square(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSquareError(f"expected a square matrix, got shape {m.shape}")
    return m


def fix_phase(vectors: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real positive."""
    vectors = np.array(vectors, dtype=complex, copy=True)
    for k in range(vectors.shape[1]):
        col = vectors[:, k]
        big = np.flatnonzero(np.abs(col) > atol)
        if big.size:
            c = col[big[0]]
            vectors[:, k] = col * (abs(c) / c)
    return vectors


def herm_eigendecompose(m, tol: Tolerance = DEFAULT_TOL) -> HermitianEigensystem:
    """Spectral decomposition of a Hermitian matrix.

    The input is symmetrized as ``(M + M^dagger)/2`` first; deviations up to
    ``tol.hermiticity_tol`` (operator norm) are tolerated, anything larger is
    rejected. Eigenvalues come back in descending order and eigenvectors carry
    the package-wide phase convention (see :func:`fix_phase`).
    """
    m = _square(m)
    dev = np.linalg.norm(m - m.conj().T, 2) if m.size else 0.0
    if dev > tol.hermiticity_tol:
        raise NotHermitianError(dev, tol.hermiticity_tol)
    if dev > 0:
        log.debug("symmetrizing input with hermiticity deviation %.3e", dev)
    h = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(h)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    return HermitianEigensystem(w, fix_phase(v), m.shape[0])


def _spectrum_on_support(m, tol: Tolerance):
    es = herm_eigendecompose(m, tol)
    w = es.eigenvalues
    if w.size and w[-1] < -tol.eigenvalue_cutoff:
        raise NotPositiveError(float(w[-1]), tol.eigenvalue_cutoff)
    return w, es.eigenvectors, w > tol.eigenvalue_cutoff


def _wrap_like(m, result: np.ndarray) -> Operator:
    if isinstance(m, Operator):
        return Operator(result, m.row_dims, m.col_dims)
    return Operator.from_matrix(result)


def matrix_function_on_support(m, func: str, p: float | None = None,
                               tol: Tolerance = DEFAULT_TOL) -> Operator:
    """Apply ``log``, ``sqrt`` or ``power`` (with exponent ``p``) to a PSD matrix.

    The function acts on eigenvalues strictly above the cutoff; the kernel is
    mapped to zero, so ``power`` with negative ``p`` is a pseudo-inverse power.
    """
    w, v, supp = _spectrum_on_support(m, tol)
    f = np.zeros(w.shape, dtype=complex)
    ws = w[supp]
    if func == "log":
        f[supp] = np.log(ws)
    elif func == "sqrt":
        f[supp] = np.sqrt(ws)
    elif func == "power":
        if p is None:
            raise ValueError("power requires an exponent p")
        f[supp] = np.exp(p * np.log(ws))
    else:
        raise ValueError(f"unknown function tag {func!r}")
    return _wrap_like(m, (v * f) @ v.conj().T)


def support_rotation(m, s: float, tol: Tolerance = DEFAULT_TOL) -> Operator:
    """``M^{i s}`` on the support of a PSD matrix, identity on its kernel."""
    w, v, supp = _spectrum_on_support(m, tol)
    phases = np.ones(w.shape, dtype=complex)
    phases[supp] = np.exp(1j * s * np.log(w[supp]))
    return _wrap_like(m, (v * phases) @ v.conj().T)


def support_projector(m, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    w, v, supp = _spectrum_on_support(m, tol)
    vs = v[:, supp]
    return vs @ vs.conj().T


def trace_norm(m) -> float:
    """Sum of singular values, i.e. ``Tr sqrt(M^dagger M)``."""
    m = _square(m)
    return float(np.linalg.svd(m, compute_uv=False).sum())


def operator_norm(m) -> float:
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def fidelity(rho, sigma, tol: Tolerance = DEFAULT_TOL) -> float:
    """Root fidelity ``|| rho^{1/2} sigma^{1/2} ||_1``."""
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    a = np.asarray(matrix_function_on_support(rho, "sqrt", tol=tol))
    b = np.asarray(matrix_function_on_support(sigma, "sqrt", tol=tol))
    return trace_norm(a @ b)


def partial_trace_matrix(m, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep`` (kept in ascending order).

    Works for arbitrary (non-Hermitian) square matrices whose row and column
    spaces share the factor structure ``dims``.
    """
    m = _square(m)
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one factor")
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexError(f"factor index out of range for {n} factors")
    if prod(dims) != m.shape[0]:
        raise ValueError(f"dims {dims} do not match matrix size {m.shape[0]}")
    t = m.reshape(dims + dims)
    # einsum labels: row axes 0..n-1, column axes n..2n-1; traced pairs share a label
    row = list(range(n))
    col = [n + k if k in keep else k for k in range(n)]
    out = keep + [n + k for k in keep]
    r = np.einsum(t, row + col, out)
    dk = prod(dims[k] for k in keep)
    return r.reshape(dk, dk)
