"""Reversing channels: the Petz map and the rotated (universal) recovery channel.

The Petz map of a channel ``N`` with reference state ``sigma`` is::

    P(X) = sigma^{1/2} N^dagger[ N(sigma)^{-1/2} X N(sigma)^{-1/2} ] sigma^{1/2}

and the universal recovery channel averages rotated Petz maps::

    R(X) = int dt beta0(t) sigma^{-it/2} P[ N(sigma)^{it/2} X N(sigma)^{-it/2} ] sigma^{it/2}
    beta0(t) = (pi/2) / (cosh(pi t) + 1)

Inverse and imaginary powers act on supports only; on the kernel of
``N(sigma)`` the rotations are the identity and the Petz map is completed by
sending that kernel to ``sigma`` so the result is trace preserving everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .channels import (
    KrausChannel,
    KrausMap,
    adjoint,
    apply,
    apply_map,
    choi_of,
    kraus_from_choi,
)
from .entropy import NATS, EntropyConfig, SupportError, relative_entropy
from .operators import (
    DEFAULT_TOL,
    Tolerance,
    fidelity,
    herm_eigendecompose,
    matrix_function_on_support,
    trace_norm,
)
from .sampling import SeedLike, complex_gaussian, rng_from
from .states import DensityOperator, make_density, random_pure

__all__ = [
    "beta0",
    "QuadratureGrid",
    "make_grid",
    "PetzMap",
    "petz_map",
    "recoverability_gap",
    "UniversalRecovery",
    "universal_recovery",
    "RecoveryReport",
    "recovery_report",
    "ErasureExample",
    "erasure_example",
    "GridMassError",
]

MATERIALIZE_MAX_DIM = 8
GRID_MASS_TOL = 1e-6


def beta0(t):
    return (np.pi / 2) / (np.cosh(np.pi * np.asarray(t, dtype=float)) + 1)


class GridMassError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    nodes: np.ndarray
    weights: np.ndarray
    half_width: float

    def mass(self) -> float:
        """``sum w_k beta0(t_k)``, which should approximate ``int beta0 = 1``."""
        return float(np.sum(self.weights * beta0(self.nodes)))

    def tail_mass(self) -> float:
        """Analytic weight of ``beta0`` outside ``[-h, h]`` for half-width ``h``: ``1 - tanh(pi h / 2)``."""
        return float(1 - np.tanh(np.pi * self.half_width / 2))

    @property
    def size(self) -> int:
        return len(self.nodes)

    def coefficients(self) -> np.ndarray:
        return self.weights * beta0(self.nodes)

    def refined(self, factor: int = 2) -> "QuadratureGrid":
        n_panels, ppp = self._layout
        return make_grid(n_panels * factor, ppp, self.half_width)

    _layout: tuple[int, int] = field(default=(129, 1), repr=False)

    def to_json(self) -> dict:
        return {"nodes": self.size, "half_width": self.half_width}


def make_grid(n_panels: int = 129, points_per_panel: int = 1,
              half_width: float = 12.0) -> QuadratureGrid:
    """Composite Gauss-Legendre rule on ``[-half_width, half_width]`` with equal panels.

    The default (129 one-point panels, i.e. the composite midpoint rule) is
    spectrally accurate for ``beta0`` and its oscillatory modulations; at
    half-width 12 the truncated tail is below 1e-16.
    """
    x, w = np.polynomial.legendre.leggauss(points_per_panel)
    edges = np.linspace(-half_width, half_width, n_panels + 1)
    half = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).reshape(-1)
    weights = (half[:, None] * w[None, :]).reshape(-1)
    return QuadratureGrid(nodes, weights, float(half_width), (n_panels, points_per_panel))


def _eig_support(m, tol: Tolerance):
    es = herm_eigendecompose(m, tol)
    w, v = es.eigenvalues, es.eigenvectors
    supp = w > tol.eigenvalue_cutoff
    logw = np.zeros_like(w)
    logw[supp] = np.log(w[supp])
    return w, v, supp, logw


def _rotation(v: np.ndarray, logw: np.ndarray, supp: np.ndarray, s: float) -> np.ndarray:
    """``M^{i s}`` from a cached spectral decomposition, identity on the kernel."""
    ph = np.where(supp, np.exp(1j * s * logw), 1.0)
    return (v * ph) @ v.conj().T


@dataclass(frozen=True, eq=False)
class PetzMap:
    sigma: DensityOperator
    forward: KrausMap
    sqrt_sigma: np.ndarray
    out_reference: np.ndarray  # N(sigma)
    inv_sqrt_out: np.ndarray  # N(sigma)^{-1/2} on its support
    channel: KrausChannel
    tol: Tolerance = DEFAULT_TOL

    def check_support(self, x) -> None:
        """Raise :class:`SupportError` if ``x`` leaks outside ``supp N(sigma)``."""
        es = herm_eigendecompose(self.out_reference, self.tol)
        x = np.asarray(x)
        for a in np.flatnonzero(es.eigenvalues <= self.tol.eigenvalue_cutoff):
            v = es.eigenvectors[:, a]
            weight = float(np.real(v.conj() @ x @ v))
            if weight > self.tol.eigenvalue_cutoff:
                raise SupportError(int(a), weight)

    def apply_matrix(self, x) -> np.ndarray:
        return apply_map(self.channel, x)

    def __call__(self, rho: DensityOperator) -> DensityOperator:
        self.check_support(rho)
        return apply(self.channel, rho, self.tol)


def petz_map(sigma: DensityOperator, ch: KrausMap, tol: Tolerance = DEFAULT_TOL) -> PetzMap:
    """Petz recovery map as a Kraus channel from ``ch.out_dim`` back to ``ch.in_dim``.

    Kraus operators are ``sigma^{1/2} M_l^dagger N(sigma)^{-1/2}``; when
    ``N(sigma)`` is rank deficient, extra operators ``sqrt(s_j)|s_j><k|`` send
    each kernel vector ``|k>`` to ``sigma``, leaving admissible inputs untouched.
    """
    s = np.asarray(sigma)
    if s.shape != (ch.in_dim, ch.in_dim):
        raise ValueError(f"sigma has shape {s.shape}, channel input dim is {ch.in_dim}")
    n_sigma = apply_map(ch, s)
    n_sigma = (n_sigma + n_sigma.conj().T) / 2
    sqrt_sigma = np.asarray(matrix_function_on_support(s, "sqrt", tol=tol))
    inv_sqrt = np.asarray(matrix_function_on_support(n_sigma, "power", p=-0.5, tol=tol))
    ops = [sqrt_sigma @ m.conj().T @ inv_sqrt for m in ch.kraus]

    w_out, v_out, supp_out, _ = _eig_support(n_sigma, tol)
    kernel = v_out[:, ~supp_out]
    if kernel.shape[1]:
        w_s, v_s, supp_s, _ = _eig_support(s, tol)
        for j in np.flatnonzero(supp_s):
            for k in range(kernel.shape[1]):
                ops.append(np.sqrt(w_s[j]) * np.outer(v_s[:, j], kernel[:, k].conj()))
    channel = KrausChannel(ops, ch.out_dim, ch.in_dim)
    if channel.n_kraus > ch.in_dim * ch.out_dim:
        channel = kraus_from_choi(choi_of(channel), tol)
    return PetzMap(sigma, ch, sqrt_sigma, n_sigma, inv_sqrt, channel, tol)


def recoverability_gap(ch: KrausMap, rho: DensityOperator, sigma: DensityOperator,
                       cfg: EntropyConfig = NATS, tol: Tolerance = DEFAULT_TOL) -> float:
    """``D(rho||sigma) - D(N(rho)||N(sigma))``; non-negative by monotonicity."""
    before = relative_entropy(rho, sigma, cfg, tol)
    after = relative_entropy(apply(ch, rho, tol), apply(ch, sigma, tol), cfg, tol)
    return before - after


@dataclass(frozen=True, eq=False)
class UniversalRecovery:
    petz: PetzMap
    grid: QuadratureGrid

    @property
    def in_dim(self) -> int:
        return self.petz.forward.out_dim

    @property
    def out_dim(self) -> int:
        return self.petz.forward.in_dim

    @cached_property
    def _spectra(self):
        tol = self.petz.tol
        _, v_s, supp_s, log_s = _eig_support(np.asarray(self.petz.sigma), tol)
        _, v_n, supp_n, log_n = _eig_support(self.petz.out_reference, tol)
        return (v_s, supp_s, log_s), (v_n, supp_n, log_n)

    def _rotations(self, t: float):
        (v_s, supp_s, log_s), (v_n, supp_n, log_n) = self._spectra
        # sigma^{-it/2} and N(sigma)^{it/2}
        return _rotation(v_s, log_s, supp_s, -t / 2), _rotation(v_n, log_n, supp_n, t / 2)

    def apply_matrix(self, x) -> np.ndarray:
        """Grid sum of rotated Petz maps applied to ``x`` (any square matrix)."""
        x = np.asarray(x, dtype=complex)
        out = np.zeros((self.out_dim, self.out_dim), dtype=complex)
        for t, c in zip(self.grid.nodes, self.grid.coefficients()):
            us, un = self._rotations(t)
            out += c * (us @ self.petz.apply_matrix(un @ x @ un.conj().T) @ us.conj().T)
        return out

    def adjoint_matrix(self, y) -> np.ndarray:
        """Heisenberg-picture action ``R^dagger(Y)`` by the same grid sum."""
        y = np.asarray(y, dtype=complex)
        petz_adj = adjoint(self.petz.channel)
        out = np.zeros((self.in_dim, self.in_dim), dtype=complex)
        for t, c in zip(self.grid.nodes, self.grid.coefficients()):
            us, un = self._rotations(t)
            out += c * (un.conj().T @ apply_map(petz_adj, us.conj().T @ y @ us) @ un)
        return out

    @property
    def materializable(self) -> bool:
        return max(self.in_dim, self.out_dim) <= MATERIALIZE_MAX_DIM

    @cached_property
    def channel(self) -> KrausChannel:
        """Explicit canonical Kraus form (only for dims up to 8)."""
        if not self.materializable:
            raise ValueError("recovery map too large to materialize; use apply_matrix")
        ops = []
        for t, c in zip(self.grid.nodes, self.grid.coefficients()):
            us, un = self._rotations(t)
            ops.extend(np.sqrt(c) * (us @ k @ un) for k in self.petz.channel.kraus)
        raw = KrausMap(ops, self.in_dim, self.out_dim)
        # trace preserving up to the grid mass error, which the constructor bounds
        return kraus_from_choi(choi_of(raw), self.petz.tol)

    def __call__(self, rho: DensityOperator) -> DensityOperator:
        self.petz.check_support(rho)
        if self.materializable:
            return apply(self.channel, rho, self.petz.tol)
        return make_density(self.apply_matrix(rho), self.petz.tol)

    def adjoint_map(self) -> KrausMap:
        return adjoint(self.channel)


def universal_recovery(sigma: DensityOperator, ch: KrausMap,
                       grid: QuadratureGrid | None = None,
                       tol: Tolerance = DEFAULT_TOL) -> UniversalRecovery:
    grid = grid if grid is not None else make_grid()
    deficit = abs(grid.mass() - 1)
    if deficit > GRID_MASS_TOL:
        raise GridMassError(f"grid integrates beta0 to {grid.mass():.9f} (deficit {deficit:.2e})")
    return UniversalRecovery(petz_map(sigma, ch, tol), grid)


@dataclass(frozen=True)
class RecoveryReport:
    gap: float
    recovery_fidelity: float
    bound_slack: float  # gap + 2 log F, in the same base as gap
    trace_distance_residual: float  # ||rho - R(N(rho))||_1
    fvdg_bound: float  # 2 sqrt(gap in nats)
    fvdg_passed: bool
    bound_passed: bool
    base: str
    grid: dict

    def to_json(self) -> dict:
        return {
            "gap": self.gap,
            "fidelity": self.recovery_fidelity,
            "bound_slack": self.bound_slack,
            "l1_residual": self.trace_distance_residual,
            "fvdg_bound": self.fvdg_bound,
            "fvdg_passed": self.fvdg_passed,
            "bound_passed": self.bound_passed,
            "base": self.base,
            "grid": self.grid,
        }


def recovery_report(ch: KrausMap, rho: DensityOperator, sigma: DensityOperator,
                    grid: QuadratureGrid | None = None, cfg: EntropyConfig = NATS,
                    tol: Tolerance = DEFAULT_TOL, bound_tol: float = 1e-6,
                    recovery: UniversalRecovery | None = None) -> RecoveryReport:
    """Universal-recovery bound ``gap >= -2 log F(rho, R(N(rho)))`` plus its trace-norm form.

    Pass a prebuilt ``recovery`` to reuse it across many ``rho``.
    """
    rec = recovery if recovery is not None else universal_recovery(sigma, ch, grid, tol)
    gap = recoverability_gap(ch, rho, sigma, cfg, tol)
    recovered = rec.apply_matrix(apply_map(ch, np.asarray(rho)))
    recovered = (recovered + recovered.conj().T) / 2
    f = min(1.0, fidelity(np.asarray(rho), recovered, tol))
    two_log_f = cfg.from_nats(2 * np.log(f)) if f > 0 else -np.inf
    slack = gap + two_log_f
    l1 = trace_norm(np.asarray(rho) - recovered)
    fvdg = 2 * np.sqrt(max(cfg.to_nats(gap), 0.0))
    return RecoveryReport(
        gap=gap,
        recovery_fidelity=f,
        bound_slack=float(slack),
        trace_distance_residual=l1,
        fvdg_bound=float(fvdg),
        fvdg_passed=bool(l1 <= fvdg + bound_tol),
        bound_passed=bool(slack >= -bound_tol),
        base=cfg.log_base,
        grid=rec.grid.to_json(),
    )


@dataclass(frozen=True, eq=False)
class ErasureExample:
    channel: KrausChannel
    isometry: np.ndarray  # code -> A (x) Abar
    chi: np.ndarray  # |chi> on H_2 (x) H_Abar, shape (d2, d_abar)
    sigma: DensityOperator
    petz: PetzMap
    dims: dict
    max_residual: float  # max ||rho - P(N(rho))||_1 over the probe code states
    chi_trace: float  # Tr_2 Tr_Abar |chi><chi|

    def code_probes(self) -> list[np.ndarray]:
        return _code_probe_states(self.dims["d_code"])


def _code_probe_states(d: int) -> list[np.ndarray]:
    """Basis projectors plus the two-level superpositions spanning all operators."""
    probes = []
    eye = np.eye(d, dtype=complex)
    for a in range(d):
        probes.append(np.outer(eye[a], eye[a]))
    for a in range(d):
        for b in range(a + 1, d):
            for phase in (1, 1j):
                v = (eye[a] + phase * eye[b]) / np.sqrt(2)
                probes.append(np.outer(v, v.conj()))
    return probes


def erasure_example(d_code: int = 2, d1: int | None = None, d2: int = 2, d3: int = 0,
                    d_abar: int = 2, sigma_spectrum: Sequence[float] | None = None,
                    seed: SeedLike = 0, tol: Tolerance = DEFAULT_TOL) -> ErasureExample:
    """Code embedded as ``|a> -> |a>_1 |chi>_{2 Abar}`` in ``(H1 (x) H2 (+) H3) (x) H_Abar``.

    Tracing out ``Abar`` gives ``N(rho) = rho_1 (x) chi_2`` (padded by zeros on
    ``H3``), which the Petz map with a diagonal full-rank ``sigma`` undoes.
    """
    d1 = d_code if d1 is None else d1
    if d1 != d_code or d_code < 1 or d2 < 1 or d3 < 0 or d_abar < 1:
        raise ValueError("need d1 == d_code >= 1, d2 >= 1, d3 >= 0, d_abar >= 1")
    if sigma_spectrum is None:
        sigma_spectrum = np.arange(d_code, 0, -1, dtype=float)
        sigma_spectrum /= sigma_spectrum.sum()
    spectrum = np.asarray(sigma_spectrum, dtype=float)
    if spectrum.shape != (d_code,) or np.any(spectrum <= 0) or abs(spectrum.sum() - 1) > tol.trace_tol:
        raise ValueError("sigma_spectrum must be a strictly positive probability vector")

    z = complex_gaussian(rng_from(seed), (d2, d_abar))
    chi = z / np.linalg.norm(z)
    d_a = d1 * d2 + d3
    embed = np.zeros((d_a, d_abar, d_code), dtype=complex)
    for a in range(d_code):
        embed[a * d2:(a + 1) * d2, :, a] = chi
    kraus = [embed[:, nu, :] for nu in range(d_abar)]
    ch = KrausChannel(kraus, d_code, d_a)
    sigma = make_density(np.diag(spectrum).astype(complex), tol)
    petz = petz_map(sigma, ch, tol)

    residual = 0.0
    for rho in _code_probe_states(d_code):
        out = petz.apply_matrix(apply_map(ch, rho))
        residual = max(residual, trace_norm(rho - out))
    chi_2 = chi @ chi.conj().T  # Tr_Abar |chi><chi|
    dims = {"d_code": d_code, "d1": d1, "d2": d2, "d3": d3, "d_abar": d_abar, "d_A": d_a}
    return ErasureExample(ch, embed.reshape(d_a * d_abar, d_code), chi, sigma, petz, dims,
                          residual, float(np.real(np.trace(chi_2))))


def random_code_state(d: int, seed: SeedLike) -> DensityOperator:
    return random_pure(d, seed).density()
