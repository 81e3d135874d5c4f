"""Toy wedge reconstruction: a code space ``a (x) abar`` embedded into ``A (x) Abar``.

The embedding ``J`` (``CodeEmbedding.isometry``) maps code into boundary. The wedge channel
``N(rho_a) = Tr_Abar[J (rho_a (x) sigmabar) J^dagger]`` is reversed by the
universal recovery channel ``R`` built on a reference ``sigma_a``, and a code
operator ``phi_a`` is represented on ``A`` by ``O_A = R^dagger[phi_a]``.

The relative-entropy mismatch ``epsilon`` between code and boundary is
measured on probe pairs (in bits) and feeds the error budget::

    delta1 = 2 sqrt(eps)            # recovery of product inputs
    delta2 = sqrt(2 ln 2 * eps)     # product input vs. the true boundary state
    delta  = delta1 + delta2
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .channels import KrausChannel, apply_map, choi_of, kraus_from_choi
from .entropy import BITS, LN2, SupportError, relative_entropy
from .operators import (
    DEFAULT_TOL,
    Operator,
    Tolerance,
    herm_eigendecompose,
    operator_norm,
    partial_trace_matrix,
    trace_norm,
)
from .recovery import QuadratureGrid, UniversalRecovery, universal_recovery
from .sampling import complex_gaussian, random_isometry, rng_from
from .states import DensityOperator, make_density, random_density, random_pure

__all__ = [
    "CodeEmbedding",
    "build_embedding",
    "wedge_channel",
    "code_marginal",
    "boundary_marginal",
    "probe_states",
    "epsilon_pairs",
    "measure_epsilon",
    "EpsilonSupportError",
    "ReconstructionReport",
    "reconstruct",
    "ChainStep",
    "ChainReport",
    "bound_chain_audit",
    "DEFAULT_DIMS",
]

DEFAULT_DIMS = (2, 2, 4, 4)  # (d_a, d_abar, d_A, d_Abar)
CHAIN_TOL = 1e-7
DATA_PROCESSING_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CodeEmbedding:
    isometry: Operator  # (a, abar) -> (A, Abar)
    dims: tuple[int, int, int, int]
    sigma_abar: DensityOperator
    sigma_a: DensityOperator
    kind: str

    @property
    def d_code(self) -> int:
        return self.dims[0] * self.dims[1]

    def isometry_residual(self) -> float:
        j = self.isometry.entries
        return operator_norm(j.conj().T @ j - np.eye(j.shape[1]))

    def embed(self, rho) -> np.ndarray:
        j = self.isometry.entries
        return j @ np.asarray(rho, dtype=complex) @ j.conj().T


class EpsilonSupportError(ValueError):
    def __init__(self, failures: list[str]):
        super().__init__("support violations: " + "; ".join(failures))
        self.failures = failures


def _full_rank_state(d: int, rng: np.random.Generator) -> DensityOperator:
    return random_density(d, d, rng)


def build_embedding(kind: str = "product_wedge", dims: Sequence[int] = DEFAULT_DIMS,
                    seed: int = 0) -> CodeEmbedding:
    """Certified isometry of the requested kind.

    ``product_wedge`` sends ``|a, abar>`` to ``|a>_1 |chi>_{2E} |abar>`` with
    ``A = 1 (x) 2`` and ``Abar = E (x) abar``, so ``a`` is exactly visible from
    ``A``. ``random_isometry`` draws ``J`` uniformly.
    """
    d_a, d_abar, d_A, d_Abar = (int(d) for d in dims)
    if min(d_a, d_abar, d_A, d_Abar) < 1:
        raise ValueError("dimensions must be positive")
    if d_a * d_abar > d_A * d_Abar:
        raise ValueError(f"no isometry from {d_a * d_abar} into {d_A * d_Abar} dimensions")
    rng_j, rng_a, rng_abar = (np.random.default_rng(s)
                              for s in np.random.SeedSequence(seed).spawn(3))
    if kind == "product_wedge":
        if d_A % d_a or d_Abar % d_abar:
            raise ValueError("product_wedge needs d_a | d_A and d_abar | d_Abar")
        d2, d_env = d_A // d_a, d_Abar // d_abar
        z = complex_gaussian(rng_j, (d2, d_env))
        chi = z / np.linalg.norm(z)
        j = np.einsum("xa,me,yb->xmeyab", np.eye(d_a), chi, np.eye(d_abar))
        j = j.reshape(d_A * d_Abar, d_a * d_abar)
    elif kind == "random_isometry":
        j = random_isometry(d_a * d_abar, d_A * d_Abar, rng_j)
    else:
        raise ValueError(f"unknown embedding kind {kind!r}")
    emb = CodeEmbedding(
        Operator(j, (d_A, d_Abar), (d_a, d_abar)),
        (d_a, d_abar, d_A, d_Abar),
        _full_rank_state(d_abar, rng_abar),
        _full_rank_state(d_a, rng_a),
        kind,
    )
    if emb.isometry_residual() > 1e-8:
        raise ArithmeticError("embedding failed the isometry check")
    return emb


def wedge_channel(emb: CodeEmbedding, tol: Tolerance = DEFAULT_TOL) -> KrausChannel:
    """Kraus form ``sqrt(s_k) (I (x) <mu|_Abar) J (I (x) |k>_abar)`` over eigenpairs of sigmabar."""
    d_a, d_abar, d_A, d_Abar = emb.dims
    j = emb.isometry.entries.reshape(d_A, d_Abar, d_a, d_abar)
    eig = herm_eigendecompose(emb.sigma_abar.matrix, tol)
    ops = []
    for s_k, v_k in zip(eig.eigenvalues, eig.eigenvectors.T):
        if s_k <= tol.eigenvalue_cutoff:
            continue
        jk = np.einsum("xmab,b->xma", j, v_k)
        ops.extend(np.sqrt(s_k) * jk[:, mu, :] for mu in range(d_Abar))
    ch = KrausChannel(ops, d_a, d_A)
    if ch.n_kraus > d_a * d_A:
        ch = kraus_from_choi(choi_of(ch), tol)
    return ch


def code_marginal(emb: CodeEmbedding, rho) -> np.ndarray:
    d_a, d_abar = emb.dims[:2]
    return partial_trace_matrix(np.asarray(rho), (d_a, d_abar), [0])


def boundary_marginal(emb: CodeEmbedding, rho) -> np.ndarray:
    """``(J rho J^dagger)_A``."""
    d_A, d_Abar = emb.dims[2:]
    return partial_trace_matrix(emb.embed(rho), (d_A, d_Abar), [0])


def _state(m, tol: Tolerance) -> DensityOperator:
    m = np.asarray(m)
    return make_density((m + m.conj().T) / 2, tol)


def probe_states(emb: CodeEmbedding, n: int = 10, seed: int = 0,
                 include_reference: bool = True) -> list[DensityOperator]:
    """``n`` Haar-random pure code states, then ``sigma_a (x) sigmabar``."""
    rng = rng_from(seed)
    probes = [random_pure(emb.dims[:2], rng).density() for _ in range(n)]
    if include_reference:
        ref = np.kron(emb.sigma_a.matrix, emb.sigma_abar.matrix)
        probes.append(make_density(ref))
    return probes


def epsilon_pairs(emb: CodeEmbedding, probes: Sequence[DensityOperator]
                  ) -> list[tuple[DensityOperator, DensityOperator]]:
    """Code-state pairs whose mismatch the error budget relies on.

    For each probe ``rho``: ``(rho_a (x) sigmabar, sigma_a (x) sigmabar)`` for
    the recovery step and ``(rho_a (x) sigmabar, rho)`` for the comparison of
    the product input with the true state.
    """
    ref = make_density(np.kron(emb.sigma_a.matrix, emb.sigma_abar.matrix))
    pairs = []
    for rho in probes:
        prod_state = make_density(np.kron(code_marginal(emb, rho), emb.sigma_abar.matrix))
        pairs.append((prod_state, ref))
        pairs.append((prod_state, rho))
    return pairs


def _pair_gap(emb: CodeEmbedding, rho: DensityOperator, sigma: DensityOperator,
              tol: Tolerance) -> float:
    code = relative_entropy(_state(code_marginal(emb, rho), tol),
                            _state(code_marginal(emb, sigma), tol), BITS, tol)
    boundary = relative_entropy(_state(boundary_marginal(emb, rho), tol),
                                _state(boundary_marginal(emb, sigma), tol), BITS, tol)
    return abs(boundary - code)


def measure_epsilon(emb: CodeEmbedding, pairs: Sequence[tuple[DensityOperator, DensityOperator]],
                    tol: Tolerance = DEFAULT_TOL) -> float:
    """``max |D(rho_A||sigma_A) - D(rho_a||sigma_a)|`` over ``pairs``, in bits."""
    gaps, failures = [], []
    for i, (rho, sigma) in enumerate(pairs):
        try:
            gaps.append(_pair_gap(emb, rho, sigma, tol))
        except SupportError as exc:
            failures.append(f"pair {i}: {exc}")
    if failures:
        raise EpsilonSupportError(failures)
    return max(gaps, default=0.0)


def _budget(eps: float) -> tuple[float, float]:
    eps = max(eps, 0.0)
    return 2 * np.sqrt(eps), np.sqrt(2 * LN2 * eps)


def _recover(rec: UniversalRecovery, x: np.ndarray) -> np.ndarray:
    y = rec.apply_matrix(x)
    return (y + y.conj().T) / 2


@dataclass(frozen=True)
class OperatorCheck:
    label: str
    probe: int
    lhs: float  # |<O_A>_{J rho J^dagger} - <phi_a>_rho|
    rhs: float  # delta * ||phi_a||
    holder_lhs: float  # |Tr[phi_a Delta]|
    holder_rhs: float  # ||Delta||_1 ||phi_a||
    passed: bool

    def to_json(self) -> dict:
        return {"label": self.label, "probe": self.probe, "lhs": self.lhs, "rhs": self.rhs,
                "holder_lhs": self.holder_lhs, "holder_rhs": self.holder_rhs,
                "passed": self.passed}


@dataclass(frozen=True)
class ReconstructionReport:
    epsilon_measured: float
    delta1: float
    delta2: float
    delta: float
    per_operator: tuple[OperatorCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.per_operator)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon_measured,
            "epsilon_base": "bits",
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta": self.delta,
            "passed": self.passed,
            "per_operator": [c.to_json() for c in self.per_operator],
        }


def _heisenberg(rec: UniversalRecovery, phi: np.ndarray) -> np.ndarray:
    if rec.materializable:
        return apply_map(rec.adjoint_map(), phi)
    return rec.adjoint_matrix(phi)


def reconstruct(emb: CodeEmbedding, phi_a, grid: QuadratureGrid | None = None,
                probes: Sequence[DensityOperator] | None = None, seed: int = 0,
                tol: Tolerance = DEFAULT_TOL, recovery: UniversalRecovery | None = None,
                ) -> tuple[dict[str, Operator], ReconstructionReport]:
    """Boundary representatives ``O_A = R^dagger[phi_a]`` and their error audit.

    ``phi_a`` is one operator on ``a`` or a mapping ``label -> operator``.
    Returns the representatives keyed by label, and a report comparing
    ``Tr[O_A (J rho J^dagger)_A]`` with ``Tr[phi_a rho_a]`` on every probe.
    """
    ops = dict(phi_a) if isinstance(phi_a, Mapping) else {"phi_a": phi_a}
    probes = list(probes) if probes is not None else probe_states(emb, seed=seed)
    rec = recovery if recovery is not None else universal_recovery(
        emb.sigma_a, wedge_channel(emb, tol), grid, tol)
    eps = measure_epsilon(emb, epsilon_pairs(emb, probes), tol)
    d1, d2 = _budget(eps)
    delta = d1 + d2

    reps: dict[str, Operator] = {}
    checks = []
    boundary = [boundary_marginal(emb, rho) for rho in probes]
    marginals = [code_marginal(emb, rho) for rho in probes]
    for label, phi in ops.items():
        phi = np.asarray(phi, dtype=complex)
        o_a = _heisenberg(rec, phi)
        reps[label] = Operator(o_a, (emb.dims[2],), (emb.dims[2],))
        norm = operator_norm(phi)
        for i, (rho_A, rho_a) in enumerate(zip(boundary, marginals)):
            lhs = abs(np.trace(o_a @ rho_A) - np.trace(phi @ rho_a))
            residual = _recover(rec, rho_A) - rho_a
            holder_lhs = abs(np.trace(phi @ residual))
            holder_rhs = trace_norm(residual) * norm
            checks.append(OperatorCheck(
                label, i, float(lhs), float(delta * norm), float(holder_lhs), float(holder_rhs),
                bool(lhs <= delta * norm + CHAIN_TOL and holder_lhs <= holder_rhs + DATA_PROCESSING_TOL),
            ))
    return reps, ReconstructionReport(float(eps), float(d1), float(d2), float(delta), tuple(checks))


@dataclass(frozen=True)
class ChainStep:
    probe: int
    recovery_residual: float  # ||rho_a - R(N(rho_a))||_1, bounded by delta1
    input_mismatch: float  # ||N(rho_a) - (J rho J^dagger)_A||_1, bounded by delta2
    recovered_mismatch: float  # ||R(N(rho_a)) - R((J rho J^dagger)_A)||_1 <= input_mismatch
    final_residual: float  # ||rho_a - R((J rho J^dagger)_A)||_1, bounded by delta
    wedge_contraction: tuple[float, float]  # (||N(rho_a) - N(sigma_a)||_1, ||rho_a - sigma_a||_1)
    checks: dict

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        return {
            "probe": self.probe,
            "recovery_residual": self.recovery_residual,
            "input_mismatch": self.input_mismatch,
            "recovered_mismatch": self.recovered_mismatch,
            "final_residual": self.final_residual,
            "wedge_contraction": list(self.wedge_contraction),
            "checks": self.checks,
        }


@dataclass(frozen=True)
class ChainReport:
    epsilon_measured: float
    delta1: float
    delta2: float
    delta: float
    steps: tuple[ChainStep, ...]

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.steps)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon_measured,
            "epsilon_base": "bits",
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta": self.delta,
            "passed": self.passed,
            "steps": [s.to_json() for s in self.steps],
        }


def bound_chain_audit(emb: CodeEmbedding, probes: Sequence[DensityOperator] | None = None,
                      grid: QuadratureGrid | None = None, seed: int = 0,
                      tol: Tolerance = DEFAULT_TOL,
                      recovery: UniversalRecovery | None = None) -> ChainReport:
    """Replay the three-step bound on every probe and check each inequality."""
    probes = list(probes) if probes is not None else probe_states(emb, seed=seed)
    ch = wedge_channel(emb, tol)
    rec = recovery if recovery is not None else universal_recovery(emb.sigma_a, ch, grid, tol)
    eps = measure_epsilon(emb, epsilon_pairs(emb, probes), tol)
    d1, d2 = _budget(eps)
    sigma_a = emb.sigma_a.matrix
    n_sigma = apply_map(ch, sigma_a)

    steps = []
    for i, rho in enumerate(probes):
        rho_a = code_marginal(emb, rho)
        n_rho = apply_map(ch, rho_a)
        rho_A = boundary_marginal(emb, rho)
        rec_product = _recover(rec, n_rho)
        rec_true = _recover(rec, rho_A)
        s1 = trace_norm(rho_a - rec_product)
        s2 = trace_norm(n_rho - rho_A)
        dp = trace_norm(rec_product - rec_true)
        final = trace_norm(rho_a - rec_true)
        contraction = (trace_norm(n_rho - n_sigma), trace_norm(rho_a - sigma_a))
        checks = {
            "step1": bool(s1 <= d1 + CHAIN_TOL),
            "step2": bool(s2 <= d2 + CHAIN_TOL),
            "data_processing": bool(dp <= s2 + DATA_PROCESSING_TOL),
            "triangle": bool(final <= s1 + dp + DATA_PROCESSING_TOL),
            "final": bool(final <= d1 + d2 + CHAIN_TOL),
            "wedge_contraction": bool(contraction[0] <= contraction[1] + DATA_PROCESSING_TOL),
        }
        steps.append(ChainStep(i, s1, s2, dp, final, contraction, checks))
    return ChainReport(float(eps), float(d1), float(d2), float(d1 + d2), tuple(steps))
