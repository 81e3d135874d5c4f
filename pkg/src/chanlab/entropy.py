"""Entropic functionals and numerical audits of the standard inequalities.

All quantities are computed from the same eigenvalue pipeline in natural
log; ``EntropyConfig(log_base="bits")`` only rescales by ``1/ln 2`` at the
end, so results in the two bases differ by exactly that factor.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from .operators import (
    DEFAULT_TOL,
    Operator,
    Tolerance,
    herm_eigendecompose,
    trace_norm,
)
from .states import DensityOperator, partial_trace, tensor

__all__ = [
    "EntropyConfig",
    "NATS",
    "BITS",
    "InequalityReport",
    "SupportError",
    "RankDeficientError",
    "von_neumann_entropy",
    "relative_entropy",
    "TraceDistance",
    "trace_distance_report",
    "measurement_distance",
    "pinsker_audit",
    "inequality_suite",
    "AmpssReport",
    "ampss_audit",
    "ampss_audit_state",
    "additivity_check",
]

LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class EntropyConfig:
    log_base: Literal["nats", "bits"] = "nats"

    def __post_init__(self):
        if self.log_base not in ("nats", "bits"):
            raise ValueError(f"log_base must be 'nats' or 'bits', got {self.log_base!r}")

    def from_nats(self, x: float) -> float:
        return x / LN2 if self.log_base == "bits" else x

    def to_nats(self, x: float) -> float:
        return x * LN2 if self.log_base == "bits" else x


NATS = EntropyConfig("nats")
BITS = EntropyConfig("bits")


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of checking ``lhs <= rhs``.

    ``slack`` is ``rhs - lhs`` for inequalities; equality checks store
    ``-|lhs - rhs|``. ``passed`` is ``slack >= -tol``.
    """

    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    tol: float = 1e-9
    seed: int | None = None
    base: str = "nats"

    @classmethod
    def le(cls, name: str, lhs: float, rhs: float, tol: float = 1e-9, **kw) -> "InequalityReport":
        slack = float(rhs - lhs)
        return cls(name, float(lhs), float(rhs), slack, slack >= -tol, tol, **kw)

    @classmethod
    def eq(cls, name: str, lhs: float, rhs: float, tol: float = 1e-9, **kw) -> "InequalityReport":
        slack = -abs(float(lhs - rhs))
        return cls(name, float(lhs), float(rhs), slack, slack >= -tol, tol, **kw)

    def to_json(self) -> dict:
        d = asdict(self)
        if d["seed"] is None:
            del d["seed"]
        return d


class SupportError(ValueError):
    """``supp rho`` is not contained in ``supp sigma``."""

    def __init__(self, index: int, weight: float):
        super().__init__(
            f"kernel eigenvector {index} of sigma carries weight {weight:.3e} in rho"
        )
        self.index = index
        self.weight = weight


class RankDeficientError(ValueError):
    pass


def _xlogx_sum(p: np.ndarray) -> float:
    return float(np.sum(p * np.log(p)))


def von_neumann_entropy(rho: DensityOperator, cfg: EntropyConfig = NATS,
                        tol: Tolerance = DEFAULT_TOL) -> float:
    """``-sum p log p`` over eigenvalues above the cutoff (``0 log 0 = 0``)."""
    w = herm_eigendecompose(np.asarray(rho), tol).eigenvalues
    p = w[w > tol.eigenvalue_cutoff]
    return cfg.from_nats(max(0.0, -_xlogx_sum(p)))


def relative_entropy(rho: DensityOperator, sigma: DensityOperator, cfg: EntropyConfig = NATS,
                     tol: Tolerance = DEFAULT_TOL) -> float:
    """``Tr rho log rho - Tr rho log sigma``.

    Raises :class:`SupportError` when some eigenvector ``v`` of ``sigma`` with
    eigenvalue at or below the cutoff has ``<v|rho|v>`` above the cutoff.
    """
    r, s = np.asarray(rho), np.asarray(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    es = herm_eigendecompose(s, tol)
    q, v = es.eigenvalues, es.eigenvectors
    # <v_a| rho |v_a> for every eigenvector of sigma
    weights = np.real(np.einsum("ia,ij,ja->a", v.conj(), r, v))
    supp = q > tol.eigenvalue_cutoff
    for a in np.flatnonzero(~supp):
        if weights[a] > tol.eigenvalue_cutoff:
            raise SupportError(int(a), float(weights[a]))
    p = herm_eigendecompose(r, tol).eigenvalues
    p = p[p > tol.eigenvalue_cutoff]
    cross = float(np.sum(weights[supp] * np.log(q[supp])))
    return cfg.from_nats(_xlogx_sum(p) - cross)


class TraceDistance(NamedTuple):
    distance: float
    projectors: list[Operator]  # [P_plus, P_minus]


def trace_distance_report(rho: DensityOperator, sigma: DensityOperator,
                          tol: Tolerance = DEFAULT_TOL) -> TraceDistance:
    """Half the 1-norm of ``rho - sigma`` plus the measurement achieving it.

    The projectors onto the non-negative and negative eigenspaces of
    ``rho - sigma`` form a two-outcome measurement whose outcome distributions
    are exactly that far apart in (halved) L1 distance.
    """
    r, s = np.asarray(rho), np.asarray(sigma)
    if r.shape != s.shape:
        raise ValueError(f"dimension mismatch: {r.shape} vs {s.shape}")
    es = herm_eigendecompose(r - s, tol)
    lam, v = es.eigenvalues, es.eigenvectors
    pos = lam > 0
    projectors = []
    for mask in (pos, ~pos):
        vs = v[:, mask]
        projectors.append(Operator.from_matrix(vs @ vs.conj().T))
    return TraceDistance(0.5 * float(np.abs(lam).sum()), projectors)


def measurement_distance(rho, sigma, projectors) -> float:
    """Halved L1 distance between the outcome distributions of a measurement."""
    r, s = np.asarray(rho), np.asarray(sigma)
    p = np.array([np.real(np.trace(np.asarray(e) @ r)) for e in projectors])
    q = np.array([np.real(np.trace(np.asarray(e) @ s)) for e in projectors])
    return 0.5 * float(np.abs(p - q).sum())


def pinsker_audit(rho: DensityOperator, sigma: DensityOperator, cfg: EntropyConfig = NATS,
                  tol: Tolerance = DEFAULT_TOL) -> InequalityReport:
    """``c ||rho - sigma||_1^2 <= D(rho||sigma)`` with ``c = 1/2`` (nats) or ``1/(2 ln 2)`` (bits)."""
    d = relative_entropy(rho, sigma, cfg, tol)
    t1 = trace_norm(np.asarray(rho) - np.asarray(sigma))
    c = 0.5 if cfg.log_base == "nats" else 1.0 / (2.0 * LN2)
    return InequalityReport.le("pinsker", c * t1**2, d, base=cfg.log_base)


def _entropies(rho: DensityOperator, cfg: EntropyConfig, tol: Tolerance) -> dict[str, float]:
    labels = "ABC"
    out = {}
    for r in (1, 2, 3):
        for keep in itertools.combinations(range(3), r):
            name = "".join(labels[k] for k in keep)
            sub = rho if r == 3 else partial_trace(rho, keep)
            out[name] = von_neumann_entropy(sub, cfg, tol)
    return out


def inequality_suite(rho_abc: DensityOperator, cfg: EntropyConfig = NATS,
                     tol: Tolerance = DEFAULT_TOL, seed: int | None = None
                     ) -> list[InequalityReport]:
    """Subadditivity and Araki-Lieb on every pair, then strong subadditivity."""
    if len(rho_abc.dims) != 3:
        raise ValueError(f"expected exactly three factors, got {len(rho_abc.dims)}")
    S = _entropies(rho_abc, cfg, tol)
    kw = {"seed": seed, "base": cfg.log_base}
    reports = []
    for x, y in (("A", "B"), ("B", "C"), ("A", "C")):
        xy = x + y
        reports.append(InequalityReport.le(f"subadditivity[{xy}]", S[xy], S[x] + S[y], **kw))
    for x, y in (("A", "B"), ("B", "C"), ("A", "C")):
        xy = x + y
        reports.append(InequalityReport.le(f"araki_lieb[{xy}]", abs(S[x] - S[y]), S[xy], **kw))
    reports.append(InequalityReport.le("strong_subadditivity", S["ABC"] + S["B"],
                                       S["AB"] + S["BC"], **kw))
    return reports


@dataclass(frozen=True)
class AmpssReport:
    entropies: dict[str, float]
    conditions: dict[str, bool]
    marginal: dict[str, bool]
    # (expression, value, relation to the previous line, condition used)
    chain: list[tuple[str, float, str, str]]
    chain_holds: bool
    contradiction: bool
    satisfied_subsets: list[tuple[str, ...]] = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def ampss_audit(S_A: float, S_B: float, S_AB: float, S_R: float, S_BR: float, S_ABR: float,
                tol: float = 1e-9) -> AmpssReport:
    """Replay the four-condition firewall argument on supplied entropies.

    Conditions:
      (i)   S(A) = S(B) != 0 and S(AB) = 0
      (ii)  S(ABR) = S(R)
      (iii) S(BR) < S(R), taken as ``S(BR) - S(R) <= -tol``
      (iv)  S(AB) + S(BR) >= S(ABR) + S(B)

    ``contradiction`` is set when (i)-(iii) hold together: the chain then
    forces ``S(R) + S(B) < S(R)`` under (iv), so (iv) must be what fails.
    Cases of (iii) within ``tol`` of equality are listed under ``marginal``.
    """
    ent = {"A": S_A, "B": S_B, "AB": S_AB, "R": S_R, "BR": S_BR, "ABR": S_ABR}
    cond = {
        "i": abs(S_A - S_B) <= tol and abs(S_B) > tol and abs(S_AB) <= tol,
        "ii": abs(S_ABR - S_R) <= tol,
        "iii": S_BR - S_R <= -tol,
        "iv": S_AB + S_BR >= S_ABR + S_B - tol,
    }
    marginal = {"iii": abs(S_BR - S_R) < tol}
    chain = [
        ("S(R) + S(B)", S_R + S_B, "", ""),
        ("S(ABR) + S(B)", S_ABR + S_B, "=", "(ii)"),
        ("S(AB) + S(BR)", S_AB + S_BR, "<=", "(iv)"),
        ("S(AB) + S(R)", S_AB + S_R, "<", "(iii)"),
        ("S(R)", S_R, "=", "(i)"),
    ]
    # the asserted end-to-end conclusion of the chain: S(R) + S(B) < S(R)
    chain_holds = S_R + S_B < S_R - tol
    contradiction = cond["i"] and cond["ii"] and cond["iii"]
    names = ("i", "ii", "iii", "iv")
    subsets = [
        sub for r in range(len(names), 0, -1)
        for sub in itertools.combinations(names, r)
        if all(cond[c] for c in sub)
    ]
    maximal = [s for s in subsets if not any(set(s) < set(t) for t in subsets)]
    return AmpssReport(ent, cond, marginal, chain, chain_holds, contradiction, maximal)


def ampss_audit_state(rho_abr: DensityOperator, cfg: EntropyConfig = NATS,
                      tol: Tolerance = DEFAULT_TOL) -> AmpssReport:
    """:func:`ampss_audit` on the entropies of an actual state on A (x) B (x) R."""
    S = _entropies(rho_abr, cfg, tol)
    return ampss_audit(S["A"], S["B"], S["AB"], S["C"], S["BC"], S["ABC"])


def additivity_check(rho_a: DensityOperator, chi_b: DensityOperator,
                     sigma_a: DensityOperator, tau_b: DensityOperator,
                     cfg: EntropyConfig = NATS, tol: Tolerance = DEFAULT_TOL,
                     atol: float = 1e-8) -> InequalityReport:
    """``D(rho (x) chi || sigma (x) tau) = D(rho||sigma) + D(chi||tau)`` for full-rank references."""
    for name, s in (("sigma_A", sigma_a), ("tau_B", tau_b)):
        w = s.eigenvalues(tol)
        if w[-1] <= tol.eigenvalue_cutoff:
            raise RankDeficientError(f"{name} is not full rank (min eigenvalue {w[-1]:.3e})")
    joint = relative_entropy(tensor(rho_a, chi_b), tensor(sigma_a, tau_b), cfg, tol)
    split = relative_entropy(rho_a, sigma_a, cfg, tol) + relative_entropy(chi_b, tau_b, cfg, tol)
    return InequalityReport.eq("relative_entropy_additivity", joint, split, tol=atol,
                               base=cfg.log_base)
