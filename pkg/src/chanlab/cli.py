"""Command-line entry point: ``chanlab <command> [options]``.

Exit codes: 0 when every check passes, 2 when any check is violated, 1 on
usage or IO errors. Randomized commands need ``--seed`` or ``CHANLAB_SEED``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from math import prod
from typing import Any, Callable

import numpy as np

from . import channels, entropy, holo, qec, recovery
from .operators import Operator, Tolerance
from .sampling import random_hermitian, substream
from .states import DensityOperator, make_density, partial_trace, random_density, random_pure

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not dims or min(dims) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return dims


def _logical(text: str) -> tuple[complex, complex]:
    try:
        a, b = (complex(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'alpha,beta', got {text!r}")
    return a, b


class Context:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.tol = Tolerance(eigenvalue_cutoff=args.tol) if args.tol else Tolerance()
        self.cfg = entropy.EntropyConfig(args.log_base)

    def seed(self) -> int:
        if self.args.seed is not None:
            return self.args.seed
        env = os.environ.get("CHANLAB_SEED")
        if env is None:
            raise UsageError("this command is randomized: pass --seed or set CHANLAB_SEED")
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"CHANLAB_SEED must be an integer, got {env!r}")


def _trials(args, default: int) -> int:
    n = default if args.trials is None else args.trials
    if n < 1:
        raise UsageError("--trials must be at least 1")
    return n


def _load_json(path: str) -> Any:
    with open(path) as fh:
        return json.load(fh)


def _load_state(path: str, tol: Tolerance) -> DensityOperator:
    obj = _load_json(path)
    try:
        op = Operator.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"not an operator file: {exc}")
    if op.shape[1] == 1:  # a state vector
        psi = op.entries[:, 0]
        return make_density(np.outer(psi, psi.conj()), tol, op.row_dims)
    try:
        return make_density(op, tol)
    except ValueError as exc:
        raise UsageError(f"{path} is not a density operator: {exc}")


# --- commands -------------------------------------------------------------

def cmd_entropy_audit(ctx: Context) -> tuple[dict, list[str], bool]:
    args = ctx.args
    lines = []
    trials = []
    offending = []
    if args.state:
        states = [(None, _load_state(args.state, ctx.tol))]
        if len(states[0][1].dims) != 3:
            raise UsageError("--state must be a tripartite density operator (three row_dims)")
    else:
        n = _trials(args, 100)
        dims = args.dims or (2, 2, 2)
        if len(dims) != 3:
            raise UsageError("--dims needs three factors, e.g. 2,2,2")
        seed = ctx.seed()
        states = []
        for i in range(n):
            rng = substream(seed, i)
            states.append((i, random_density(dims, prod(dims), rng)))
    for idx, rho in states:
        reports = entropy.inequality_suite(rho, ctx.cfg, ctx.tol, seed=idx)
        if idx is not None:
            rng = substream(ctx.seed(), 10**6 + idx)
            sigma = random_density(rho.dims, rho.dim, rng)
            reports.append(entropy.pinsker_audit(rho, sigma, ctx.cfg, ctx.tol))
            ra, rb = partial_trace(rho, [0]), partial_trace(rho, [1])
            sa, sb = partial_trace(sigma, [0]), partial_trace(sigma, [1])
            reports.append(entropy.additivity_check(ra, rb, sa, sb, ctx.cfg, ctx.tol))
        failed = [r.name for r in reports if not r.passed]
        if failed:
            offending.append({"trial": idx, "failed": failed})
        trials.append({"trial": idx, "reports": [r.to_json() for r in reports]})
        min_slack = min(r.slack for r in reports)
        lines.append(f"trial {'state' if idx is None else idx}: {len(reports)} checks, min slack {min_slack:.3e}"
                     + (f"  VIOLATED {failed}" if failed else ""))
    report = {"command": "entropy-audit", "base": ctx.cfg.log_base, "trials": len(states),
              "violations": offending}
    if len(states) <= 10:
        report["details"] = trials
    lines.append(f"{len(offending)} violating trial(s) out of {len(states)}")
    return report, lines, not offending


def cmd_ampss_demo(ctx: Context) -> tuple[dict, list[str], bool]:
    hand = entropy.ampss_audit(S_A=1, S_B=1, S_AB=0, S_R=5, S_BR=4, S_ABR=5)
    lines = ["hand input: S(A)=1 S(B)=1 S(AB)=0 S(R)=5 S(BR)=4 S(ABR)=5"]
    for expr, value, rel, cond in hand.chain:
        lines.append(f"  {rel:>2} {expr:<16} = {value:g}  {cond}")
    lines.append(f"  chain ends in S(R)+S(B) < S(R): contradiction={hand.contradiction}, "
                 f"(iv) holds={hand.conditions['iv']}")
    n = _trials(ctx.args, 200)
    seed = ctx.seed()
    joint, iv_fail = 0, 0
    for i in range(n):
        rng = substream(seed, i)
        if i % 2:
            # pure on AB times mixed R satisfies (i) and (ii); (iii) then fails
            ab = random_pure((2, 2), rng).density()
            r = random_density(2, 2, rng)
            rho = make_density(np.kron(ab.matrix, r.matrix), ctx.tol, (2, 2, 2))
        else:
            rho = random_density((2, 2, 2), 8, rng)
        rep = entropy.ampss_audit_state(rho, ctx.cfg, ctx.tol)
        c = rep.conditions
        joint += c["i"] and c["ii"] and c["iii"]
        iv_fail += not c["iv"]
    lines.append(f"sampled {n} states: (i)&(ii)&(iii) jointly held {joint} times, (iv) failed {iv_fail} times")
    ok = hand.contradiction and joint == 0 and iv_fail == 0
    report = {"command": "ampss-demo", "hand_input": hand.to_json(),
              "sampled": {"trials": n, "seed": seed, "joint_i_ii_iii": joint, "iv_failures": iv_fail}}
    return report, lines, ok


def cmd_channel_verify(ctx: Context) -> tuple[dict, list[str], bool]:
    obj = _load_json(ctx.args.file)
    try:
        ch = channels.KrausMap.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"not a channel file: {exc}")
    cert = channels.verify_cptp(ch, ctx.tol)
    lines = [f"channel {ch.in_dim} -> {ch.out_dim}, {cert.kraus_count} Kraus operators",
             f"completeness residual {cert.completeness_residual:.3e}",
             f"Choi min eigenvalue {cert.choi_min_eigenvalue:.3e}",
             "CPTP" if cert.passed else "NOT CPTP"]
    return {"command": "channel-verify", "certificate": cert.to_json()}, lines, cert.passed


def cmd_shor_demo(ctx: Context) -> tuple[dict, list[str], bool]:
    args = ctx.args
    code = qec.shor_code() if args.code == "shor" else qec.three_qubit_code()
    logical = args.logical or (0.6, 0.8)
    try:
        if args.sweep:
            rows = qec.sweep(code, logical)
        else:
            rows = [qec.roundtrip(code, logical, args.error or "I")]
    except qec.UncorrectableError as exc:
        return ({"command": "shor-demo", "error": str(exc)}, [str(exc)], False)
    except ValueError as exc:
        raise UsageError(str(exc))
    gens = [g.label() for g in code.stabilizer_generators]
    lines = ["error    " + " ".join(f"{g:>13}" for g in gens) + "   correction  fidelity"]
    for r in rows:
        cells = " ".join(f"{b:>13d}" for b in r.syndrome.bits)
        lines.append(f"{r.error:<8} {cells}   {r.correction:<10}  {r.fidelity:.12f}")
    corrected = sum(r.recovered for r in rows)
    lines.append(f"{corrected}/{len(rows)} corrected")
    report = {"command": "shor-demo", "code": code.name, "generators": gens,
              "logical": [[complex(z).real, complex(z).imag] for z in logical],
              "rows": [r.to_json() for r in rows], "corrected": corrected}
    return report, lines, corrected == len(rows)


def cmd_petz_demo(ctx: Context) -> tuple[dict, list[str], bool]:
    seed = ctx.args.seed if ctx.args.seed is not None else 0
    ex = recovery.erasure_example(2, 2, 2, 0, 2, seed=seed, tol=ctx.tol)
    rng = substream(seed, 1)
    gaps = []
    for _ in range(10):
        rho = random_pure(2, rng).density()
        sigma = random_density(2, 2, rng)
        gaps.append(recovery.recoverability_gap(ex.channel, rho, sigma, ctx.cfg, ctx.tol))
    ok = ex.max_residual <= 1e-8 and max(gaps) <= 1e-8
    lines = [f"erasure example dims {ex.dims}",
             f"max ||rho - P(N(rho))||_1 over code probes: {ex.max_residual:.3e}",
             f"<chi|chi> via partial traces: {ex.chi_trace:.12f}",
             f"max recoverability gap on 10 random pairs: {max(gaps):.3e}"]
    report = {"command": "petz-demo", "example": "erasure", "dims": ex.dims,
              "max_residual": ex.max_residual, "chi_trace": ex.chi_trace,
              "max_gap": max(gaps), "petz_kraus_count": ex.petz.channel.n_kraus}
    return report, lines, ok


def cmd_recovery_sweep(ctx: Context) -> tuple[dict, list[str], bool]:
    n = _trials(ctx.args, 20)
    dims = ctx.args.dims or (2, 2)
    if len(dims) != 2:
        raise UsageError("--dims needs in,out dimensions, e.g. 2,2")
    d_in, d_out = dims
    seed = ctx.seed()
    rows, bad = [], []
    for i in range(n):
        rng = substream(seed, i)
        ch = channels.random_channel(d_in, d_out, int(rng.integers(1, d_in * d_out + 1)), rng)
        rho = random_density(d_in, d_in, rng)
        sigma = random_density(d_in, d_in, rng)
        rep = recovery.recovery_report(ch, rho, sigma, cfg=ctx.cfg, tol=ctx.tol)
        rows.append({"trial": i, **rep.to_json()})
        if not (rep.bound_passed and rep.fvdg_passed):
            bad.append(i)
    slack = min(r["bound_slack"] for r in rows)
    lines = [f"{n} random (channel, rho, sigma) triples, dims {d_in}->{d_out}",
             f"min gap + 2 log F = {slack:.3e}", f"violations: {bad}"]
    report = {"command": "recovery-sweep", "trials": rows, "violations": bad}
    return report, lines, not bad


def cmd_wedge_demo(ctx: Context) -> tuple[dict, list[str], bool]:
    args = ctx.args
    dims = args.dims or holo.DEFAULT_DIMS
    if len(dims) != 4:
        raise UsageError("--dims needs d_a,d_abar,d_A,d_Abar")
    kind = {"product": "product_wedge", "random": "random_isometry"}.get(args.kind, args.kind)
    seed = ctx.seed()
    try:
        emb = holo.build_embedding(kind, dims, seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    probes = holo.probe_states(emb, args.probes, substream(seed, 1))
    ch = holo.wedge_channel(emb, ctx.tol)
    rec = recovery.universal_recovery(emb.sigma_a, ch, tol=ctx.tol)
    phi = {"identity": np.eye(dims[0]), "random_hermitian": random_hermitian(dims[0], substream(seed, 2))}
    _, rep = holo.reconstruct(emb, phi, probes=probes, tol=ctx.tol, recovery=rec)
    chain = holo.bound_chain_audit(emb, probes, tol=ctx.tol, recovery=rec)
    lines = [f"{kind} dims {tuple(dims)}: epsilon = {rep.epsilon_measured:.3e} bits, "
             f"delta1 = {rep.delta1:.3e}, delta2 = {rep.delta2:.3e}",
             "probe  step1/d1     step2/d2     final/delta  checks"]
    for s in chain.steps:
        lines.append(f"{s.probe:>5}  {s.recovery_residual:.3e}/{chain.delta1:.2e}  "
                     f"{s.input_mismatch:.3e}/{chain.delta2:.2e}  "
                     f"{s.final_residual:.3e}/{chain.delta:.2e}  {'ok' if s.passed else 'FAIL'}")
    worst = max(c.lhs for c in rep.per_operator)
    lines.append(f"max reconstruction error {worst:.3e}; all bounds hold: {rep.passed and chain.passed}")
    report = {"command": "wedge-demo", "kind": kind, "dims": list(dims),
              "reconstruction": rep.to_json(), "chain": chain.to_json()}
    return report, lines, rep.passed and chain.passed


COMMANDS: dict[str, Callable[[Context], tuple[dict, list[str], bool]]] = {
    "entropy-audit": cmd_entropy_audit,
    "ampss-demo": cmd_ampss_demo,
    "channel-verify": cmd_channel_verify,
    "shor-demo": cmd_shor_demo,
    "petz-demo": cmd_petz_demo,
    "recovery-sweep": cmd_recovery_sweep,
    "wedge-demo": cmd_wedge_demo,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (falls back to CHANLAB_SEED)")
    common.add_argument("--trials", type=int)
    common.add_argument("--dims", type=_int_list)
    common.add_argument("--tol", type=float, help="eigenvalue cutoff defining supports")
    common.add_argument("--log-base", choices=("nats", "bits"), default="nats")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "table"), default="json")

    parser = _Parser(prog="chanlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("entropy-audit", parents=[common], help="entropy inequality fuzzing")
    p.add_argument("--state", help="tripartite state JSON instead of random states")
    sub.add_parser("ampss-demo", parents=[common], help="four-condition contradiction replay")
    p = sub.add_parser("channel-verify", parents=[common], help="CPTP certificate for a channel file")
    p.add_argument("file")
    p = sub.add_parser("shor-demo", parents=[common], help="error-correction round trips")
    p.add_argument("--error", help="single-qubit Pauli such as Z5")
    p.add_argument("--logical", type=_logical, help="alpha,beta")
    p.add_argument("--sweep", action="store_true", help="all single-qubit X, Y, Z errors")
    p.add_argument("--code", choices=("shor", "three"), default="shor")
    p = sub.add_parser("petz-demo", parents=[common], help="exact Petz recovery example")
    p.add_argument("--example", choices=("erasure",), default="erasure")
    sub.add_parser("recovery-sweep", parents=[common], help="universal recovery bound fuzzing")
    p = sub.add_parser("wedge-demo", parents=[common], help="toy wedge reconstruction")
    p.add_argument("--kind", choices=("product", "random", "product_wedge", "random_isometry"),
                   default="random")
    p.add_argument("--probes", type=int, default=10)
    return parser


def _emit(args, report: dict, lines: list[str]) -> None:
    if args.format == "json":
        text = json.dumps({"schema": SCHEMA_VERSION, **report}, indent=2) + "\n"
    else:
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        report, lines, ok = COMMANDS[args.command](Context(args))
        _emit(args, report, lines)
    except UsageError as exc:
        print(f"chanlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"chanlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"chanlab: error: invalid JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if ok else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
