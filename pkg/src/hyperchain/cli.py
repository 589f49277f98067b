"""Command-line front end.

Exit codes: 0 on success (a blow-up or a NotPermanent verdict is a finding,
not a failure), 1 on an internal error, 2 on a usage or input error. Every
error prints a single line ``error: <kind>: <reason>`` to stderr.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import TooLarge, profile
from .audit import CHECKS, implication_audit, summary_lines
from .dynamics import IntegratorOptions, Mode, integrate
from .equilibria import (
    BOUNDARY_BOUND,
    POSITIVE_TOL,
    RANK_RTOL,
    boundary_equilibria,
    positive_equilibria,
)
from .generate import (
    cycle,
    example_five,
    example_six,
    hamiltonian_plus_chords,
    random_hyperchain,
    random_rates,
    rng_from,
)
from .graph import HyperchainError, unit_rates, with_rates
from .io import ParseError, dumps_json, dumps_text, loads
from .permanence import PermanenceOptions, numeric_permanence_test
from .report import dumps, sha256_text
from .stability import SIGN_RTOL, boundary_stability, classify_positive_stability

GEN_TYPES = ("cycle", "hamiltonian-plus-chords", "random", "example-five", "example-six")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> tuple[str, object]:
    try:
        text = Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return text, loads(text)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _perm_options(args) -> PermanenceOptions:
    return PermanenceOptions(
        t_end=args.t_end,
        window=args.window,
        offset=args.offset,
        delta=args.delta,
        delta_fail=args.delta_fail,
        floor=args.floor,
        stall_tol=args.stall_tol,
        extensions=args.extensions,
        random_trials=args.trials,
        seed=args.seed,
        use_theorems=not args.no_theorems,
    )


def _safe(fn, *a):
    try:
        return fn(*a).to_dict()
    except HyperchainError as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}


def analysis_report(text: str, sys_, args) -> dict:
    warnings = []
    prof = profile(sys_.graph)
    if prof.is_rooted:
        warnings.append("rooted")
    eq = positive_equilibria(sys_)
    warnings += list(eq.warnings)
    stability = []
    if eq.point is not None:
        stability.append(_safe(classify_positive_stability, sys_, eq.point))
    boundary = None
    if sys_.n <= BOUNDARY_BOUND:
        boundary = []
        for beq in boundary_equilibria(sys_):
            d = beq.to_dict()
            d["stability"] = _safe(boundary_stability, sys_, beq)
            boundary.append(d)
    else:
        warnings.append(f"boundary equilibria skipped for n > {BOUNDARY_BOUND}")
    thresholds = {"rank_rtol": RANK_RTOL, "positive_tol": POSITIVE_TOL, "sign_rtol": SIGN_RTOL}
    doc = {
        "graph_profile": prof.to_dict(),
        "equilibrium_set": eq.to_dict(),
        "boundary_equilibria": boundary,
        "stability_reports": stability,
        "warnings": warnings,
    }
    if args.permanence:
        opts = _perm_options(args)
        doc["permanence_verdict"] = numeric_permanence_test(sys_, opts).to_dict()
        thresholds["permanence"] = asdict(opts)
    doc["provenance"] = {
        "input_sha256": sha256_text(text),
        "seed": args.seed,
        "tool_version": __version__,
        "thresholds": thresholds,
    }
    return doc


def _analysis_text(doc: dict) -> str:
    p = doc["graph_profile"]
    e = doc["equilibrium_set"]
    lines = [
        f"strongly connected: {p['strongly_connected']}",
        f"rooted: {p['is_rooted']}",
        f"spanning linear subgraph: {p['has_spanning_linear_subgraph']}",
        f"hamiltonian: {p['hamiltonian']}",
        f"cycle graph: {p['is_cycle_graph']}",
        f"positive equilibria: {e['classification']}",
    ]
    if "point" in e:
        lines.append("point: " + " ".join(f"{v:.12g}" for v in e["point"]))
    for s in doc["stability_reports"]:
        lines.append(f"stability: {s.get('classification', s.get('error'))}")
    if doc["boundary_equilibria"] is not None:
        lines.append(f"boundary equilibria: {len(doc['boundary_equilibria'])}")
    if "permanence_verdict" in doc:
        lines.append(f"permanence: {doc['permanence_verdict']['outcome']}")
    for w in doc["warnings"]:
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    text, sys_ = _read(args.file)
    doc = analysis_report(text, sys_, args)
    _emit(dumps(doc) if args.format == "json" else _analysis_text(doc), args.out)
    return 0


def _parse_x0(s: str | None, n: int, mode: Mode, normalize: bool) -> np.ndarray:
    if s is None:
        x0 = np.full(n, 1.0 / n) if mode is Mode.RELATIVE else np.ones(n)
    else:
        try:
            x0 = np.array([float(v) for v in s.replace(",", " ").split()])
        except ValueError:
            raise UsageError(f"--x0: not a list of numbers: {s!r}") from None
    if x0.shape != (n,):
        raise UsageError(f"--x0 has {x0.size} entries, network has {n} species")
    if mode is Mode.RELATIVE:
        if normalize and x0.sum() > 0:
            x0 = x0 / x0.sum()
        elif abs(x0.sum() - 1) > 1e-9:
            raise UsageError("--x0 must sum to 1 in relative mode (or pass --normalize)")
    return x0


def cmd_simulate(args) -> int:
    _, sys_ = _read(args.file)
    mode = Mode.ABSOLUTE if args.mode == "abs" else Mode.RELATIVE
    x0 = _parse_x0(args.x0, sys_.n, mode, args.normalize)
    opts = IntegratorOptions(rtol=args.rtol, atol=args.atol, method=args.method)
    traj = integrate(sys_, mode, x0, args.t_end, opts)
    side = traj.sidecar(opts)
    if args.out:
        traj.write(args.out, opts)
    if args.format == "json":
        sys.stdout.write(dumps(side) + "\n")
    else:
        sys.stdout.write(f"{side['termination']} at t = {side['t_final']:.15g}\n")
    return 0


def cmd_permanence(args) -> int:
    text, sys_ = _read(args.file)
    v = numeric_permanence_test(sys_, _perm_options(args))
    doc = v.to_dict()
    doc["provenance"] = {"input_sha256": sha256_text(text), "seed": args.seed, "tool_version": __version__}
    if args.format == "json":
        _emit(dumps(doc), args.out)
    else:
        est = doc["delta_estimate"]
        _emit(f"{doc['outcome']} (min coordinate {est}, trials {doc['trials']})", args.out)
    return 0


def cmd_gen(args) -> int:
    kind = args.type
    if kind in ("cycle", "hamiltonian-plus-chords", "random"):
        if args.n is None or args.n < 1:
            raise UsageError(f"--type {kind} needs --n >= 1")
    if kind == "cycle":
        sys_ = unit_rates(cycle(args.n))
    elif kind == "example-five":
        if args.k3 <= 0 or args.k5 <= 0:
            raise UsageError("--k3 and --k5 must be positive")
        sys_ = example_five(args.k3, args.k5)
    elif kind == "example-six":
        sys_ = example_six()
    else:
        rng = rng_from(args.seed)
        h = hamiltonian_plus_chords(args.n, rng) if kind == "hamiltonian-plus-chords" else random_hyperchain(args.n, rng)
        sys_ = with_rates(h, random_rates(h, rng))
    if args.format == "json":
        text = dumps_json(sys_)
    else:
        text = dumps_text(sys_, f"generated: --type {kind}" + (f" --n {args.n} --seed {args.seed}" if args.n else ""))
    _emit(text, args.out)
    return 0


def cmd_audit(args) -> int:
    if args.n_max < args.n_min:
        raise UsageError("--n-max must be at least --n-min")
    opts = PermanenceOptions(t_end=args.t_end)
    report = implication_audit(
        (args.n_min, args.n_max), args.samples, args.seed,
        perm=opts, include_example_six=not args.no_example_six,
        inject=args.inject_violation, threads=args.threads,
    )
    doc = report.to_dict()
    doc["provenance"] = {"seed": args.seed, "tool_version": __version__}
    dump_dir = args.dump_dir
    if dump_dir is None and args.out and report.violations:
        dump_dir = str(Path(args.out).with_suffix("")) + "-dumps"
    if dump_dir and report.violations:
        report.write_dumps(dump_dir)
        doc["dump_dir"] = dump_dir
    _emit(dumps(doc) if args.format == "json" else "\n".join(summary_lines(report)), args.out)
    return 0


def _perm_flags(p: argparse.ArgumentParser) -> None:
    d = PermanenceOptions()
    p.add_argument("--t-end", type=float, default=d.t_end, help="base horizon (default %(default)s)")
    p.add_argument("--trials", type=int, default=d.random_trials, help="random mixed starts")
    p.add_argument("--window", type=float, default=d.window, help="late-window fraction")
    p.add_argument("--offset", type=float, default=d.offset, help="inward offset of boundary starts")
    p.add_argument("--delta", type=float, default=d.delta)
    p.add_argument("--delta-fail", type=float, default=d.delta_fail)
    p.add_argument("--floor", type=float, default=d.floor)
    p.add_argument("--stall-tol", type=float, default=d.stall_tol)
    p.add_argument("--extensions", type=int, default=d.extensions, help="max horizon doublings")
    p.add_argument("--no-theorems", action="store_true", help="skip the theorem shortcuts")


def build_parser() -> argparse.ArgumentParser:
    shared = _Parser(add_help=False)
    shared.add_argument("--out", help="write output here instead of stdout")
    shared.add_argument("--seed", type=int, default=0)
    shared.add_argument("--threads", type=int, default=1, help="worker processes")
    shared.add_argument("--format", choices=("json", "text"), default=None)

    p = _Parser(prog="hyperchain", description="Analyse and simulate hyperchain networks.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", parents=[shared], help="graph, equilibria and stability report")
    a.add_argument("file")
    a.add_argument("--permanence", action="store_true", help="also run the permanence test")
    _perm_flags(a)
    a.set_defaults(func=cmd_analyze, default_format="json")

    s = sub.add_parser("simulate", parents=[shared], help="integrate the absolute or relative system")
    s.add_argument("file")
    s.add_argument("--mode", choices=("abs", "rel"), default="rel")
    s.add_argument("--x0", help="initial state, comma or space separated")
    s.add_argument("--t-end", type=float, default=100.0)
    s.add_argument("--normalize", action="store_true", help="rescale --x0 onto the simplex")
    s.add_argument("--rtol", type=float, default=IntegratorOptions.rtol)
    s.add_argument("--atol", type=float, default=IntegratorOptions.atol)
    s.add_argument("--method", choices=("dopri5", "rk4"), default="dopri5")
    s.set_defaults(func=cmd_simulate, default_format="json")

    m = sub.add_parser("permanence", parents=[shared], help="numeric permanence verdict")
    m.add_argument("file")
    _perm_flags(m)
    m.set_defaults(func=cmd_permanence, default_format="json")

    g = sub.add_parser("gen", parents=[shared], help="write a network file")
    g.add_argument("--type", choices=GEN_TYPES, required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--k3", type=float, default=0.5)
    g.add_argument("--k5", type=float, default=2.0)
    g.set_defaults(func=cmd_gen, default_format="text")

    u = sub.add_parser("audit", parents=[shared], help="randomised implication audit")
    u.add_argument("--n-min", type=int, default=2)
    u.add_argument("--n-max", type=int, default=5)
    u.add_argument("--samples", type=int, default=200)
    u.add_argument("--t-end", type=float, default=PermanenceOptions.t_end)
    u.add_argument("--dump-dir", help="directory for violation dumps")
    u.add_argument("--no-example-six", action="store_true", help="do not add Example six to the samples")
    u.add_argument("--inject-violation", choices=CHECKS, help=argparse.SUPPRESS)
    u.set_defaults(func=cmd_audit, default_format="json")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.format is None:
            args.format = args.default_format
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        return args.func(args)
    except UsageError as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"error: parse: {exc}", file=sys.stderr)
        return 2
    except (HyperchainError, TooLarge, ValueError) as exc:
        print(f"error: input: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: internal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
