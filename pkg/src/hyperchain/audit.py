"""Randomised audit of the graph-to-dynamics implications.

Each sample is a random network with log-uniform rates. Every implication
whose premise and conclusion can be decided (or tested numerically) is
checked on it. A check either passes, fails (a violation), holds vacuously
(premise false), or is inconclusive (numeric permanence could not decide).
Violations carry everything needed to rerun them: the network file and the
sample's own seed.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ._field import equilibrium_residual
from .analysis import GraphProfile, profile
from .equilibria import (
    Kind,
    RootedGraph,
    construct_existence_rates,
    construct_uniqueness_rates,
    positive_equilibria,
)
from .generate import (
    cycle,
    example_six,
    hamiltonian_plus_chords,
    random_hyperchain,
    random_rates,
)
from .graph import HyperchainSystem, with_rates
from .io import dumps_text
from .permanence import (
    Outcome,
    PermanenceOptions,
    hamiltonian_permanence_rates,
    numeric_permanence_test,
)
from .stability import Stability, classify_positive_stability, property_P

CHECKS = ("a", "b", "c", "d", "e", "f", "g", "h", "i")
SOFT_CHECKS = ("persistence",)
EXTRA_RATE_SETS = 2
UNIQUENESS_EPSILON = 1e-3
EXISTENCE_TOL = 1e-12

DESCRIPTIONS = {
    "a": "cycle graph => numeric permanence LikelyPermanent",
    "b": "Hamiltonian => certificate rates give LikelyPermanent",
    "c": "LikelyPermanent (numerics only) => strongly connected and a positive equilibrium exists",
    "d": "unrooted <=> existence rates give a residual-verified positive equilibrium; rooted => Empty",
    "e": "spanning linear subgraph <=> some sampled or constructed K gives Unique",
    "f": "LinearlyStable <=> property P",
    "g": "LinearlyStable => Unique; Unique => spanning linear subgraph",
    "h": "Hamiltonian => spanning linear subgraph and strongly connected",
    "i": "all spanning linear subgraphs of one parity => never Continuum",
    "persistence": "not strongly connected => numerics do not report LikelyPermanent (soft)",
}

PASS, FAIL, VACUOUS, INCONCLUSIVE = "pass", "fail", "vacuous", "inconclusive"


@dataclass
class CheckResult:
    status: str
    evidence: dict = field(default_factory=dict)


@dataclass
class SampleResult:
    index: int
    seed: int | None
    label: str
    system: HyperchainSystem
    checks: dict[str, CheckResult]


def _rate_sets(sys: HyperchainSystem, rng) -> list[np.ndarray]:
    return [sys.K] + [random_rates(sys.graph, rng) for _ in range(EXTRA_RATE_SETS)]


def audit_system(
    sys: HyperchainSystem,
    seed: int | None = 0,
    perm: PermanenceOptions | None = None,
    inject: str | None = None,
) -> dict[str, CheckResult]:
    """Run every check on one system. ``seed`` drives the extra rate sets.

    ``inject`` names a check whose outcome gets inverted; it only exists to
    exercise the violation reporting path.
    """
    perm = perm or PermanenceOptions()
    h = sys.graph
    rng = np.random.default_rng(seed)
    prof: GraphProfile = profile(h)
    ham = bool(prof.hamiltonian)
    rate_sets = _rate_sets(sys, rng)
    eqs = [positive_equilibria(with_rates(h, K)) for K in rate_sets]
    out: dict[str, CheckResult] = {}

    numeric = numeric_permanence_test(sys, _replace(perm, use_theorems=False))
    likely = numeric.outcome is Outcome.LIKELY_PERMANENT

    # (a)
    if prof.is_cycle_graph:
        out["a"] = _from_outcome(numeric.outcome, {"verdict": numeric.to_dict()})
    else:
        out["a"] = CheckResult(VACUOUS)

    # (b)
    if ham:
        cert = with_rates(h, hamiltonian_permanence_rates(h))
        v = numeric_permanence_test(cert, perm)
        out["b"] = _from_outcome(v.outcome, {"verdict": v.to_dict()})
    else:
        out["b"] = CheckResult(VACUOUS)

    # (c) and the soft persistence footprint, both from the theorem-free numerics
    has_eq = eqs[0].kind is not Kind.EMPTY
    if likely:
        ok = prof.strongly_connected and has_eq
        out["c"] = CheckResult(PASS if ok else FAIL, {
            "strongly_connected": prof.strongly_connected,
            "equilibria": eqs[0].kind.value,
            "verdict": numeric.to_dict(),
        })
    else:
        out["c"] = CheckResult(VACUOUS, {"outcome": numeric.outcome.value})
    if not prof.strongly_connected:
        out["persistence"] = CheckResult(
            FAIL if likely else PASS, {"outcome": numeric.outcome.value}
        )
    else:
        out["persistence"] = CheckResult(VACUOUS)

    # (d)
    if not prof.is_rooted:
        try:
            K = construct_existence_rates(h)
            resid = equilibrium_residual(K, np.full(h.n, 1.0 / h.n))
            kind = positive_equilibria(with_rates(h, K)).kind
            ok = resid <= EXISTENCE_TOL and kind is not Kind.EMPTY
            out["d"] = CheckResult(PASS if ok else FAIL, {"residual": resid, "equilibria": kind.value})
        except (RootedGraph, AssertionError) as exc:
            out["d"] = CheckResult(FAIL, {"error": repr(exc)})
    else:
        kinds = [e.kind.value for e in eqs]
        try:
            construct_existence_rates(h)
            constructed = True
        except RootedGraph:
            constructed = False
        ok = all(k == Kind.EMPTY.value for k in kinds) and not constructed
        out["d"] = CheckResult(PASS if ok else FAIL, {"equilibria": kinds, "constructed": constructed})

    # (e)
    uniq_kind = None
    if prof.has_spanning_linear_subgraph:
        uniq_kind = positive_equilibria(with_rates(h, construct_uniqueness_rates(h, UNIQUENESS_EPSILON))).kind
        ok = uniq_kind is Kind.UNIQUE or any(e.kind is Kind.UNIQUE for e in eqs)
        out["e"] = CheckResult(PASS if ok else FAIL, {"constructed": uniq_kind.value})
    else:
        kinds = [e.kind.value for e in eqs]
        out["e"] = CheckResult(PASS if Kind.UNIQUE.value not in kinds else FAIL, {"equilibria": kinds})

    # (f) and (g) on every sampled rate set
    f_status, g_status = PASS, PASS
    f_ev, g_ev = [], []
    for K, eq in zip(rate_sets, eqs):
        s = with_rates(h, K)
        P = property_P(K)
        cls = None
        if eq.kind is not Kind.EMPTY:
            cls = classify_positive_stability(s, eq.point).classification
        stable = cls is Stability.LINEARLY_STABLE
        if stable != all(P):
            f_status = FAIL
        if stable and eq.kind is not Kind.UNIQUE:
            g_status = FAIL
        if eq.kind is Kind.UNIQUE and not prof.has_spanning_linear_subgraph:
            g_status = FAIL
        f_ev.append({"classification": None if cls is None else cls.value, "property_P": list(P)})
        g_ev.append({"classification": None if cls is None else cls.value, "equilibria": eq.kind.value})
    out["f"] = CheckResult(f_status, {"rate_sets": f_ev})
    out["g"] = CheckResult(g_status, {"rate_sets": g_ev, "spanning_linear_subgraph": prof.has_spanning_linear_subgraph})

    # (h)
    if ham:
        ok = prof.has_spanning_linear_subgraph and prof.strongly_connected
        out["h"] = CheckResult(PASS if ok else FAIL)
    else:
        out["h"] = CheckResult(VACUOUS)

    # (i)
    if prof.has_spanning_linear_subgraph and prof.same_parity:
        kinds = [e.kind.value for e in eqs] + ([uniq_kind.value] if uniq_kind else [])
        out["i"] = CheckResult(PASS if Kind.CONTINUUM.value not in kinds else FAIL, {"equilibria": kinds})
    else:
        out["i"] = CheckResult(VACUOUS)

    if inject is not None:
        r = out[inject]
        r.status = FAIL if r.status in (PASS, VACUOUS) else PASS
        r.evidence["injected"] = True
    return out


def _replace(opts: PermanenceOptions, **kw) -> PermanenceOptions:
    d = asdict(opts)
    d.update(kw)
    return PermanenceOptions(**d)


def _from_outcome(outcome: Outcome, evidence: dict) -> CheckResult:
    if outcome is Outcome.LIKELY_PERMANENT:
        return CheckResult(PASS, evidence)
    if outcome is Outcome.INCONCLUSIVE:
        return CheckResult(INCONCLUSIVE, evidence)
    return CheckResult(FAIL, evidence)


def draw_sample(n_range: tuple[int, int], seed: int) -> tuple[str, HyperchainSystem]:
    """One random network: 10% hypercycles, 20% Hamiltonian plus chords, 70% random."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    u = rng.random()
    if u < 0.1:
        label, h = "cycle", cycle(n)
    elif u < 0.3:
        label, h = "hamiltonian-plus-chords", hamiltonian_plus_chords(n, rng)
    else:
        label, h = "random", random_hyperchain(n, rng)
    return label, with_rates(h, random_rates(h, rng))


def _run_sample(args) -> SampleResult:
    index, seed, n_range, perm, inject, label, sys = args
    if sys is None:
        label, sys = draw_sample(n_range, seed)
    return SampleResult(index, seed, label, sys, audit_system(sys, seed, perm, inject))


@dataclass
class AuditReport:
    seed: int
    n_range: tuple[int, int]
    samples: int
    options: PermanenceOptions
    results: list[SampleResult] = field(repr=False)

    def counts(self, check: str) -> dict[str, int]:
        c = {PASS: 0, FAIL: 0, VACUOUS: 0, INCONCLUSIVE: 0}
        for r in self.results:
            c[r.checks[check].status] += 1
        return c

    @property
    def violations(self) -> list[tuple[SampleResult, str]]:
        return [(r, k) for r in self.results for k in CHECKS if r.checks[k].status == FAIL]

    @property
    def soft_failures(self) -> list[tuple[SampleResult, str]]:
        return [(r, k) for r in self.results for k in SOFT_CHECKS if r.checks[k].status == FAIL]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_range": list(self.n_range),
            "samples": self.samples,
            "evaluated": len(self.results),
            "thresholds": asdict(self.options),
            "uniqueness_epsilon": UNIQUENESS_EPSILON,
            "checks": {k: {"description": DESCRIPTIONS[k], **self.counts(k)} for k in CHECKS},
            "soft_checks": {k: {"description": DESCRIPTIONS[k], **self.counts(k)} for k in SOFT_CHECKS},
            "violations": [self._entry(r, k, i) for i, (r, k) in enumerate(self.violations)],
            "soft_failures": [self._entry(r, k, None) for r, k in self.soft_failures],
        }

    @staticmethod
    def _entry(r: SampleResult, check: str, i: int | None) -> dict:
        d = {
            "check": check,
            "sample": r.index,
            "sample_seed": r.seed,
            "label": r.label,
            "n": r.system.n,
            "edges": [[t, h, k] for t, h, k in r.system.rated_edges()],
            "evidence": r.checks[check].evidence,
        }
        if i is not None:
            d["file"] = _dump_name(i, r, check)
        return d

    def write_dumps(self, directory: str) -> list[str]:
        """One HYPERCHAIN v1 file per violation plus ``manifest.json``."""
        os.makedirs(directory, exist_ok=True)
        paths = []
        for i, (r, k) in enumerate(self.violations):
            name = _dump_name(i, r, k)
            comment = f"audit violation of check ({k}): {DESCRIPTIONS[k]}\nsample {r.index}, sample seed {r.seed}"
            with open(os.path.join(directory, name), "w") as fh:
                fh.write(dumps_text(r.system, comment))
            paths.append(name)
        from .report import dumps

        manifest = {
            "seed": self.seed,
            "n_range": list(self.n_range),
            "thresholds": asdict(self.options),
            "uniqueness_epsilon": UNIQUENESS_EPSILON,
            "extra_rate_sets": EXTRA_RATE_SETS,
            "violations": [self._entry(r, k, i) for i, (r, k) in enumerate(self.violations)],
        }
        with open(os.path.join(directory, "manifest.json"), "w") as fh:
            fh.write(dumps(manifest) + "\n")
        return paths


def _dump_name(i: int, r: SampleResult, check: str) -> str:
    return f"violation-{i:03d}-check-{check}-sample-{r.index}.hyperchain"


def implication_audit(
    n_range: tuple[int, int] = (2, 5),
    samples: int = 200,
    seed: int = 0,
    *,
    perm: PermanenceOptions | None = None,
    include_example_six: bool = True,
    inject: str | None = None,
    threads: int = 1,
) -> AuditReport:
    """Check every implication on ``samples`` random systems (plus Example six).

    Sample seeds come from one ``SeedSequence(seed)``, so a single sample can
    be regenerated with :func:`draw_sample` and rerun with :func:`audit_system`.
    With ``inject`` set, the named check is inverted on the first sample only.
    """
    lo, hi = n_range
    if not 1 <= lo <= hi:
        raise ValueError("n_range must satisfy 1 <= lo <= hi")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if inject is not None and inject not in CHECKS:
        raise ValueError(f"unknown check {inject!r}")
    perm = perm or PermanenceOptions()
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(samples)]
    jobs = [(i, s, (lo, hi), perm, inject if i == 0 else None, None, None) for i, s in enumerate(seeds)]
    if include_example_six:
        jobs.append((samples, seeds[0], (lo, hi), perm, None, "example-six", example_six()))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(_run_sample, jobs))
    else:
        results = [_run_sample(j) for j in jobs]
    return AuditReport(seed, (lo, hi), samples, perm, results)


def report_json(report: AuditReport) -> str:
    from .report import dumps

    return dumps(report.to_dict())


def summary_lines(report: AuditReport) -> list[str]:
    lines = []
    for k in CHECKS + SOFT_CHECKS:
        c = report.counts(k)
        lines.append(
            f"({k}) pass {c[PASS]} fail {c[FAIL]} vacuous {c[VACUOUS]} inconclusive {c[INCONCLUSIVE]}  {DESCRIPTIONS[k]}"
        )
    lines.append(f"violations: {len(report.violations)}")
    return lines

