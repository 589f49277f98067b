"""Acceptance criteria 1-10, each checked at its stated tolerance and time limit.

Run alone with ``pytest tests/test_acceptance.py -v``; a summary with one
PASS/FAIL line per criterion is printed at the end of the session.
"""

import contextlib
import itertools
import json
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, brute_covers, fd_jacobian, random_edges
from hyperchain import (
    Kind,
    Outcome,
    PermanenceOptions,
    Stability,
    Termination,
    boundary_equilibria,
    boundary_stability,
    construct_existence_rates,
    construct_uniqueness_rates,
    cycle_system,
    equilibrium_eigenvalues,
    example_five,
    find_hamiltonian_cycle,
    classify_positive_stability,
    hamiltonian_permanence_rates,
    hamiltonian_plus_chords,
    has_spanning_linear_subgraph,
    integrate,
    is_acyclic,
    is_rooted,
    is_strongly_connected,
    jacobian,
    load,
    new_hyperchain,
    nonpermanence_construction,
    numeric_permanence_test,
    positive_equilibria,
    random_dag,
    random_hyperchain,
    random_rates,
    with_rates,
)
from hyperchain._field import equilibrium_residual, replicator_field
from hyperchain.cli import main
from hyperchain.graph import HyperchainSystem
from hyperchain.permanence import Inapplicable
from hyperchain.stability import sort_spectrum


@contextlib.contextmanager
def criterion(k, limit, what):
    t0 = time.perf_counter()
    notes = []
    try:
        yield notes
    except BaseException as exc:
        dt = time.perf_counter() - t0
        ACCEPTANCE_LINES.append(f"FAIL criterion {k}: {what} ({dt:.1f}s; {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})")
        raise
    dt = time.perf_counter() - t0
    extra = f"; {'; '.join(notes)}" if notes else ""
    if dt >= limit:
        ACCEPTANCE_LINES.append(f"FAIL criterion {k}: {what} (took {dt:.1f}s, limit {limit}s{extra})")
        pytest.fail(f"criterion {k} took {dt:.1f}s, limit {limit}s")
    ACCEPTANCE_LINES.append(f"PASS criterion {k}: {what} ({dt:.1f}s{extra})")


def test_criterion_1_five_species_example():
    with criterion(1, 1.0, "five-species equilibria, continuum, empty case and determinant"):
        for k3, k5 in [(0.5, 2), (2, 0.5), (0.9, 1.1)]:
            s = example_five(k3, k5)
            eq = positive_equilibria(s)
            want = np.array([1, 1, (k5 - 1) / (k5 - k3), 1, (1 - k3) / (k5 - k3)])
            assert eq.kind is Kind.UNIQUE
            assert np.abs(eq.point - want / want.sum()).max() <= 1e-10
            assert abs(np.linalg.det(s.K) - (k3 - k5)) <= 1e-12
        s = example_five(1, 1)
        eq = positive_equilibria(s)
        assert eq.kind is Kind.CONTINUUM and eq.dimension == 1
        d = eq.basis[:, 0]
        lo, hi = eq.interval
        for b in (0.0, 0.125, 0.25):
            x = np.array([0.25, 0.25, b, 0.25, 0.25 - b])
            assert equilibrium_residual(s.K, x) <= 1e-12
            t = (x - eq.point) @ d
            assert np.abs(eq.point + t * d - x).max() <= 1e-12
            assert lo - 1e-12 <= t <= hi + 1e-12
        ends = sorted((eq.point + lo * d)[2:3].tolist() + (eq.point + hi * d)[2:3].tolist())
        assert np.allclose(ends, [0, 0.25], atol=1e-12)
        assert abs(np.linalg.det(s.K)) <= 1e-12
        s = example_five(2, 2)
        assert positive_equilibria(s).kind is Kind.EMPTY
        assert abs(np.linalg.det(s.K)) <= 1e-12


def test_criterion_2_hypercycle_ladder():
    expected = {2: Stability.LINEARLY_STABLE, 3: Stability.LINEARLY_STABLE, 4: Stability.MARGINAL,
                5: Stability.UNSTABLE, 6: Stability.UNSTABLE}
    with criterion(2, 1.0, "hypercycle stability ladder n = 2..6 against the circulant spectrum"):
        for n, want in expected.items():
            z = np.full(n, 1 / n)
            r = classify_positive_stability(cycle_system(n), z)
            assert r.classification is want, (n, r.classification)
            oracle = np.concatenate([[-1 / n], np.exp(2j * np.pi * np.arange(1, n) / n) / n])
            eigs, _ = equilibrium_eigenvalues(cycle_system(n), z)
            assert np.abs(sort_spectrum(eigs) - sort_spectrum(oracle)).max() <= 1e-10


def test_criterion_3_hypercycle_permanence():
    rng = np.random.default_rng(3)
    with criterion(3, 120.0, "hypercycles n = 2..6 LikelyPermanent for unit and 10 random rate sets") as notes:
        worst = np.inf
        for n in range(2, 7):
            rate_sets = [np.ones(n)] + [np.exp(rng.uniform(np.log(0.1), np.log(10), n)) for _ in range(10)]
            for rates in rate_sets:
                v = numeric_permanence_test(cycle_system(n, rates))
                assert v.outcome is Outcome.LIKELY_PERMANENT, (n, rates.tolist(), v.to_dict())
                worst = min(worst, v.delta_estimate)
        notes.append(f"55 systems, smallest late-window minimum {worst:.2e}")


def test_criterion_4_example_six(tmp_path):
    with criterion(4, 30.0, "Example six from the generator: strongly connected, not Hamiltonian, LikelyPermanent") as notes:
        path = tmp_path / "six.hyperchain"
        assert main(["gen", "--type", "example-six", "--out", str(path)]) == 0
        s = load(path)
        assert is_strongly_connected(s.graph)
        assert find_hamiltonian_cycle(s.graph) is None
        v = numeric_permanence_test(s)
        assert v.outcome is Outcome.LIKELY_PERMANENT, v.to_dict()
        notes.append(f"min coordinate {v.delta_estimate:.2e} at horizon {v.horizon:g}")


def test_criterion_5_blow_up_dichotomy():
    with criterion(5, 120.0, "self-loop blow-up time and BlowUp <=> cyclic on 100 random systems") as notes:
        loop = HyperchainSystem.from_edges(1, [(1, 1, 1.0)])
        tr = integrate(loop, "abs", [1.0], 10.0)
        assert tr.termination is Termination.BLOW_UP
        assert abs(tr.time_estimate - 1.0) <= 0.05
        rng = np.random.default_rng(5)
        wrong, out_of_range = [], 0
        for k in range(100):
            if k % 2:
                n = int(rng.integers(2, 6))
                h = random_dag(n, rng)
            else:
                n = int(rng.integers(1, 6))
                h = random_hyperchain(n, rng)
            s = with_rates(h, random_rates(h, rng))
            tr = integrate(s, "abs", rng.uniform(0.5, 2.0, n), 30.0)
            blew = tr.termination is Termination.BLOW_UP
            out_of_range += tr.termination is Termination.STEP_FAILURE
            if blew == is_acyclic(h):
                wrong.append((k, h.edges, tr.termination.value))
        assert not wrong, wrong
        notes.append(f"0 exceptions; {out_of_range} acyclic runs left the double range (StepFailure)")


def _unique_systems(rng, count):
    out = []
    while len(out) < count:
        n = int(rng.integers(2, 7))
        h = new_hyperchain(n, random_edges(rng, n, p=0.45))
        if not has_spanning_linear_subgraph(h):
            continue
        s = with_rates(h, random_rates(h, rng))
        eq = positive_equilibria(s)
        if eq.kind is Kind.UNIQUE:
            out.append((s, eq.point))
    return out


def test_criterion_6_jacobian_identities():
    rng = np.random.default_rng(6)
    with criterion(6, 60.0, "Jacobian and eigenvalue identities on 200 systems with a unique equilibrium"):
        for s, z in _unique_systems(rng, 200):
            K = s.K
            J = jacobian(s, z)
            assert np.abs(J - fd_jacobian(lambda x: replicator_field(K, x), z)).max() <= 1e-5
            lam1 = z @ K @ z
            assert np.abs(J @ z + lam1 * z).max() <= 1e-8
            want = -np.linalg.det(K) * np.prod(z)
            assert abs(np.linalg.det(J) - want) <= 1e-8 * abs(want)
            eigs, _ = equilibrium_eigenvalues(s, z)
            direct = np.linalg.eigvals(J)
            assert np.abs(sort_spectrum(eigs) - sort_spectrum(direct)).max() <= 1e-6


def test_criterion_7_boundary_spectrum():
    rng = np.random.default_rng(7)
    with criterion(7, 60.0, "boundary spectrum = transverse part + face spectrum on 50 systems") as notes:
        systems = faces = 0
        while systems < 50:
            n = int(rng.integers(2, 6))
            h = new_hyperchain(n, random_edges(rng, n, p=0.5))
            s = with_rates(h, random_rates(h, rng))
            beqs = [b for b in boundary_equilibria(s) if not b.continuum]
            if not beqs:
                continue
            systems += 1
            for b in beqs:
                r = boundary_stability(s, b)
                direct = np.linalg.eigvals(jacobian(s, b.point))
                assert np.abs(sort_spectrum(r.eigenvalues) - sort_spectrum(direct)).max() <= 1e-8, (h.edges, b.face)
                faces += 1
        notes.append(f"{faces} boundary equilibria")


def test_criterion_8_constructive_theorems():
    rng = np.random.default_rng(8)
    with criterion(8, 600.0, "existence, uniqueness, non-permanence and Hamiltonian certificates") as notes:
        done = 0
        while done < 200:
            n = int(rng.integers(1, 8))
            h = new_hyperchain(n, random_edges(rng, n, p=float(rng.uniform(0.1, 0.5))))
            if is_rooted(h):
                continue
            K = construct_existence_rates(h)
            assert equilibrium_residual(K, np.full(n, 1 / n)) <= 1e-12
            done += 1
        done = 0
        while done < 200:
            n = int(rng.integers(1, 8))
            h = new_hyperchain(n, random_edges(rng, n, p=float(rng.uniform(0.1, 0.5))))
            if not has_spanning_linear_subgraph(h):
                continue
            assert positive_equilibria(with_rates(h, construct_uniqueness_rates(h))).kind is Kind.UNIQUE
            done += 1
        done, verdicts = 0, {}
        numerics_only = PermanenceOptions(use_theorems=False)
        while done < 50:
            n = int(rng.integers(2, 7))
            h = new_hyperchain(n, random_edges(rng, n, p=0.45))
            try:
                con = nonpermanence_construction(h)
            except Inapplicable:
                continue
            lhs = con.rates_at_zero.T @ con.z
            assert np.abs(lhs - (1 / (n - 2) if n > 2 else 1.0)).max() <= 1e-10
            assert con.z[con.c - 1] < 0
            v = numeric_permanence_test(with_rates(h, con.rates), numerics_only)
            if v.outcome is Outcome.INCONCLUSIVE:
                # inconclusive only counts when some start is still decaying
                assert v.trial_drops is not None and np.any(v.trial_drops > numerics_only.stall_tol)
            else:
                assert v.outcome is Outcome.NOT_PERMANENT, v.to_dict()
            verdicts[v.outcome.value] = verdicts.get(v.outcome.value, 0) + 1
            done += 1
        done = 0
        while done < 50:
            n = int(rng.integers(2, 7))
            h = hamiltonian_plus_chords(n, rng)
            v = numeric_permanence_test(with_rates(h, hamiltonian_permanence_rates(h)))
            assert v.outcome is Outcome.LIKELY_PERMANENT, (h.edges, v.to_dict())
            done += 1
        notes.append("non-permanence verdicts " + json.dumps(verdicts, sort_keys=True))


def test_criterion_9_audit(tmp_path, capsys):
    with criterion(9, 900.0, "audit --n-max 5 --samples 200 --seed 1 has zero violations") as notes:
        out = tmp_path / "audit.json"
        assert main(["audit", "--n-max", "5", "--samples", "200", "--seed", "1", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["violations"] == []
        assert all(doc["checks"][k]["fail"] == 0 for k in "abcdefghi")
        inconclusive = sum(doc["checks"][k]["inconclusive"] for k in "abcdefghi")
        notes.append(f"{doc['evaluated']} samples, {inconclusive} inconclusive numeric checks")


def test_criterion_10_cover_oracle():
    rng = np.random.default_rng(10)
    with criterion(10, 120.0, "matching decision = permutation brute force (500 random, all n = 3)") as notes:
        for _ in range(500):
            n = int(rng.integers(1, 8))
            edges = random_edges(rng, n, p=float(rng.uniform(0.1, 0.6)))
            assert has_spanning_linear_subgraph(new_hyperchain(n, edges)) == bool(brute_covers(n, edges))
        pairs = [(i, j) for i in range(1, 4) for j in range(1, 4)]
        count = 0
        for mask in range(1, 1 << 9):
            edges = [pairs[k] for k in range(9) if mask >> k & 1]
            if len({v for e in edges for v in e}) < 3:
                continue
            assert has_spanning_linear_subgraph(new_hyperchain(3, edges)) == bool(brute_covers(3, edges))
            count += 1
        notes.append(f"{count} three-vertex digraphs")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
