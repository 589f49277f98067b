import numpy as np
import pytest

from conftest import random_edges
from hyperchain import (
    Inapplicable,
    NotHamiltonian,
    Outcome,
    PermanenceOptions,
    cycle,
    cycle_system,
    example_five,
    example_six,
    hamiltonian_permanence_rates,
    is_strongly_connected,
    new_hyperchain,
    nonpermanence_construction,
    nonpermanence_rates,
    numeric_permanence_test,
    positive_equilibria,
    psi_average,
    random_hyperchain,
    random_rates,
    unit_rates,
    with_rates,
)
from hyperchain.permanence import battery

THREE_PLUS_CHORD = new_hyperchain(3, [(1, 2), (2, 3), (3, 1), (1, 3)])
FOUR_PLUS_CHORD = new_hyperchain(4, [(1, 2), (2, 3), (3, 4), (4, 1), (1, 3)])


@pytest.mark.parametrize("n", [3, 5])
def test_hypercycles_are_likely_permanent(n):
    v = numeric_permanence_test(cycle_system(n))
    assert v.outcome is Outcome.LIKELY_PERMANENT
    assert v.delta_estimate > 1e-6 and v.trials > 0
    assert v.witness is None


def test_rooted_chain_has_theorem_witness():
    v = numeric_permanence_test(unit_rates(new_hyperchain(3, [(1, 2), (2, 3)])))
    assert v.outcome is Outcome.NOT_PERMANENT
    assert v.witness["kind"] == "not strongly connected"
    v = numeric_permanence_test(example_five(2, 2))
    assert v.outcome is Outcome.NOT_PERMANENT
    assert v.witness["kind"] == "no positive equilibrium"
    assert v.witness["equilibria"]["classification"] == "Empty"


def test_continuum_is_not_permanent():
    v = numeric_permanence_test(example_five(1, 1))
    assert v.outcome is Outcome.NOT_PERMANENT
    assert v.witness["kind"] == "equilibrium continuum reaches the boundary"


def test_disconnected_components_in_witness():
    h = new_hyperchain(4, [(1, 2), (2, 1), (3, 4), (4, 3), (2, 3)])
    v = numeric_permanence_test(unit_rates(h))
    assert v.witness["components"] == [[1, 2], [3, 4]]
    assert v.to_dict()["outcome"] == "NotPermanent"


def test_battery_is_deterministic_and_near_boundary():
    s = cycle_system(5)
    a, b = battery(s), battery(s)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(a.sum(axis=1), 1)
    assert a.min() > 0
    # every face of dimension <= 2 or codimension <= 2 has a start
    assert len(a) >= 5 + 10 + 10 + 5
    assert np.sum(np.isclose(a, 1e-3).sum(axis=1) == 4) >= 5
    other = battery(s, PermanenceOptions(seed=1))
    assert not np.array_equal(a, other)
    np.testing.assert_array_equal(battery(unit_rates(new_hyperchain(1, [(1, 1)]))), [[1.0]])


def test_options_validate():
    with pytest.raises(ValueError):
        PermanenceOptions(window=0.7)
    with pytest.raises(ValueError):
        PermanenceOptions(t_end=0)


def test_hamiltonian_rates_examples():
    np.testing.assert_array_equal(hamiltonian_permanence_rates(cycle(5)), cycle(5).adjacency)
    K = hamiltonian_permanence_rates(FOUR_PLUS_CHORD)
    assert K[0, 2] == 1 / 16
    assert all(K[i - 1, i % 4] == 1 for i in range(1, 5))
    with pytest.raises(NotHamiltonian):
        hamiltonian_permanence_rates(example_six().graph)


def test_nonpermanence_three_cycle_plus_chord():
    con = nonpermanence_construction(THREE_PLUS_CHORD)
    assert con.cover == ((1, 2), (2, 3), (3, 1))
    assert con.edge == (1, 3) and con.c == 2
    np.testing.assert_array_equal(con.z, [1, -1, 1])
    np.testing.assert_allclose(con.rates_at_zero.T @ con.z, 1, atol=1e-10)
    assert con.rates[0, 2] == 2 and con.rates[0, 1] == 1


def test_nonpermanence_four_cycle_plus_chord():
    rates, z = nonpermanence_rates(FOUR_PLUS_CHORD)
    assert (z < 0).sum() == 1
    np.testing.assert_allclose(sorted(z), [-0.5, 0.5, 0.5, 0.5])


def test_nonpermanence_preconditions():
    with pytest.raises(Inapplicable):
        nonpermanence_rates(cycle(4))
    with pytest.raises(Inapplicable):
        nonpermanence_rates(new_hyperchain(3, [(1, 2), (2, 3), (3, 2)]))
    with pytest.raises(Inapplicable):
        # strongly connected, no cycle cover: two triangles through X1
        nonpermanence_rates(new_hyperchain(5, [(1, 2), (2, 3), (3, 1), (1, 4), (4, 5), (5, 1)]))
    with pytest.raises(ValueError):
        nonpermanence_rates(THREE_PLUS_CHORD, 0.0)


def test_nonpermanence_identities_on_random_graphs(rng):
    done = 0
    while done < 30:
        n = int(rng.integers(2, 7))
        h = new_hyperchain(n, random_edges(rng, n, p=0.5))
        try:
            con = nonpermanence_construction(h)
        except Inapplicable:
            continue
        done += 1
        K0 = con.rates_at_zero
        lhs = K0.T @ con.z
        target = 1.0 / (n - 2) if n > 2 else 1.0
        assert np.abs(lhs - target).max() <= 1e-10
        assert con.z[con.c - 1] < 0 and np.sum(con.z < 0) == 1
        assert positive_equilibria(with_rates(h, con.rates)).kind.value == "Empty"


def test_constructed_system_fails_numerically_too():
    rates, _ = nonpermanence_rates(THREE_PLUS_CHORD)
    v = numeric_permanence_test(with_rates(THREE_PLUS_CHORD, rates), PermanenceOptions(use_theorems=False))
    assert v.outcome is Outcome.NOT_PERMANENT
    assert v.witness["kind"] == "trajectory"
    assert v.witness["late_window_min"] < 1e-8 and v.witness["log_drop"] > 0


def test_theorem_shortcuts_agree_with_numerics(rng):
    checked = 0
    while checked < 20:
        n = int(rng.integers(2, 5))
        h = random_hyperchain(n, rng)
        s = with_rates(h, random_rates(h, rng))
        v = numeric_permanence_test(s)
        if v.outcome is not Outcome.NOT_PERMANENT or v.witness["kind"] == "trajectory":
            continue
        checked += 1
        w = numeric_permanence_test(s, PermanenceOptions(use_theorems=False))
        # slow algebraic decay may stay above delta for the whole horizon, but it never settles
        assert w.outcome is not Outcome.LIKELY_PERMANENT


def test_psi_average_examples():
    s = cycle_system(3)
    assert psi_average(s, [0.5, 0.5, 0.0], 100.0) > 0
    assert abs(psi_average(s, np.full(3, 1 / 3), 50.0)) <= 1e-10
    s5 = cycle_system(5, [1, 2, 3, 1, 0.5])
    z = positive_equilibria(s5).point
    assert abs(psi_average(s5, z, 50.0)) <= 1e-10
    rates, _ = nonpermanence_rates(THREE_PLUS_CHORD)
    bad = with_rates(THREE_PLUS_CHORD, rates)
    starts = [[0.5, 0, 0.5], [0.5, 0.5, 0], [0, 0.5, 0.5], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert min(psi_average(bad, x, 100.0) for x in starts) <= 0
    with pytest.raises(ValueError):
        psi_average(s, [0.5, 0.5, 0.5], 1.0)


def test_verdict_serialization():
    d = numeric_permanence_test(cycle_system(2)).to_dict()
    assert d["outcome"] == "LikelyPermanent"
    assert d["parameters"]["delta"] == 1e-4 and d["parameters"]["t_end"] == 500.0
    assert d["horizon"] >= 500 and "witness" not in d
