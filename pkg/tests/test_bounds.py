import math
from fractions import Fraction

import numpy as np
import pytest

from packbound import (
    CertificateError,
    Graph,
    alpha_exact,
    assemble_lasserre,
    enumerate_independent_sets,
    generate_complete,
    generate_cycle,
    generate_empty,
    generate_random,
    indicator_solution,
    las_bound,
    lift_theta_prime_solution,
    moebius_recover_measure,
    moment_matrix,
    theta,
    theta_prime,
    three_point_bound,
    verify_dual_certificate,
)

from conftest import all_independent_sets

SQRT5 = math.sqrt(5.0)


def cycle_theta(n):
    """Closed form for odd cycles: n cos(pi/n) / (1 + cos(pi/n))."""
    c = math.cos(math.pi / n)
    return n * c / (1 + c)


def test_level1_c5_is_sqrt5():
    res = las_bound(generate_cycle(5), 1)
    assert res.status == "optimal"
    assert res.value == pytest.approx(SQRT5, abs=1e-6)
    assert res.verification.ok


def test_theta_prime_c5_is_sqrt5():
    res = theta_prime(generate_cycle(5))
    assert res.value == pytest.approx(SQRT5, abs=1e-6)


def test_theta_closed_form_odd_cycles():
    for n in (5, 7, 9):
        assert theta(generate_cycle(n)).value == pytest.approx(
            cycle_theta(n), abs=1e-6)


def test_theta_extremes():
    assert theta(generate_complete(5)).value == pytest.approx(1.0, abs=1e-6)
    assert theta(generate_empty(6)).value == pytest.approx(6.0, abs=1e-6)


def test_level1_matches_theta_prime_two_assemblies():
    for g in [generate_cycle(4), generate_cycle(7), generate_random(8, 0.4, 1)]:
        a = las_bound(g, 1).value
        b = theta_prime(g).value
        assert a == pytest.approx(b, abs=1e-6)


def test_theta_prime_at_most_theta():
    for seed in range(5):
        g = generate_random(9, 0.35, 40 + seed)
        assert theta_prime(g).value <= theta(g).value + 1e-6


def test_final_level_reaches_alpha():
    for g, alpha in [(generate_cycle(5), 2), (generate_cycle(7), 3)]:
        res = las_bound(g, alpha)
        assert res.value == pytest.approx(alpha, abs=1e-6)
        assert res.verification.ok


def test_weighted_final_level():
    base = generate_cycle(5)
    w = (2.0, 1.0, 3.0, 1.0, 0.5)
    g = Graph(n=5, adj=base.adj, weights=w, labels=None)
    expect = alpha_exact(g, weighted=True).value
    res = las_bound(g, 2)
    assert res.value == pytest.approx(expect, abs=1e-6)


def test_levels_are_monotone():
    g = generate_cycle(7)
    values = [las_bound(g, t).value for t in (1, 2, 3)]
    assert values[1] <= values[0] + 1e-6
    assert values[2] <= values[1] + 1e-6


def test_bound_dominates_alpha():
    for seed in range(5):
        g = generate_random(9, 0.4, 60 + seed)
        res = las_bound(g, 1)
        assert alpha_exact(g).value <= res.value + 1e-6


def test_indicator_solutions_are_feasible():
    g = generate_cycle(7)
    prog = assemble_lasserre(g, 2)
    for s in all_independent_sets(g, 3):
        y = indicator_solution(prog.basis_2t, s)
        assert y[0] == 1.0
        assert np.all(y >= 0)
        M = moment_matrix(prog, y)
        assert np.linalg.eigvalsh(M)[0] >= -1e-12
        assert float(prog.objective @ y) == pytest.approx(len(s))


def test_indicator_rejects_dependent_set():
    g = generate_cycle(5)
    prog = assemble_lasserre(g, 2)
    with pytest.raises(Exception):
        indicator_solution(prog.basis_2t, (0, 1))


def test_verify_rejects_corrupted_certificate():
    g = generate_cycle(5)
    res = las_bound(g, 1)
    K = np.array(res.certificate, dtype=float)
    bad = K.copy()
    bad[0, 0] -= 1.0  # claims a better bound than the kernel supports
    report = verify_dual_certificate(g, 1, bad)
    assert not report.ok
    with pytest.raises(CertificateError):
        verify_dual_certificate(g, 1, K[:2, :2])


def test_lift_theta_prime_round_trip():
    g = generate_cycle(5)
    res = theta_prime(g)
    a, F = res.certificate
    K = lift_theta_prime_solution(a, F)
    report = verify_dual_certificate(g, 1, K, tol=1e-6)
    assert report.ok
    assert report.bound == pytest.approx(SQRT5, abs=1e-6)


def test_three_point_no_less_tight(petersen):
    whole = las_bound(petersen, 1).value
    for e in range(petersen.n):
        local = three_point_bound(petersen, e, 1)
        assert local.value <= whole + 1e-6


def test_three_point_transitive_alpha(petersen):
    from packbound import local_subgraph
    for e in range(petersen.n):
        sub, _ = local_subgraph(petersen, e)
        assert 1 + alpha_exact(sub).value == alpha_exact(petersen).value


def test_moebius_recovers_probability_measure():
    g = generate_cycle(5)
    res = las_bound(g, 2)
    basis = enumerate_independent_sets(g, 4)
    sigma = moebius_recover_measure(g, basis, res.moment_vector)
    assert sigma.min() >= -1e-6
    assert sigma.sum() == pytest.approx(1.0, abs=1e-6)


def test_moebius_exact_on_indicators():
    g = generate_cycle(5)
    basis = enumerate_independent_sets(g, 4)
    for s in all_independent_sets(g):
        y = np.array([Fraction(int(v)) for v in
                      indicator_solution(basis, s)], dtype=object)
        sigma = moebius_recover_measure(g, basis, y)
        target = frozenset(s)
        for i, r in enumerate(basis.sets):
            assert sigma[i] == (1 if frozenset(r) == target else 0)


def test_moebius_requires_full_level():
    g = generate_cycle(7)  # alpha 3
    basis = enumerate_independent_sets(g, 2)
    with pytest.raises(Exception):
        moebius_recover_measure(g, basis, np.zeros(len(basis)))


def test_empty_graph_trivial_bound():
    g = generate_empty(4)
    res = las_bound(g, 1)
    assert res.value == pytest.approx(4.0, abs=1e-6)
