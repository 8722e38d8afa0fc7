import math

import numpy as np
import pytest

from gnp_spectra.eigen import (
    DENSE_MAX_N,
    NonConvergenceError,
    jacobi_eigenvalues,
    lambda1_dense,
    lambda1_power,
    rayleigh,
)
from gnp_spectra.graph_core import (
    complete,
    complete_bipartite,
    cycle,
    disjoint_union,
    from_edges,
    gen_gnp,
    path,
    star,
)

CLOSED_FORMS = [
    (star(9), 3.0),
    (cycle(4), 2.0),
    (complete(5), 4.0),
    (complete_bipartite(2, 3), math.sqrt(6)),
    (path(4), 2 * math.cos(math.pi / 5)),
]


@pytest.mark.parametrize("g, expected", CLOSED_FORMS)
def test_power_closed_forms(g, expected):
    assert lambda1_power(g).lambda1 == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize("g, expected", CLOSED_FORMS)
def test_dense_closed_forms(g, expected):
    assert lambda1_dense(g).lambda1 == pytest.approx(expected, abs=1e-10)


def test_empty_graph():
    g = from_edges(3, [])
    assert lambda1_power(g).lambda1 == 0.0
    assert lambda1_dense(g).lambda1 == 0.0
    assert lambda1_power(from_edges(0, [])).lambda1 == 0.0


def test_single_edge_is_exact():
    res = lambda1_power(from_edges(5, [(1, 3)]))
    assert res.lambda1 == 1.0 and res.iterations == 0


def test_residual_within_tolerance():
    g = gen_gnp(2000, 2 / 2000, 4)
    res = lambda1_power(g, tol=1e-9)
    assert res.converged and res.residual <= 1e-9
    assert res.to_dict()["method"] == "POWER"


def test_non_convergence_reported():
    g = gen_gnp(3000, 1.5 / 3000, 1)
    with pytest.raises(NonConvergenceError) as info:
        lambda1_power(g, tol=1e-14, max_iter=3, warm_start_min=None)
    res = info.value.result
    assert not res.converged
    assert res.residual > 1e-14
    soft = lambda1_power(g, tol=1e-14, max_iter=3, warm_start_min=None, raise_on_failure=False)
    assert not soft.converged and soft.lambda1 > 0


@pytest.mark.parametrize("kw", [{"tol": 0}, {"tol": -1.0}, {"max_iter": 0}])
def test_bad_arguments(kw):
    with pytest.raises(ValueError):
        lambda1_power(star(3), **kw)


def test_dense_size_limit():
    with pytest.raises(ValueError):
        lambda1_dense(from_edges(DENSE_MAX_N + 1, []))


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(3)
    for n in (1, 2, 5, 17, 40):
        a = rng.normal(size=(n, n))
        a = a + a.T
        got = jacobi_eigenvalues(a)
        assert np.allclose(got, np.sort(np.linalg.eigvalsh(a))[::-1], atol=1e-10)


@pytest.mark.parametrize("n", [16, 64, 128, 256])
@pytest.mark.parametrize("p", [0.05, 0.2])
def test_power_matches_dense(n, p):
    # the full 200-graph comparison lives in the acceptance suite
    for seed in range(10):
        g = gen_gnp(n, p, seed)
        assert abs(lambda1_power(g, tol=1e-9).lambda1 - lambda1_dense(g).lambda1) <= 1e-6


@pytest.mark.parametrize("n", [100, 1000])
@pytest.mark.parametrize("c", [0.5, 1.0, 5.0])
def test_sandwich(n, c):
    for seed in range(10):
        g = gen_gnp(n, c / n, seed)
        lam = lambda1_power(g).lambda1
        assert math.sqrt(g.max_degree) <= lam + 1e-8
        assert 2 * g.m / n <= lam + 1e-8
        assert lam <= g.max_degree + 1e-8


def test_disjoint_union_is_max():
    parts = [star(9), cycle(5), complete(4), path(7)]
    g = disjoint_union(*parts)
    res = lambda1_power(g, per_component=True)
    assert res.lambda1 == pytest.approx(3.0, abs=1e-8)
    expected = [3.0, 2.0, 3.0, 2 * math.cos(math.pi / 8)]
    assert res.per_component == pytest.approx(expected, abs=1e-7)
    assert res.lambda1 == max(res.per_component)


def test_pruning_does_not_change_answer():
    g = gen_gnp(5000, 1.2 / 5000, 8)
    a = lambda1_power(g, tol=1e-10).lambda1
    b = lambda1_power(g, tol=1e-10, per_component=True).lambda1
    assert a == pytest.approx(b, abs=1e-8)


def test_warm_start_agrees():
    g = gen_gnp(6000, 2 / 6000, 2)
    cold = lambda1_power(g, tol=1e-10, warm_start_min=None).lambda1
    warm = lambda1_power(g, tol=1e-10, warm_start_min=100).lambda1
    assert cold == pytest.approx(warm, abs=1e-7)


def test_edge_addition_monotone():
    rng = np.random.default_rng(11)
    for trial in range(100):
        n = int(rng.integers(5, 25))
        g = gen_gnp(n, 0.25, trial)
        present = set(g.to_edge_list())
        missing = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in present]
        if not missing:
            continue
        extra = missing[int(rng.integers(len(missing)))]
        h = from_edges(n, sorted(present | {extra}))
        assert lambda1_dense(h).lambda1 >= lambda1_dense(g).lambda1 - 1e-12


@pytest.mark.parametrize("g", [star(9), cycle(7), complete(5), gen_gnp(40, 0.1, 2)])
def test_rayleigh_below_lambda1(g):
    lam = lambda1_dense(g).lambda1
    rng = np.random.default_rng(0)
    for _ in range(100):
        assert rayleigh(g, rng.normal(size=g.n)) <= lam + 1e-9


def test_rayleigh_examples():
    centre = np.zeros(10)
    centre[0] = 1
    assert rayleigh(star(9), centre) == 0.0
    assert rayleigh(complete(5), np.ones(5)) == pytest.approx(4.0)
    assert rayleigh(cycle(4), np.ones(4)) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        rayleigh(cycle(4), np.zeros(4))
    with pytest.raises(ValueError):
        rayleigh(cycle(4), np.ones(3))


def test_deterministic_output():
    g = gen_gnp(3000, 1 / 3000, 5)
    assert lambda1_power(g).lambda1 == lambda1_power(g).lambda1


def test_pruning_survives_tight_upper_bound():
    # the star's cheap upper bound equals lambda_1, so its Rayleigh quotient
    # can round above it; the component must still be solved
    g = disjoint_union(star(5), from_edges(14, []))
    for tol in (1e-8, 1e-12):
        assert lambda1_power(g, tol=tol).lambda1 == pytest.approx(math.sqrt(5), abs=1e-10)
