import numpy as np
import pytest

from gmfg.env import InvestmentModel, SISModel
from gmfg.graphon import Graphon
from gmfg.meanfield import (
    ClassGrid,
    MeanFieldEnsemble,
    PolicyEnsemble,
    endpoint_grid,
    evolve,
    forward_simulate,
    lift_policy_gamma_n,
    make_grid,
    neighborhood_mf,
    neighborhood_weights,
    uniform_grid,
)

from conftest import random_toy
from oracles import loop_forward

ER = Graphon("erdos_renyi", p=0.5)
UNIF = Graphon("uniform_attachment")
RANK = Graphon("ranked_attachment")


def test_uniform_grid():
    assert uniform_grid(1).representatives.tolist() == [0.5]
    assert uniform_grid(2).representatives.tolist() == [0.25, 0.75]
    assert uniform_grid(4).representatives.tolist() == [0.125, 0.375, 0.625, 0.875]
    with pytest.raises(ValueError):
        uniform_grid(0)


def test_endpoint_grid_matches_percent_points():
    np.testing.assert_allclose(endpoint_grid(101).representatives, np.arange(101) / 100, atol=1e-15)
    assert make_grid(3, "endpoint").class_measure == pytest.approx(1 / 3)


def test_grid_validation():
    with pytest.raises(ValueError):
        ClassGrid(np.array([0.5, 0.2]))
    with pytest.raises(ValueError):
        make_grid(3, "chebyshev")


def _const_mf(grid, T, vec):
    return MeanFieldEnsemble(grid, np.broadcast_to(vec, (grid.M, T, len(vec))).copy())


def test_neighborhood_examples():
    grid = uniform_grid(5)
    mf = _const_mf(grid, 4, [0.5, 0.5])
    np.testing.assert_allclose(neighborhood_mf(ER, mf, 0.3, 2), [0.25, 0.25], atol=1e-15)
    assert neighborhood_mf(Graphon("erdos_renyi", p=0.0), mf, 0.3, 1).tolist() == [0.0, 0.0]
    rnd = MeanFieldEnsemble(grid, np.random.default_rng(0).dirichlet([1, 1], size=(5, 4)))
    assert neighborhood_mf(UNIF, rnd, 1.0, 3).tolist() == [0.0, 0.0]


def test_neighborhood_mass_bound():
    rng = np.random.default_rng(2)
    grid = uniform_grid(7)
    mf = MeanFieldEnsemble(grid, rng.dirichlet(np.ones(3), size=(7, 5)))
    for g in (UNIF, RANK, ER):
        for alpha in rng.uniform(size=50):
            G = neighborhood_mf(g, mf, alpha, int(rng.integers(5)))
            assert G.sum() <= g.matrix([alpha], grid.representatives).max() + 1e-15
            assert G.sum() <= 1.0


def test_sis_stationary_under_er_half():
    m = SISModel()
    pol = PolicyEnsemble.constant_action(m, uniform_grid(4), SISModel.UNPROTECTED)
    mf = forward_simulate(m, ER, pol)
    np.testing.assert_allclose(mf.marginals[..., SISModel.I], 0.5, atol=1e-12, rtol=0)


def test_sis_pure_recovery_chain():
    m = SISModel()
    rng = np.random.default_rng(4)
    probs = rng.dirichlet([1, 1], size=(3, m.horizon, 2))
    mf = forward_simulate(m, Graphon("erdos_renyi", p=0.0), PolicyEnsemble(uniform_grid(3), probs))
    expected = 0.5 * 0.8 ** np.arange(m.horizon)
    np.testing.assert_allclose(mf.marginals[..., SISModel.I], np.broadcast_to(expected, (3, m.horizon)), atol=1e-12, rtol=0)


def test_investment_opt_out_stays_at_zero():
    m = InvestmentModel()
    pol = PolicyEnsemble.constant_action(m, uniform_grid(6), InvestmentModel.OPT_OUT)
    mf = forward_simulate(m, RANK, pol)
    expected = np.zeros(10)
    expected[0] = 1
    assert np.all(mf.marginals == expected)


@pytest.mark.parametrize("g", [UNIF, RANK, ER], ids=lambda g: g.kind)
def test_forward_matches_loop_oracle(g):
    rng = np.random.default_rng(8)
    m = random_toy(rng, X=3, U=2, T=6)
    grid = uniform_grid(4)
    probs = rng.dirichlet(np.ones(2), size=(4, 6, 3))
    mf = forward_simulate(m, g, PolicyEnsemble(grid, probs))
    np.testing.assert_allclose(mf.marginals, loop_forward(m, g, grid.representatives, probs), atol=1e-13, rtol=0)
    assert np.max(np.abs(mf.marginals.sum(axis=-1) - 1)) <= 1e-10


def test_class_permutation_invariance():
    rng = np.random.default_rng(9)
    m = SISModel()
    grid = uniform_grid(9)
    probs = rng.dirichlet([1, 1], size=(9, m.horizon, 2))
    w = neighborhood_weights(UNIF, grid, grid.representatives)
    base = evolve(m, w, probs)
    for _ in range(5):
        perm = rng.permutation(9)
        permuted = evolve(m, w[np.ix_(perm, perm)], probs[perm])
        np.testing.assert_allclose(permuted, base[perm], atol=1e-12, rtol=0)


def test_er_class_independent_policy_gives_identical_classes():
    m = InvestmentModel()
    rng = np.random.default_rng(3)
    one = rng.dirichlet([1, 1], size=(m.horizon, 10))
    pol = PolicyEnsemble(uniform_grid(11), np.broadcast_to(one, (11,) + one.shape).copy())
    mu = forward_simulate(m, ER, pol).marginals
    assert all(np.array_equal(mu[0], mu[k]) for k in range(11))


def test_gamma_n_lifting():
    rng = np.random.default_rng(0)
    pol2 = PolicyEnsemble(uniform_grid(2), rng.dirichlet([1, 1], size=(2, 3, 2)))
    assert np.array_equal(lift_policy_gamma_n(pol2, [0.1])[0], pol2.probs[0])
    assert np.array_equal(lift_policy_gamma_n(pol2, [0.5])[0], pol2.probs[0])
    assert np.array_equal(lift_policy_gamma_n(pol2, [0.9])[0], pol2.probs[1])
    pol100 = PolicyEnsemble(uniform_grid(100), rng.dirichlet([1, 1], size=(100, 2, 2)))
    assert np.array_equal(lift_policy_gamma_n(pol100, [0.999])[0], pol100.probs[99])


def test_csv_round_trip(tmp_path):
    m = SISModel(horizon=3)
    rng = np.random.default_rng(1)
    pol = PolicyEnsemble(uniform_grid(3), rng.dirichlet([1, 1], size=(3, 3, 2)))
    pol.to_csv(tmp_path / "p.csv", {"seed": 1})
    back = PolicyEnsemble.from_csv(tmp_path / "p.csv")
    assert np.array_equal(back.probs, pol.probs)
    assert back.grid == pol.grid
    mf = forward_simulate(m, UNIF, pol)
    mf.to_csv(tmp_path / "mf.csv")
    lines = (tmp_path / "mf.csv").read_text().splitlines()
    assert lines[0] == "class,alpha,t,x,value"
    assert len(lines) == 1 + 3 * 3 * 2
    assert (tmp_path / "p.csv").read_text().startswith("# seed=1\nclass,alpha,t,x,u,value\n")
