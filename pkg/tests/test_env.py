import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gmfg.env import InvestmentModel, SISModel, investment_graphon_model, make_model, sis_graphon_model

S, I = SISModel.S, SISModel.I
UNPROT, PREC = SISModel.UNPROTECTED, SISModel.PRECAUTION
INV, OPT = InvestmentModel.INVEST, InvestmentModel.OPT_OUT


def random_sub_probabilities(rng, n, X):
    """Dirichlet directions scaled by a random total mass in [0, 1]."""
    return rng.dirichlet(np.ones(X), size=n) * rng.uniform(0, 1, size=(n, 1))


def test_sis_parameters():
    m = sis_graphon_model()
    assert (m.num_states, m.num_actions, m.horizon) == (2, 2, 50)
    assert m.initial_distribution.tolist() == [0.5, 0.5]


def test_sis_examples():
    m = sis_graphon_model()
    np.testing.assert_allclose(m.transition(S, UNPROT, [0.5, 0.25]), [0.8, 0.2], atol=1e-15)
    assert m.reward(I, PREC, [0.3, 0.3]) == -2.5
    assert m.transition(S, PREC, [0.0, 1.0]).tolist() == [1.0, 0.0]
    np.testing.assert_allclose(m.transition(I, UNPROT, [0.0, 1.0]), [0.2, 0.8], atol=1e-15)


def test_investment_parameters():
    m = investment_graphon_model()
    assert (m.num_states, m.num_actions, m.horizon) == (10, 2, 50)
    assert m.initial_distribution[0] == 1.0


def test_investment_examples():
    m = investment_graphon_model()
    G = np.full(10, 0.05)
    p = m.transition(0, INV, G)
    assert p[1] == pytest.approx(0.9) and p[0] == pytest.approx(0.1)
    assert m.reward(5, OPT, np.zeros(10)) == pytest.approx(1.5)
    assert m.transition(9, INV, G).tolist() == [0] * 9 + [1]
    assert m.transition(9, OPT, G).tolist() == [0] * 9 + [1]
    for x in range(9):
        assert m.transition(x, INV, G)[x + 1] == pytest.approx((9 - x) / 10)
        assert m.transition(x, OPT, G)[x] == 1.0


@pytest.mark.parametrize("name", ["sis", "investment"])
def test_stochastic_kernel_on_random_fields(name):
    m = make_model(name)
    G = random_sub_probabilities(np.random.default_rng(0), 1000, m.num_states)
    P = m.transition_batch(G)
    assert P.shape == (1000, m.num_states, m.num_actions, m.num_states)
    assert np.all(P >= 0)
    assert np.max(np.abs(P.sum(axis=-1) - 1)) <= 1e-12


def test_sis_reward_values():
    G = random_sub_probabilities(np.random.default_rng(1), 1000, 2)
    assert set(np.unique(SISModel().reward_batch(G))) == {0.0, -0.5, -2.0, -2.5}


@settings(max_examples=200, deadline=None)
@given(arrays(float, 10, elements=st.floats(0, 0.1)))
def test_investment_reward_monotone(G):
    m = InvestmentModel()
    r = m.reward_batch(G)
    assert np.all(np.diff(r, axis=0) > 0)
    richer = G.copy()
    richer[9] += 0.05
    assert np.all(m.reward_batch(richer)[1:] < r[1:])


def test_unknown_model():
    with pytest.raises(ValueError):
        make_model("chess")
