import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from e2eslice import economics
from e2eslice.economics import PriceBook


def test_revenue_examples():
    prices = PriceBook(rev_per_mbps=(2.0, 1.0, 1.0))
    assert economics.revenue(np.array([3e6, 0.0, 0.0]), prices)[0] == pytest.approx(6.0)
    assert economics.revenue(np.zeros(3), prices).sum() == 0
    r = np.array([1e6, 2e6, 5e5])
    assert np.allclose(economics.revenue(2 * r, prices), 2 * economics.revenue(r, prices))


def test_ran_cost_examples(rng):
    prices = PriceBook(ran_cost=0.5)
    assign = np.array([[0, -1]])
    assert economics.cost_ran(assign, np.array([[2.0, 3.0]]), np.array([1]), prices, 3).tolist() == [0, 1.0, 0]
    assert economics.cost_ran(assign, np.zeros((1, 2)), np.array([1]), prices, 3).sum() == 0
    assign = rng.integers(-1, 4, size=(2, 5))
    power = rng.uniform(0, 1, size=(2, 5))
    user_slice = np.array([0, 1, 2, 1])
    got = economics.cost_ran(assign, power, user_slice, prices, 3)
    expect = np.zeros(3)
    for i in range(2):
        for k in range(5):
            if assign[i, k] >= 0:
                expect[user_slice[assign[i, k]]] += power[i, k] * 0.5
    assert np.allclose(got, expect, rtol=1e-14)


def test_core_cost_examples(rng):
    prices = PriceBook(node_cost=1e-9, link_cost=1e-8)
    got = economics.cost_core(np.array([True]), np.array([1e6]), np.array([2.0]), np.zeros((1, 3)),
                              np.array([0]), prices, 3)
    assert got[0] == pytest.approx(0.002, rel=1e-12)
    assert economics.cost_core(np.array([False]), np.array([1e6]), np.array([2.0]), np.ones((1, 3)),
                               np.array([0]), prices, 3).sum() == 0
    usage = rng.integers(0, 3, size=(3, 4)).astype(float)
    bits = np.array([1e5, 2e5, 3e5])
    cycles = np.array([5.0, 7.0, 1.0])
    got = economics.cost_core(np.ones(3, bool), bits, cycles, usage, np.array([0, 0, 2]), prices, 3)
    per_user = [bits[c] * cycles[c] * 1e-9 + sum(bits[c] * usage[c, l] * 1e-8 for l in range(4)) for c in range(3)]
    assert got == pytest.approx([per_user[0] + per_user[1], 0.0, per_user[2]], rel=1e-12)


def test_utility_examples():
    per, total = economics.utility(np.array([1.0]), np.array([10.0]))
    assert total == 50.0 and per[0] == 50.0
    assert economics.utility(np.zeros(3), np.zeros(3))[1] == 0


@settings(max_examples=50, deadline=None)
@given(rev=st.lists(st.floats(0, 100), min_size=3, max_size=3),
       cost=st.lists(st.floats(0, 100), min_size=3, max_size=3),
       scale=st.floats(0.1, 10))
def test_utility_linearity_and_sum(rev, cost, scale):
    per, total = economics.utility(np.array(rev), np.array(cost), 60.0, 1.0)
    assert total == pytest.approx(per.sum(), rel=1e-12, abs=1e-12)
    per2, total2 = economics.utility(np.array(rev), np.array(cost), 60.0 * scale, scale)
    assert total2 == pytest.approx(scale * total, rel=1e-9, abs=1e-9)
    bumped = np.array(rev)
    bumped[0] += 1.0
    assert economics.utility(bumped, np.array(cost))[1] > total - 1e-9


def test_negative_prices_rejected():
    with pytest.raises(ValueError):
        PriceBook(node_cost=-1.0)
