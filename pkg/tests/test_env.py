import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from e2eslice import SlicingEnv, generate_scenario, preset
from e2eslice import corenet, radio
from e2eslice.agents.greedy import empty_allocation, greedy_allocate
from e2eslice.corenet import Placement, Routing

import oracles


def make_env(seed=1, **kw):
    cfg = preset("desk", seed=seed, **kw)
    env = SlicingEnv(generate_scenario(cfg, seed), seed)
    env.reset(seed)
    return env


def test_reset_is_deterministic_per_seed():
    a, b = make_env(), make_env()
    assert np.array_equal(a.reset(5), b.reset(5))
    assert not np.array_equal(a.reset(5), a.reset(6))
    assert np.all(np.isfinite(a.reset(7)))


def test_dimensions_follow_the_scenario_shape(desk_env):
    e = desk_env
    assert e.obs_dim == e.I * e.C * e.K + e.L + e.C + e.N
    assert e.reset(0).shape == (e.obs_dim,)
    expect = e.I * e.K + e.I * e.K * e.U + e.C * e.F * e.N * e.V + e.C * (e.F - 1) * e.P
    assert e.action_dim == expect


def test_equal_logits_pick_first_index(desk_env):
    alloc = desk_env.decode_action(np.zeros(desk_env.action_dim))
    assert np.all(alloc.assign == -1)  # idle slot is index 0
    alloc = desk_env.decode_action(np.full(desk_env.action_dim, 0.5))
    assert np.all(alloc.assign == -1)


def test_full_power_sums_to_budget():
    env = make_env(num_subchannels=10)
    a = np.full(env.action_dim, -1.0)
    a[: env.I * env.K] = 1.0
    user = np.full((env.I, env.K, env.U), -1.0)
    user[:, :, 1] = 1.0
    a[env.I * env.K: env.I * env.K * (1 + env.U)] = user.ravel()
    alloc = env.decode_action(a)
    assert np.allclose(alloc.power, 0.4)
    assert alloc.power.sum(axis=1) == pytest.approx([4.0] * env.I, rel=1e-15)


def test_random_actions_decode_to_structurally_valid_allocations(desk_env, rng):
    e = desk_env
    for _ in range(1000):
        alloc = e.decode_action(rng.uniform(-1.5, 1.5, e.action_dim))
        xi = alloc.radio.xi(e.C)
        assert radio.check_c1(xi, e.scenario.radio.user_bs)
        assert np.all(radio.check_c2(xi) >= 0)
        assert np.all(radio.check_c3(alloc.power, alloc.assign, 4.0) >= -1e-12)
        users = np.arange(e.C)
        assert corenet.check_c5(Placement(alloc.placement), e.chain_len, users, e.N, e.V)
        assert corenet.check_c6(Routing(alloc.routing), Placement(alloc.placement), e.chain_len, users,
                                e.scenario.paths)
        assert e.structural_check(alloc)


def test_decode_is_deterministic_and_idempotent(desk_env, rng):
    a = rng.uniform(-1, 1, desk_env.action_dim)
    first = desk_env.decode_action(a)
    assert first.key() == desk_env.decode_action(a).key()
    again = desk_env.decode_action(desk_env.encode_allocation(first))
    assert np.array_equal(again.assign, first.assign)
    assert np.allclose(again.power, first.power)
    admitted = np.zeros(desk_env.C, bool)
    admitted[first.assign[first.assign >= 0]] = True
    assert np.array_equal(again.placement[admitted], first.placement[admitted])


def test_wrong_action_length():
    env = make_env()
    with pytest.raises(ValueError):
        env.decode_action(np.zeros(3))


def test_feasible_allocation_reward_is_scaled_utility():
    env = make_env()
    alloc = greedy_allocate(env)
    out = env.step(alloc)
    assert out.evaluation.feasible
    assert out.penalty == 0
    assert out.reward == env.reward_coef * out.evaluation.utility


def test_zero_power_is_penalised():
    env = make_env()
    out = env.step(empty_allocation(env))
    assert "C4" in out.violations
    assert out.reward < 0


def test_reward_matches_independent_recomputation(rng):
    env = make_env()
    for _ in range(30):
        alloc = env.decode_action(rng.uniform(-1, 1, env.action_dim))
        ev = env.evaluate(alloc)
        rev, cost, util = oracles.utility(env, alloc, env.channels)
        assert ev.utility == pytest.approx(util, rel=1e-9)
        reward, pen = env.reward_of(ev)
        assert reward == pytest.approx(env.reward_coef * util - pen, rel=1e-9, abs=1e-12)


def test_violation_report_matches_constraint_modules(rng):
    env = make_env()
    sc = env.scenario
    for _ in range(50):
        alloc = env.decode_action(rng.uniform(-1, 1, env.action_dim))
        ev = env.evaluate(alloc)
        srate = radio.slice_rates(ev.wc_rate, sc.radio.user_slice, env.S)
        ok4, _ = radio.check_c4(srate, sc.r_min_bpshz, sc.radio.subchannel_bw_hz)
        assert ("C4" in ev.violations) == (not ok4.all())
        delays = oracles.e2e_delays(env, alloc, env.channels, env.w_real)
        late = [c for c, parts in delays.items() if sum(parts) > env.tau_user[c]]
        assert ("C7" in ev.violations) == bool(late)
        assert ev.feasible == (not ev.violations)


def test_step_after_done_raises():
    env = make_env(episode_len=2)
    env.reset(0)
    a = np.zeros(env.action_dim)
    env.step(a)
    assert env.step(a).done
    with pytest.raises(RuntimeError):
        env.step(a)


def test_history_padding():
    env = make_env()
    env.reset(0)
    assert all(not o.any() for o, _ in env.observe_history(4))
    first = env.reset(0)
    assert env.observe_history(1)[0][0].sum() == 0
    for _ in range(3):
        env.step(np.zeros(env.action_dim))
    hist = env.observe_history(8)
    assert len(hist) == 8
    assert sum(not o.any() for o, _ in hist) == 5
    assert np.array_equal(hist[5][0], first)


def test_trace_export(tmp_path):
    env = make_env()
    env.reset(0)
    with pytest.raises(ValueError):
        env.export_trace(tmp_path / "x.csv")
    for _ in range(3):
        env.step(greedy_allocate(env))
    env.export_trace(tmp_path / "trace.csv")
    rows = list(csv.DictReader(open(tmp_path / "trace.csv")))
    assert len(rows) == 3
    assert {"t", "reward", "utility", "slack_C4", "slack_C7", "slack_C8"} <= set(rows[0])


def test_split_helpers(desk_env):
    obs = desk_env.reset(0)
    ran, core = desk_env.split_observation(obs)
    assert ran.size == desk_env.I * desk_env.C * desk_env.K
    assert ran.size + core.size == obs.size
    a = np.arange(desk_env.action_dim, dtype=float)
    r, c = desk_env.split_action(a)
    assert np.array_equal(np.concatenate([r, c]), a)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_penalty_free_iff_feasible(seed):
    env = make_env()
    rng = np.random.default_rng(seed)
    env.reset(seed)
    ev = env.evaluate(env.decode_action(rng.uniform(-1, 1, env.action_dim)))
    reward, pen = env.reward_of(ev)
    assert np.isfinite(reward)
    assert (pen == 0) == ev.feasible
