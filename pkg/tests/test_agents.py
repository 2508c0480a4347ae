import copy

import numpy as np
import pytest

from e2eslice import SlicingEnv, generate_scenario, preset
from e2eslice.agents import training
from e2eslice.agents.base import INSUFFICIENT, AgentConfig, RewardScaler, perturb
from e2eslice.agents.buffers import EpisodeBuffer, ReplayBuffer
from e2eslice.agents.ddpg import DdpgAgent
from e2eslice.agents.distributed import DistributedAgent
from e2eslice.agents.greedy import greedy_allocate
from e2eslice.agents.rdpg import RdpgAgent
from e2eslice.agents.sac import SacAgent, gaussian_entropy
from e2eslice.nn import flatten

SMALL = AgentConfig(discount=0.0, batch_size=32, tau=0.05, hidden_layers=2, hidden_width=16, actor_lr=3e-3,
                    critic_lr=1e-2, lr_decay=0.0, buffer_size=10000, noise_scale=0.3, episode_batch=8,
                    updates_per_episode=4, normalize_rewards=False, final_scale=1.0)


def tiny_env(seed=1, **kw):
    cfg = preset("desk", seed=seed, num_users=3, num_subchannels=2, episode_len=5, hidden_width=8,
                 batch_size=8, rdpg_batch_episodes=2, **kw)
    env = SlicingEnv(generate_scenario(cfg, seed), seed)
    return env, cfg


# ---------------------------------------------------------------- buffers
def test_replay_buffer_is_fifo():
    buf = ReplayBuffer(3, 1, 1, rng=0)
    for n in range(3):
        buf.add([n], [n], n, [n], False)
    assert buf.oldest()[2] == 0
    buf.add([3], [3], 3, [3], True)
    assert len(buf) == 3
    assert buf.oldest()[2] == 1
    _, _, r, _, _ = buf.sample(100)
    assert set(r.tolist()) == {1.0, 2.0, 3.0}


def test_replay_buffer_grows_lazily():
    buf = ReplayBuffer(10 ** 6, 2, 1)
    buf.add(np.zeros(2), [0.0], 0.0, np.zeros(2), False)
    assert buf._s.shape[0] == 1024


def test_episode_buffer_fifo_and_shapes():
    buf = EpisodeBuffer(2, rng=0)
    for n in range(3):
        buf.add(np.full((4, 2), n), np.full((3, 1), n), np.full(3, n))
    assert buf.oldest()[2][0] == 1
    obs, act, rew = buf.sample(5)
    assert obs.shape == (4, 5, 2) and act.shape == (3, 5, 1) and rew.shape == (3, 5)
    with pytest.raises(ValueError):
        buf.add(np.zeros((3, 2)), np.zeros((3, 1)), np.zeros(3))


# ---------------------------------------------------------------- helpers
def test_noise_statistics():
    rng = np.random.default_rng(0)
    draws = np.array([perturb(np.zeros(1), 0.1, rng)[0] for _ in range(10 ** 4)])
    assert draws.std() == pytest.approx(0.1, rel=0.05)
    assert np.array_equal(perturb(np.array([0.3, 2.0]), 0.0, rng), [0.3, 1.0])


def test_reward_scaler_keeps_sign():
    s = RewardScaler()
    s.end_episode([-2.0, 2.0])
    assert s.scale == 2.0
    assert s(-1.0) == -0.5
    assert RewardScaler(enabled=False)(3.0) == 3.0


def test_config_rejects_inverted_learning_rates():
    with pytest.raises(ValueError):
        AgentConfig(actor_lr=1e-3, critic_lr=1e-4)


# ---------------------------------------------------------------- one-step bandit
def bandit(agent, steps):
    obs = np.ones(1)
    for _ in range(steps):
        a = agent.act(obs, explore=True)
        agent.record(obs, a, 1.0, obs, True)


def test_ddpg_critic_learns_constant_reward():
    agent = DdpgAgent(1, 1, SMALL, seed=0)
    bandit(agent, 2000)
    q = agent.critic(np.array([[1.0, agent.act(np.ones(1))[0]]]))[0, 0]
    assert q == pytest.approx(1.0, abs=0.05)


def test_sac_without_entropy_learns_constant_reward():
    cfg = AgentConfig(**{**SMALL.__dict__, "fixed_temperature": 0.0})
    agent = SacAgent(1, 1, cfg, seed=0)
    bandit(agent, 2000)
    x = np.array([[1.0, agent.act(np.ones(1))[0]]])
    assert all(c(x)[0, 0] == pytest.approx(1.0, abs=0.05) for c in agent.critics)


def test_insufficient_samples_status():
    env, cfg = tiny_env()
    acfg = AgentConfig.from_scenario(cfg)
    for agent in (DdpgAgent(4, 2, acfg, 0), SacAgent(4, 2, acfg, 0), RdpgAgent(4, 2, acfg, 0, 5)):
        assert agent.update().status == INSUFFICIENT
        assert not agent.update().ok


def test_sac_initial_entropy_matches_closed_form():
    agent = SacAgent(3, 4, SMALL, seed=0)
    obs = np.random.default_rng(1).normal(size=(1, 3))
    _, log_std, _, _ = agent.policy.heads(obs)
    closed = gaussian_entropy(log_std)[0]
    rng = np.random.default_rng(2)
    mu, _, _, _ = agent.policy.heads(obs)
    z = mu + np.exp(log_std) * rng.standard_normal((20000, 4))
    dens = -0.5 * ((z - mu) / np.exp(log_std)) ** 2 - log_std - 0.5 * np.log(2 * np.pi)
    assert -dens.sum(axis=1).mean() == pytest.approx(closed, rel=0.1)


def test_twin_minimum_in_update_trace():
    agent = SacAgent(1, 1, SMALL, seed=3)
    bandit(agent, 40)
    # a clone replays the same batch and policy draw as update()
    clone = copy.deepcopy(agent)
    agent.update()
    s, a, r, s2, d = clone.buffer.sample(SMALL.batch_size)
    a2, _, _ = clone.policy.sample(s2, clone.rng)
    x2 = np.concatenate([s2, a2], axis=1)
    expect = np.minimum(clone.targets[0](x2)[:, 0], clone.targets[1](x2)[:, 0])
    assert np.allclose(agent.last_trace["target_q_min"], expect, rtol=1e-12)
    assert agent.last_trace["use_first"].dtype == bool


def test_tau_one_makes_targets_track_online():
    cfg = AgentConfig(**{**SMALL.__dict__, "tau": 1.0})
    agent = DdpgAgent(1, 1, cfg, seed=0)
    bandit(agent, 40)
    assert np.array_equal(flatten(agent.actor.params), flatten(agent.actor_target.params))
    assert np.array_equal(flatten(agent.critic.params), flatten(agent.critic_target.params))


@pytest.mark.parametrize("cls", [DdpgAgent, SacAgent])
def test_exploit_is_deterministic_and_bounded(cls):
    agent = cls(3, 2, SMALL, seed=0)
    obs = np.array([0.1, -0.3, 2.0])
    assert np.array_equal(agent.act(obs), agent.act(obs))
    for _ in range(50):
        a = agent.act(obs, explore=True)
        assert np.all(np.abs(a) <= 1)


def test_zero_noise_explore_equals_exploit():
    cfg = AgentConfig(**{**SMALL.__dict__, "noise_scale": 0.0})
    agent = DdpgAgent(3, 2, cfg, seed=0)
    obs = np.ones(3)
    assert np.array_equal(agent.act(obs, explore=True), agent.act(obs))


def test_targets_stay_in_convex_hull():
    """A soft update keeps each target weight between its old value and the online one."""
    agent = DdpgAgent(1, 1, SMALL, seed=0)
    bandit(agent, 40)
    old = flatten(agent.critic_target.params).copy()
    agent.update()
    new = flatten(agent.critic_target.params)
    online = flatten(agent.critic.params)
    lo, hi = np.minimum(old, online), np.maximum(old, online)
    assert np.all((new >= lo - 1e-12) & (new <= hi + 1e-12))


# ---------------------------------------------------------------- memory probe
def cue_episodes(agent, episodes, rng, learn, T=4):
    """The sign shown at t=0 must be repeated at every step; later observations are blank."""
    scores = []
    for _ in range(episodes):
        cue = rng.choice([-1.0, 1.0])
        agent.begin_episode()
        obs = np.array([cue, 1.0])
        rewards = []
        for t in range(T):
            a = agent.act(obs, explore=learn)
            r = -float((a[0] - cue) ** 2)
            blank = np.zeros(2)
            if learn:
                agent.record(obs, a, r, blank, t == T - 1)
            rewards.append(r)
            obs = blank
        if learn:
            agent.end_episode(rewards)
        scores.append(np.mean(rewards))
    return float(np.mean(scores))


@pytest.mark.slow
def test_recurrent_agent_remembers_what_feedforward_cannot():
    rdpg = RdpgAgent(2, 1, SMALL, seed=0, episode_len=4)
    ddpg = DdpgAgent(2, 1, SMALL, seed=0)
    for agent in (rdpg, ddpg):
        cue_episodes(agent, 300, np.random.default_rng(0), learn=True)
    r = cue_episodes(rdpg, 200, np.random.default_rng(1), learn=False)
    d = cue_episodes(ddpg, 200, np.random.default_rng(1), learn=False)
    # a memoryless policy can at best score -(T-1)/T = -0.75
    assert d <= -0.75 + 0.05
    assert r > d + 0.5


def test_rdpg_act_advances_memory():
    agent = RdpgAgent(2, 1, SMALL, seed=0, episode_len=4)
    agent.begin_episode()
    a1 = agent.act(np.ones(2))
    a2 = agent.act(np.ones(2))
    assert not np.array_equal(a1, a2)
    agent.begin_episode()
    assert np.array_equal(agent.act(np.ones(2)), a1)


# ---------------------------------------------------------------- training loop on the environment
def test_zero_episodes_gives_empty_curve():
    env, cfg = tiny_env()
    curve, _ = training.train("ddpg", env, cfg, episodes=0, seed=0)
    assert len(curve) == 0
    with pytest.raises(ValueError):
        curve.final_decile_mean()


@pytest.mark.parametrize("kind", ["rdpg", "sac", "ddpg", "dist", "greedy"])
def test_training_is_reproducible(kind, tmp_path):
    env, cfg = tiny_env()
    c1, _ = training.train(kind, env, cfg, episodes=4, seed=5, csv_path=tmp_path / "a.csv")
    c2, _ = training.train(kind, env, cfg, episodes=4, seed=5, csv_path=tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert np.array_equal(c1.mean_reward, c2.mean_reward)
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "episode,mean_reward,utility,violations"


def test_unknown_algorithm():
    env, cfg = tiny_env()
    with pytest.raises(ValueError):
        training.train("ppo", env, cfg, episodes=1)
    with pytest.raises(ValueError):
        training.make_agent("greedy", env, AgentConfig.from_scenario(cfg))


def test_evaluate_reports_all_metrics():
    env, cfg = tiny_env()
    out = training.evaluate(env, None, episodes=2)
    assert set(out) == {"mean_reward", "utility", "sum_rate", "cost", "admitted", "violations"}


def test_distributed_partition():
    env, cfg = tiny_env()
    agent = DistributedAgent(env, AgentConfig.from_scenario(cfg), seed=0)
    assert agent.ran.act_dim + agent.core.act_dim == env.action_dim
    assert agent.ran.obs_dim == env.I * env.C * env.K
    # the core agent sees no channel gains: its input is the core observation plus the served mask
    assert agent.core.obs_dim == env.obs_dim - env.I * env.C * env.K + env.C
    obs = env.reset(0)
    a = agent.act(obs)
    assert a.shape == (env.action_dim,)
    mask = agent.served_mask(a[: env.ran_action_dim])
    assigned = env.decode_action(a).assign
    assert set(np.flatnonzero(mask)) == set(assigned[assigned >= 0].tolist())


def test_checkpoint_round_trip(tmp_path):
    env, cfg = tiny_env()
    acfg = AgentConfig.from_scenario(cfg)
    obs = env.reset(0)
    for cls in (DdpgAgent, SacAgent):
        a, b = cls(env.obs_dim, env.action_dim, acfg, 0), cls(env.obs_dim, env.action_dim, acfg, 1)
        a.save(tmp_path / "ck.npz")
        b.load(tmp_path / "ck.npz")
        assert np.array_equal(a.act(obs), b.act(obs))


# ---------------------------------------------------------------- greedy heuristic
def test_greedy_serves_an_uncontended_user():
    cfg = preset("desk", num_users=3, num_bs=1, num_subchannels=4, r_min_bpshz=(0.1, 0.1, 0.1), seed=0)
    env = SlicingEnv(generate_scenario(cfg, 0), 0)
    env.reset(0)
    alloc = greedy_allocate(env)
    ev = env.evaluate(alloc)
    assert ev.feasible
    assert ev.admitted.all()


def test_greedy_prefers_higher_revenue_on_a_single_subchannel():
    cfg = preset("desk", num_users=3, num_bs=1, num_subchannels=1, r_min_bpshz=(0.0, 0.0, 0.0),
                 rev_per_mbps=(1.0, 5.0, 2.0), seed=0)
    env = SlicingEnv(generate_scenario(cfg, 0), 0)
    env.reset(0)
    alloc = greedy_allocate(env)
    winner = alloc.assign[0, 0]
    assert env.scenario.user_slice[winner] == 1


def test_greedy_is_deterministic(desk_env):
    a, b = greedy_allocate(desk_env), greedy_allocate(desk_env)
    assert a.key() == b.key()


def test_rdpg_learning_rate_override():
    cfg = AgentConfig(hidden_width=8, actor_lr=1e-5, critic_lr=3e-4, rdpg_actor_lr=1e-4, rdpg_critic_lr=1e-3)
    agent = RdpgAgent(3, 2, cfg, seed=0, episode_len=5)
    assert (agent.cfg.actor_lr, agent.cfg.critic_lr) == (1e-4, 1e-3)
    # step-replay agents keep the shared rates
    assert DdpgAgent(3, 2, cfg, seed=0).cfg.actor_lr == 1e-5


def test_rdpg_override_keeps_two_timescale_guard():
    with pytest.raises(ValueError):
        preset("desk", rdpg_actor_lr=1e-3, rdpg_critic_lr=1e-4)
    with pytest.raises(ValueError):
        RdpgAgent(3, 2, AgentConfig(rdpg_actor_lr=1e-3), seed=0)
