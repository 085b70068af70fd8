import numpy as np
import pytest

from chtdqn import agents, approximator, environment as env
from chtdqn.agents import (DqnAgent, EpsilonSchedule, ReplayBuffer,
                           TransitionRecord)


def make_record(n, a_d, a_a, profiles, econ):
    state = env.SecurityState(bits=np.zeros(n))
    nxt, r_d, r_a, _ = env.step(state, a_d, a_a, profiles, econ)
    return TransitionRecord(state, a_d, a_a, r_d, r_a, nxt)


def test_buffer_fifo_eviction():
    buf = ReplayBuffer(capacity=2)
    for i in range(3):
        buf.push(i)
    assert list(buf) == [1, 2]


def test_buffer_underfilled_returns_none(rng):
    buf = ReplayBuffer(capacity=100)
    for i in range(63):
        buf.push(i)
    assert buf.sample(64, rng) is None
    buf.push(63)
    batch = buf.sample(64, rng)
    assert len(batch) == 64
    assert len(set(batch)) == 64  # no duplicates


def test_epsilon_schedule_endpoints():
    sched = EpsilonSchedule()
    assert agents.epsilon_at(sched, 0) == 1.0
    assert agents.epsilon_at(sched, 10 ** 9) == pytest.approx(0.05)
    at_horizon = agents.epsilon_at(sched, sched.horizon)
    assert at_horizon == pytest.approx(0.05 + 0.95 * np.exp(-2), abs=1e-12)


def test_epsilon_monotone():
    sched = EpsilonSchedule()
    values = [agents.epsilon_at(sched, t) for t in range(0, 2000, 50)]
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_select_action_greedy_and_ties():
    assert agents.select_action([1, 3, 2], 0.0) == 1
    assert agents.select_action([2, 2], 0.0) == 0


def test_select_action_eps_zero_consumes_no_randomness():
    rng = np.random.default_rng(0)
    before = rng.bit_generator.state
    agents.select_action([1.0, 2.0], 0.0, rng)
    assert rng.bit_generator.state == before


def test_select_action_uniform_at_eps_one(rng):
    n = 4
    counts = np.zeros(n)
    draws = 10_000
    for _ in range(draws):
        counts[agents.select_action(np.zeros(n), 1.0, rng)] += 1
    expected = draws / n
    sigma = np.sqrt(draws * (1 / n) * (1 - 1 / n))
    assert np.all(np.abs(counts - expected) < 3 * sigma + 1e-9)


def test_random_attacker_uniform(rng):
    counts = np.bincount(
        [agents.random_attacker_action(6, rng) for _ in range(10_000)],
        minlength=6)
    sigma = np.sqrt(10_000 * (1 / 6) * (5 / 6))
    assert np.all(np.abs(counts - 10_000 / 6) < 3 * sigma + 1e-9)
    assert agents.random_attacker_action(1, rng) == 0


def test_dqn_train_step_gamma_zero(econ):
    profiles = env.sample_profiles(3, seed=1)
    agent = DqnAgent(3, seed=0, batch_size=4, gamma=0.0)
    batch = [make_record(3, a % 3, (a + 1) % 3, profiles, econ)
             for a in range(4)]
    states = np.stack([r.s.as_input() for r in batch])
    actions = np.array([r.a_D for r in batch])
    rewards = np.array([r.r_D for r in batch])
    before = agent.online.copy()
    agents.dqn_train_step(agent, batch)
    # reproduce the update by hand with gamma=0 targets == rewards
    _, grads = approximator.gradients(before, states, actions, rewards)
    expected = approximator.sgd_step(before, grads, agent.learning_rate,
                                     agent.clip_norm)
    for w0, w1 in zip(agent.online.weights, expected.weights):
        assert np.array_equal(w0, w1)


def test_target_sync_copies_exactly(econ):
    profiles = env.sample_profiles(2, seed=1)
    agent = DqnAgent(2, seed=0, batch_size=2, target_sync_every=3)
    batch = [make_record(2, 0, 1, profiles, econ),
             make_record(2, 1, 0, profiles, econ)]
    for i in range(3):
        agents.dqn_train_step(agent, batch)
    for w0, w1 in zip(agent.online.weights, agent.target.weights):
        assert np.array_equal(w0, w1)


def test_zero_gradient_leaves_params(econ):
    agent = DqnAgent(2, seed=0, batch_size=1, gamma=0.0)
    state = env.SecurityState(bits=np.zeros(2))
    q = agent.q_values(state)
    record = TransitionRecord(state, 0, 0, float(q[0]), 0.0, state)
    before = agent.online.copy()
    agents.dqn_train_step(agent, [record])
    for w0, w1 in zip(before.weights, agent.online.weights):
        assert np.array_equal(w0, w1)


def test_training_trajectory_deterministic(econ):
    def run():
        profiles = env.sample_profiles(3, seed=5)
        agent = DqnAgent(3, seed=9, batch_size=8)
        rng = np.random.default_rng(1)
        state = env.SecurityState(bits=np.zeros(3))
        for t in range(60):
            a_d = agent.act(state, 0.3)
            a_a = agents.random_attacker_action(3, rng)
            nxt, r_d, r_a, _ = env.step(state, a_d, a_a, profiles, econ)
            agent.observe(TransitionRecord(state, a_d, a_a, r_d, r_a, nxt))
            agents.train_if_ready(agent, "r_D", "a_D")
            state = nxt
        return agent

    a, b = run(), run()
    for w0, w1 in zip(a.online.weights, b.online.weights):
        assert np.array_equal(w0, w1)


def test_save_load_roundtrip(tmp_path, econ):
    profiles = env.sample_profiles(3, seed=2)
    agent = DqnAgent(3, seed=4, batch_size=2, clip_norm=50.0)
    batch = [make_record(3, 0, 1, profiles, econ),
             make_record(3, 1, 2, profiles, econ)]
    agents.dqn_train_step(agent, batch)
    path = tmp_path / "agent.npz"
    agents.save_agent(agent, str(path))
    back = agents.load_agent(str(path))
    assert back.train_count == agent.train_count
    assert back.clip_norm == agent.clip_norm
    assert back.schedule == agent.schedule
    for w0, w1 in zip(agent.online.weights, back.online.weights):
        assert np.array_equal(w0, w1)
    for w0, w1 in zip(agent.target.weights, back.target.weights):
        assert np.array_equal(w0, w1)


def test_batch_size_validation(econ):
    profiles = env.sample_profiles(2, seed=1)
    agent = DqnAgent(2, seed=0, batch_size=4)
    with pytest.raises(ValueError):
        agents.dqn_train_step(agent, [make_record(2, 0, 0, profiles, econ)])
