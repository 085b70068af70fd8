"""Action selection and learning loops: replay buffer, epsilon schedule,
a generic DQN agent (usable as attacker or defender), and the random attacker."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import approximator
from .environment import SecurityState


@dataclass(frozen=True)
class TransitionRecord:
    s: SecurityState
    a_D: int
    a_A: int
    r_D: float
    r_A: float
    s_next: SecurityState


class ReplayBuffer:
    """Bounded FIFO store; uniform sampling without replacement."""

    def __init__(self, capacity: int = 1_000_000):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._store = deque(maxlen=capacity)

    def push(self, record: TransitionRecord) -> None:
        self._store.append(record)

    def sample(self, batch_size: int, rng) -> list | None:
        """Returns None while the buffer holds fewer than batch_size records."""
        if len(self._store) < batch_size:
            return None
        idx = rng.choice(len(self._store), size=batch_size, replace=False)
        return [self._store[i] for i in idx]

    def __len__(self) -> int:
        return len(self._store)

    def __iter__(self):
        return iter(self._store)


@dataclass
class EpsilonSchedule:
    eps_start: float = 1.0
    eps_end: float = 0.05
    decay_rate: float = 2.0
    horizon: int = 1000

    def __post_init__(self):
        if not 0.0 <= self.eps_end <= self.eps_start <= 1.0:
            raise ValueError("need 0 <= eps_end <= eps_start <= 1")


def epsilon_at(schedule: EpsilonSchedule, t: int) -> float:
    """Exponential decay from eps_start to eps_end over the horizon."""
    eps = schedule.eps_end + (schedule.eps_start - schedule.eps_end) * np.exp(
        -schedule.decay_rate * t / schedule.horizon)
    return float(min(schedule.eps_start, max(schedule.eps_end, eps)))


def select_action(q, eps: float, rng=None) -> int:
    """Epsilon-greedy with lowest-index tie-break; eps=0 consumes no randomness."""
    q = np.asarray(q)
    if q.size == 0:
        raise ValueError("q must be nonempty")
    if eps > 0.0:
        if rng is None:
            raise ValueError("rng required when eps > 0")
        if rng.random() < eps:
            return int(rng.integers(len(q)))
    return int(np.argmax(q))


def random_attacker_action(n: int, rng) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return int(rng.integers(n))


class DqnAgent:
    """Online/target network pair with replay buffer and hard target syncs."""

    def __init__(self, n_nodes: int, seed: int, batch_size: int = 64,
                 gamma: float = 0.98, learning_rate: float = 0.05,
                 target_sync_every: int = 100,
                 buffer_capacity: int = 1_000_000,
                 schedule: EpsilonSchedule | None = None,
                 clip_norm: float | None = None,
                 hidden=approximator.HIDDEN_SIZES):
        if batch_size > buffer_capacity:
            raise ValueError("batch_size must not exceed buffer capacity")
        self.n_nodes = n_nodes
        self.online = approximator.init(n_nodes, n_nodes, seed, hidden=hidden)
        self.target = self.online.copy()
        self.buffer = ReplayBuffer(buffer_capacity)
        self.schedule = schedule or EpsilonSchedule()
        self.batch_size = batch_size
        self.gamma = gamma
        self.learning_rate = learning_rate
        self.target_sync_every = target_sync_every
        self.clip_norm = clip_norm
        self.rng = np.random.default_rng(seed)
        self.train_count = 0

    def q_values(self, state: SecurityState) -> np.ndarray:
        return approximator.forward(self.online, state.as_input())

    def act(self, state: SecurityState, eps: float) -> int:
        return select_action(self.q_values(state), eps, self.rng)

    def observe(self, record: TransitionRecord) -> None:
        self.buffer.push(record)


def _stack_states(states) -> np.ndarray:
    return np.ascontiguousarray(
        np.stack([s.as_input() for s in states]))


def fit_batch(agent: DqnAgent, states: np.ndarray, actions, targets) -> float:
    """Shared update plumbing: one masked-MSE SGD step plus target syncing.

    Both the plain-DQN and the CHT train steps route through here so that
    identical targets produce identical parameter updates."""
    value, grads = approximator.gradients(agent.online, states, actions, targets)
    agent.online = approximator.sgd_step(agent.online, grads,
                                         agent.learning_rate, agent.clip_norm)
    agent.train_count += 1
    if agent.train_count % agent.target_sync_every == 0:
        agent.target = agent.online.copy()
    return value


def dqn_train_step(agent: DqnAgent, batch, reward_field: str = "r_D",
                   own_action_field: str = "a_D") -> float:
    """Sampled Bellman targets from the agent's own reward/action fields."""
    if len(batch) != agent.batch_size:
        raise ValueError("batch size must equal agent.batch_size")
    states = _stack_states([rec.s for rec in batch])
    next_states = _stack_states([rec.s_next for rec in batch])
    actions = np.array([getattr(rec, own_action_field) for rec in batch],
                       dtype=np.int64)
    rewards = np.array([getattr(rec, reward_field) for rec in batch])
    q_next = approximator.forward(agent.target, next_states)
    targets = rewards + agent.gamma * q_next.max(axis=1)
    return fit_batch(agent, states, actions, targets)


def train_if_ready(agent: DqnAgent, reward_field: str,
                   own_action_field: str) -> float | None:
    """One train step per call once the buffer holds a full batch."""
    batch = agent.buffer.sample(agent.batch_size, agent.rng)
    if batch is None:
        return None
    return dqn_train_step(agent, batch, reward_field, own_action_field)


def save_agent(agent: DqnAgent, path: str) -> None:
    """Full agent state (both nets, counters, hyperparameters) in one .npz."""
    arrays = {"train_count": np.int64(agent.train_count)}
    for tag, params in (("online", agent.online), ("target", agent.target)):
        for i, (w, b) in enumerate(zip(params.weights, params.biases)):
            arrays[f"{tag}_w{i}"] = w
            arrays[f"{tag}_b{i}"] = b
    meta = {
        "n_nodes": agent.n_nodes,
        "n_layers": len(agent.online.weights),
        "batch_size": agent.batch_size,
        "gamma": agent.gamma,
        "learning_rate": agent.learning_rate,
        "target_sync_every": agent.target_sync_every,
        "clip_norm": agent.clip_norm,
        "schedule": {
            "eps_start": agent.schedule.eps_start,
            "eps_end": agent.schedule.eps_end,
            "decay_rate": agent.schedule.decay_rate,
            "horizon": agent.schedule.horizon,
        },
    }
    arrays["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
    np.savez(path, **arrays)


def load_agent(path: str, seed: int = 0,
               buffer_capacity: int = 1_000_000) -> DqnAgent:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        agent = DqnAgent(
            n_nodes=meta["n_nodes"], seed=seed,
            batch_size=meta["batch_size"], gamma=meta["gamma"],
            learning_rate=meta["learning_rate"],
            target_sync_every=meta["target_sync_every"],
            buffer_capacity=buffer_capacity,
            schedule=EpsilonSchedule(**meta["schedule"]),
            clip_norm=meta["clip_norm"],
        )
        n_layers = meta["n_layers"]
        for tag in ("online", "target"):
            params = approximator.MlpParams(
                [np.ascontiguousarray(data[f"{tag}_w{i}"]) for i in range(n_layers)],
                [np.ascontiguousarray(data[f"{tag}_b{i}"]) for i in range(n_layers)])
            setattr(agent, tag, params)
        agent.train_count = int(data["train_count"])
    return agent
