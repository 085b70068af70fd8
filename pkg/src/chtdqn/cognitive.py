"""Cognitive-hierarchy layer: softmax level-0 policies, marginalized
transition distributions, the level-1 expected Bellman target for the
defender, and general level-k expected-utility machinery.

Only levels 0 and 1 are exercised by the scenario runner; the level-k
helpers are general and unit-tested but not wired into runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

from . import approximator
from .agents import DqnAgent, fit_batch, _stack_states
from .environment import (EconParams, SecurityState, joint_rewards,
                          next_state_bits, reward_tables)

MODES = ("oracle", "learned", "blended")


@dataclass
class CognitiveConfig:
    inv_temperature: float = 1.0
    poisson_tau: float = 1.5
    attacker_model_mode: str = "oracle"

    def __post_init__(self):
        if self.inv_temperature < 0.0:
            raise ValueError("inv_temperature must be >= 0")
        if self.poisson_tau <= 0.0:
            raise ValueError("poisson_tau must be > 0")
        if self.attacker_model_mode not in MODES:
            raise ValueError(f"attacker_model_mode must be one of {MODES}")


def softmax_policy(q, beta: float) -> np.ndarray:
    """p_a proportional to exp(beta * q_a), max-subtracted for overflow safety."""
    q = np.asarray(q, dtype=np.float64)
    if q.size == 0:
        raise ValueError("q must be nonempty")
    z = beta * q
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def poisson_level_weights(tau: float, k: int) -> np.ndarray:
    """Poisson(tau) masses over levels 0..k-1, renormalized."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if tau <= 0.0:
        raise ValueError("tau must be > 0")
    weights = poisson.pmf(np.arange(k), tau)
    return weights / weights.sum()


def level_k_expected_utility(payoff_matrix, opponent_level_dists,
                             weights) -> np.ndarray:
    """Expected utility per own strategy against the level-weighted mixture
    of opponent strategy distributions."""
    payoff = np.asarray(payoff_matrix, dtype=np.float64)
    dists = np.asarray(opponent_level_dists, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if dists.ndim != 2 or dists.shape[1] != payoff.shape[1]:
        raise ValueError("opponent distributions must be (levels, n_opponent)")
    if weights.shape != (dists.shape[0],):
        raise ValueError("weights length must match the number of levels")
    mixture = weights @ dists
    return payoff @ mixture

def best_response(expected_utilities) -> np.ndarray:
    """One-hot at the argmax, lowest-index tie-break."""
    e = np.asarray(expected_utilities, dtype=np.float64)
    if e.size == 0:
        raise ValueError("expected utilities must be nonempty")
    out = np.zeros_like(e)
    out[int(np.argmax(e))] = 1.0
    return out


def _check_policy(policy, n: int) -> np.ndarray:
    p = np.asarray(policy, dtype=np.float64)
    if p.shape != (n,):
        raise ValueError("attacker policy length must equal the node count")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("attacker policy must sum to 1")
    return p


def cht_transition(state: SecurityState, a_D: int, attacker_policy) -> dict:
    """Distribution over next states given the defender's action, marginalizing
    the deterministic joint kernel over the modeled attacker policy."""
    n = state.n
    policy = _check_policy(attacker_policy, n)
    dist: dict = {}
    for a_a in range(n):
        if policy[a_a] == 0.0:
            continue
        key = tuple(int(v) for v in next_state_bits(a_D, a_a, n))
        dist[key] = dist.get(key, 0.0) + float(policy[a_a])
    return dist


def level1_target(state: SecurityState, a_D: int, attacker_policy,
                  target_params, profiles, econ: EconParams) -> float:
    """Expected Bellman backup under the attacker model: the defender's
    level-1 target replacing plain DQN's sampled target."""
    n = state.n
    policy = _check_policy(attacker_policy, n)
    total = 0.0
    for a_a in range(n):
        u_d, _ = joint_rewards(a_D, a_a, profiles, econ)
        nxt = next_state_bits(a_D, a_a, n).astype(np.float64)
        q_next = approximator.forward(target_params, nxt)
        total += policy[a_a] * (u_d + econ.gamma * float(q_next.max()))
    return total


class AttackerModel:
    """Per-state attacker action-probability model used by the defender.

    oracle  - softmax of the actual attacker net's Q (uniform for a random
              attacker, whose true policy is uniform);
    learned - softmax of a defender-owned shadow net trained on observed
              attacker transitions;
    blended - learned Q shifted by log exploitation probabilities before the
              softmax (graph-frequency adjustment).
    """

    def __init__(self, mode: str, n_nodes: int,
                 attacker: DqnAgent | None = None,
                 shadow: DqnAgent | None = None,
                 graph=None,
                 config: CognitiveConfig | None = None):
        if mode not in MODES:
            raise ValueError(f"unknown attacker model mode {mode!r}")
        self.mode = mode
        self.n_nodes = n_nodes
        self.attacker = attacker
        self.shadow = shadow
        self.graph = graph
        self.config = config or CognitiveConfig(attacker_model_mode=mode)
        if mode in ("learned", "blended") and shadow is None:
            raise RuntimeError(f"{mode} mode requires a shadow net")
        if mode == "blended" and graph is None:
            raise RuntimeError("blended mode requires an attack graph")

    def q_at(self, states: np.ndarray) -> np.ndarray | None:
        """Modeled attacker Q-values per state; None for a random attacker
        (no Q exists, the policy is uniform)."""
        if self.mode == "oracle":
            if self.attacker is None:
                return None
            return approximator.forward(self.attacker.online, states)
        q = approximator.forward(self.shadow.online, states)
        if self.mode == "blended":
            probs = np.clip(self.graph.exploit_probs, 1e-12, None)
            q = q + np.log(probs) / self.config.inv_temperature \
                if self.config.inv_temperature > 0 else q + np.log(probs)
        return q

    def policies_at(self, states: np.ndarray) -> np.ndarray:
        q = self.q_at(states)
        if q is None:
            return np.full((states.shape[0], self.n_nodes), 1.0 / self.n_nodes)
        return softmax_policy(q, self.config.inv_temperature)


def level1_q_vector(state: SecurityState, attacker_policy, target_params,
                    reward_matrix: np.ndarray, gamma: float) -> np.ndarray:
    """Level-1 Q for every defender action at one state: the expected backup
    evaluated directly from the attacker model, with the target net supplying
    the continuation value.  This is what the defender's net is trained to
    approximate; acting on it directly makes the best response exact."""
    n = reward_matrix.shape[0]
    policy = _check_policy(attacker_policy, n)
    # Successor states: all-ones-protected plus one per compromised node.
    succ = np.ascontiguousarray(np.vstack(
        [np.zeros(n), np.eye(n)]))
    q_succ = approximator.forward(target_params, succ).max(axis=1)  # (n+1,)
    # next(a_D, a_A) index: 0 when blocked (a_A == a_D), else 1 + a_A.
    idx = np.tile(np.arange(1, n + 1), (n, 1))
    np.fill_diagonal(idx, 0)
    m = q_succ[idx]  # (a_D, a_A)
    return (reward_matrix + gamma * m) @ policy


def batch_level1_targets(batch, attacker_policies: np.ndarray, target_params,
                         reward_matrix: np.ndarray, gamma: float) -> np.ndarray:
    """Vectorized level-1 targets for a replay batch.

    For each attacker action column, the whole batch's successor states go
    through the target net in one forward call; with a degenerate policy the
    result is bitwise the plain sampled target."""
    n = reward_matrix.shape[0]
    batch_size = len(batch)
    a_d = np.array([rec.a_D for rec in batch], dtype=np.int64)
    u = reward_matrix[a_d, :]  # (batch, n_attacker_actions)
    m = np.empty((batch_size, n))
    for a_a in range(n):
        nxt = np.ascontiguousarray(
            np.stack([next_state_bits(int(a), a_a, n).astype(np.float64)
                      for a in a_d]))
        q_next = approximator.forward(target_params, nxt)
        m[:, a_a] = q_next.max(axis=1)
    return (attacker_policies * (u + gamma * m)).sum(axis=1)


def cht_train_step(agent: DqnAgent, batch, attacker_model: AttackerModel | None,
                   profiles, econ: EconParams,
                   reward_matrix: np.ndarray | None = None,
                   policies: np.ndarray | None = None) -> float:
    """Defender update with expected backups from the attacker model; the
    gradient/SGD plumbing is shared with dqn_train_step.

    `policies` overrides the model's per-record attacker distributions (rows
    aligned with the batch); used for injected or degenerate beliefs."""
    if len(batch) != agent.batch_size:
        raise ValueError("batch size must equal agent.batch_size")
    if reward_matrix is None:
        reward_matrix, _ = reward_tables(profiles, econ)
    states = _stack_states([rec.s for rec in batch])
    actions = np.array([rec.a_D for rec in batch], dtype=np.int64)
    if policies is None:
        if attacker_model is None:
            raise ValueError("need an attacker model or explicit policies")
        policies = attacker_model.policies_at(states)
    targets = batch_level1_targets(batch, policies, agent.target,
                                   reward_matrix, agent.gamma)
    return fit_batch(agent, states, actions, targets)
