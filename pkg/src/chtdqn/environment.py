"""Stochastic game board: binary security states, the per-node compromise
indicator, deterministic joint-action transitions, and both utility functions.

Transitions are deterministic given the joint action; graph exploitation
probabilities are a belief used by agents and the UI, they do not gate
compromise success.  `stochastic_success` on EconParams is the documented
hook for the probability-gated variant and is off by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

COST_FLOOR = 0.1  # keeps noisy costs/estimates positive so utility signs hold


@dataclass
class SecurityState:
    """Length-N vector over {0,1}; 1 means compromised."""

    bits: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.int8)

    @property
    def n(self) -> int:
        return len(self.bits)

    def as_input(self) -> np.ndarray:
        return self.bits.astype(np.float64)


@dataclass
class NodeProfile:
    b: float  # true data size, in [1, 10]
    b_hat: float  # attacker's noisy estimate of b
    c_D: float  # per-node defense cost
    c_A: float  # per-node attack cost


@dataclass
class EconParams:
    alpha_D: float = 10.0
    alpha_A: float = 10.0
    beta_D: float = 1.0
    beta_A: float = 1.0
    gamma: float = 0.98
    bern_p: float = 0.0  # initial per-node compromise probability

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")


def sample_profiles(n_nodes: int, seed: int) -> list:
    """Integer data sizes in [1,10]; estimates and costs get fresh +-Uniform[0,1]
    noise each, clamped to the cost floor."""
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    rng = np.random.default_rng(seed)
    profiles = []
    for _ in range(n_nodes):
        b = float(rng.integers(1, 11))
        b_hat = max(COST_FLOOR, b + rng.choice([-1.0, 1.0]) * rng.uniform(0.0, 1.0))
        c_d = max(COST_FLOOR, b + rng.choice([-1.0, 1.0]) * rng.uniform(0.0, 1.0))
        c_a = max(COST_FLOOR, b_hat + rng.choice([-1.0, 1.0]) * rng.uniform(0.0, 1.0))
        profiles.append(NodeProfile(b=b, b_hat=b_hat, c_D=c_d, c_A=c_a))
    return profiles


def profile_arrays(profiles) -> tuple:
    b = np.array([p.b for p in profiles])
    b_hat = np.array([p.b_hat for p in profiles])
    c_d = np.array([p.c_D for p in profiles])
    c_a = np.array([p.c_A for p in profiles])
    return b, b_hat, c_d, c_a


def delta(a_D: int, a_A: int, n: int) -> np.ndarray:
    """Compromise indicator: 0 exactly at the attacked node when undefended."""
    if not (0 <= a_D < n and 0 <= a_A < n):
        raise ValueError("action ids must be in [0, n)")
    vec = np.ones(n, dtype=np.int8)
    if a_A != a_D:
        vec[a_A] = 0
    return vec


def joint_rewards(a_D: int, a_A: int, profiles, econ: EconParams) -> tuple:
    """Defender and attacker utilities for one joint action."""
    n = len(profiles)
    d = delta(a_D, a_A, n).astype(np.float64)
    b, b_hat, c_d, c_a = profile_arrays(profiles)
    r_d = float(np.sum((econ.alpha_D * b - econ.beta_D * c_d) * d
                       - (econ.alpha_D * b + econ.beta_D * c_d) * (1.0 - d)))
    r_a = float(np.sum((econ.alpha_A * b_hat - econ.beta_A * c_a) * (1.0 - d)
                       - (econ.alpha_A * b_hat + econ.beta_A * c_a) * d))
    return r_d, r_a


def step(state: SecurityState, a_D: int, a_A: int, profiles,
         econ: EconParams) -> tuple:
    """Resolve one joint move: next state, both rewards, and the indicator."""
    n = state.n
    if len(profiles) != n:
        raise ValueError("profiles length must match state length")
    d = delta(a_D, a_A, n)
    r_d, r_a = joint_rewards(a_D, a_A, profiles, econ)
    next_state = SecurityState(bits=1 - d)
    return next_state, r_d, r_a, d


def next_state_bits(a_D: int, a_A: int, n: int) -> np.ndarray:
    return 1 - delta(a_D, a_A, n)


def initial_state(n: int, econ: EconParams, seed: int) -> SecurityState:
    """Independent Bernoulli(bern_p) compromise bits."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    bits = (rng.random(n) < econ.bern_p).astype(np.int8)
    return SecurityState(bits=bits)


def protection_ratio(delta_vec, profiles) -> float:
    """Fraction of total data volume protected this step."""
    if len(profiles) == 0:
        raise ValueError("profiles must be nonempty")
    if len(delta_vec) != len(profiles):
        raise ValueError("delta/profiles length mismatch")
    b = np.array([p.b for p in profiles])
    d = np.asarray(delta_vec, dtype=np.float64)
    return float(np.sum(d * b) / np.sum(b))


def reward_tables(profiles, econ: EconParams) -> tuple:
    """Exhaustive (a_D, a_A) reward matrices; rewards do not depend on the
    current state, so these fully describe one step's payoffs."""
    n = len(profiles)
    r_d = np.empty((n, n))
    r_a = np.empty((n, n))
    for a_d in range(n):
        for a_a in range(n):
            r_d[a_d, a_a], r_a[a_d, a_a] = joint_rewards(a_d, a_a, profiles, econ)
    return r_d, r_a


def reward_bound(profiles, econ: EconParams) -> float:
    """Upper bound on |r_D|: sum of alpha*b + beta*c_D over nodes."""
    b, _, c_d, _ = profile_arrays(profiles)
    return float(np.sum(econ.alpha_D * b + econ.beta_D * c_d))
