"""Scenario runner: the four defender/attacker case matchups, per-step
structured logging, reported metrics, and the seed/size sweep.

Case map: 1 = CHT defender vs random attacker, 2 = CHT defender vs DQN
attacker, 3 = DQN defender vs random attacker, 4 = DQN defender vs DQN
attacker.  One continuous run, no episode resets: epsilon-greedy through the
training phase, pure exploitation afterwards."""

from __future__ import annotations

import csv
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import agents, approximator, attack_graph, cognitive, environment as env
from .agents import DqnAgent, EpsilonSchedule, TransitionRecord

CASES = (1, 2, 3, 4)
PHASES = ("train", "eval", "all")


@dataclass
class RunConfig:
    case: int
    n_nodes: int = 6
    total_steps: int = 2000
    train_steps: int = 1000
    graph_refresh_every: int = 100
    edge_density: float = 0.4
    econ: env.EconParams = field(default_factory=env.EconParams)
    cognitive: cognitive.CognitiveConfig = field(
        default_factory=cognitive.CognitiveConfig)
    schedule: EpsilonSchedule = field(default_factory=EpsilonSchedule)
    batch_size: int = 64
    learning_rate: float = 0.05
    # Long sync interval plus norm clipping keep plain-SGD Q-learning from
    # drifting over a single-phase run; both remain fully configurable.
    target_sync_every: int = 1000
    clip_norm: float | None = 100.0
    buffer_capacity: int = 1_000_000

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"case must be one of {CASES}")
        if self.n_nodes < 1:
            raise ValueError("n_nodes must be >= 1")
        if not 0 <= self.train_steps <= self.total_steps:
            raise ValueError("need 0 <= train_steps <= total_steps")
        if self.graph_refresh_every < 1:
            raise ValueError("graph_refresh_every must be >= 1")

    @property
    def defender_is_cht(self) -> bool:
        return self.case in (1, 2)

    @property
    def attacker_is_dqn(self) -> bool:
        return self.case in (2, 4)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "n_nodes": self.n_nodes,
            "total_steps": self.total_steps,
            "train_steps": self.train_steps,
            "graph_refresh_every": self.graph_refresh_every,
            "edge_density": self.edge_density,
            "econ": vars(self.econ).copy(),
            "cognitive": vars(self.cognitive).copy(),
            "schedule": vars(self.schedule).copy(),
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "target_sync_every": self.target_sync_every,
            "clip_norm": self.clip_norm,
            "buffer_capacity": self.buffer_capacity,
        }


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data)
    if "econ" in data:
        data["econ"] = env.EconParams(**data["econ"])
    if "cognitive" in data:
        data["cognitive"] = cognitive.CognitiveConfig(**data["cognitive"])
    if "schedule" in data:
        data["schedule"] = EpsilonSchedule(**data["schedule"])
    return RunConfig(**data)


def config_hash(config: RunConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


@dataclass
class RunLog:
    steps: list  # per-step dict records
    aggregates: dict
    metadata: dict


def _phase_slice(log: RunLog, phase: str) -> list:
    if phase not in PHASES:
        raise ValueError(f"phase must be one of {PHASES}")
    train_steps = log.metadata["train_steps"]
    if phase == "train":
        return log.steps[:train_steps]
    if phase == "eval":
        return log.steps[train_steps:]
    return log.steps


def running_average(series, window: int = 100) -> list:
    """Trailing mean over the last `window` points; truncated prefix early on."""
    if window < 1:
        raise ValueError("window must be >= 1")
    out = []
    acc = 0.0
    series = list(series)
    for t, value in enumerate(series):
        acc += value
        if t >= window:
            acc -= series[t - window]
        out.append(acc / min(t + 1, window))
    return out


def avg_protection(log: RunLog, phase: str = "all") -> float:
    steps = _phase_slice(log, phase)
    if not steps:
        return float("nan")
    return float(np.mean([rec["protection"] for rec in steps]))


def action_discrepancy(log: RunLog, phase: str = "all") -> float:
    """Total-variation distance between the two empirical action distributions."""
    steps = _phase_slice(log, phase)
    if not steps:
        raise ValueError("phase holds no steps")
    n = log.metadata["n_nodes"]
    f_d = np.bincount([rec["a_D"] for rec in steps], minlength=n)
    f_a = np.bincount([rec["a_A"] for rec in steps], minlength=n)
    return float(0.5 * np.abs(f_d / len(steps) - f_a / len(steps)).sum())


def reselection_stats(log: RunLog) -> tuple:
    """(repeat-after-success, repeat-after-failure) rates for the defender.

    Success at t means the defender blocked the attack on its chosen node;
    failure means the attack landed elsewhere.  NaN when a condition never
    occurs before the final step."""
    if len(log.steps) < 2:
        raise ValueError("need at least 2 steps")
    succ_repeat, succ_total = 0, 0
    fail_repeat, fail_total = 0, 0
    for prev, cur in zip(log.steps[:-1], log.steps[1:]):
        repeated = cur["a_D"] == prev["a_D"]
        if prev["a_A"] == prev["a_D"]:
            succ_total += 1
            succ_repeat += repeated
        else:
            fail_total += 1
            fail_repeat += repeated
    p_success = succ_repeat / succ_total if succ_total else float("nan")
    p_failure = fail_repeat / fail_total if fail_total else float("nan")
    return p_success, p_failure


def _spawn_seeds(seed: int, count: int = 5) -> list:
    ss = np.random.SeedSequence(seed)
    return [int(child.generate_state(1)[0]) for child in ss.spawn(count)]


def _make_agent(config: RunConfig, seed: int) -> DqnAgent:
    return DqnAgent(
        config.n_nodes, seed,
        batch_size=config.batch_size, gamma=config.econ.gamma,
        learning_rate=config.learning_rate,
        target_sync_every=config.target_sync_every,
        buffer_capacity=config.buffer_capacity,
        schedule=config.schedule, clip_norm=config.clip_norm)


def run_case(config: RunConfig, seed: int) -> RunLog:
    """One full simulation: both agents observe s, act simultaneously, the
    environment resolves, then training updates run (training phase only)."""
    started = time.time()
    n = config.n_nodes
    s_env, s_def, s_atk, s_rnd, s_shadow = _spawn_seeds(seed)

    profiles = env.sample_profiles(n, s_env)
    graph = attack_graph.generate(n, s_env, config.edge_density)
    reward_matrix, _ = env.reward_tables(profiles, config.econ)
    state = env.initial_state(n, config.econ, s_env + 1)

    defender = _make_agent(config, s_def)
    attacker = _make_agent(config, s_atk) if config.attacker_is_dqn else None
    random_rng = np.random.default_rng(s_rnd)

    model = None
    shadow = None
    if config.defender_is_cht:
        mode = config.cognitive.attacker_model_mode
        if mode in ("learned", "blended"):
            shadow = _make_agent(config, s_shadow)
        model = cognitive.AttackerModel(
            mode, n, attacker=attacker, shadow=shadow, graph=graph,
            config=config.cognitive)

    steps = []
    for t in range(config.total_steps):
        training = t < config.train_steps
        eps = agents.epsilon_at(config.schedule, t) if training else 0.0

        if config.defender_is_cht:
            policy = model.policies_at(state.as_input()[None, :])[0]
            q1 = cognitive.level1_q_vector(
                state, policy, defender.target, reward_matrix,
                config.econ.gamma)
            a_d = agents.select_action(q1, eps, defender.rng)
        else:
            a_d = defender.act(state, eps)
        if attacker is not None:
            a_a = attacker.act(state, eps)
        else:
            a_a = agents.random_attacker_action(n, random_rng)

        next_state, r_d, r_a, delta_vec = env.step(
            state, a_d, a_a, profiles, config.econ)
        if 0 in delta_vec:
            attack_graph.record_exploit(graph, a_a)
        if (t + 1) % config.graph_refresh_every == 0:
            attack_graph.refresh_probabilities(graph)

        if training:
            record = TransitionRecord(state, a_d, a_a, r_d, r_a, next_state)
            defender.observe(record)
            if config.defender_is_cht:
                batch = defender.buffer.sample(defender.batch_size,
                                               defender.rng)
                if batch is not None:
                    cognitive.cht_train_step(
                        defender, batch, model, profiles, config.econ,
                        reward_matrix=reward_matrix)
                if shadow is not None:
                    shadow.observe(record)
                    agents.train_if_ready(shadow, "r_A", "a_A")
            else:
                agents.train_if_ready(defender, "r_D", "a_D")
            if attacker is not None:
                attacker.observe(record)
                agents.train_if_ready(attacker, "r_A", "a_A")

        steps.append({
            "t": t,
            "s": [int(v) for v in state.bits],
            "a_D": int(a_d),
            "a_A": int(a_a),
            "r_D": r_d,
            "r_A": r_a,
            "delta": [int(v) for v in delta_vec],
            "protection": env.protection_ratio(delta_vec, profiles),
            "eps": eps,
        })
        state = next_state

    log = RunLog(steps=steps, aggregates={}, metadata={
        "config_hash": config_hash(config),
        "seed": seed,
        "case": config.case,
        "n_nodes": n,
        "train_steps": config.train_steps,
        "total_steps": config.total_steps,
        "backend": approximator.backend_name,
        "wall_clock_s": None,
    })
    eval_steps = _phase_slice(log, "eval")
    p_success, p_failure = reselection_stats(log)
    log.aggregates = {
        "avg_protection_train": avg_protection(log, "train"),
        "avg_protection_eval": avg_protection(log, "eval"),
        "avg_protection_all": avg_protection(log, "all"),
        "action_discrepancy_all": action_discrepancy(log, "all"),
        "mean_r_D_eval": float(np.mean([r["r_D"] for r in eval_steps]))
        if eval_steps else float("nan"),
        "mean_r_A_eval": float(np.mean([r["r_A"] for r in eval_steps]))
        if eval_steps else float("nan"),
        "reselect_after_success": p_success,
        "reselect_after_failure": p_failure,
        "total_exploits": int(graph.exploit_counts.sum()),
    }
    log.metadata["wall_clock_s"] = time.time() - started
    return log


def log_hash(log: RunLog) -> str:
    """Content hash over the step records plus deterministic metadata."""
    stable_meta = {k: v for k, v in log.metadata.items()
                   if k != "wall_clock_s"}
    blob = json.dumps({"steps": log.steps, "aggregates": log.aggregates,
                       "metadata": stable_meta}, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def write_log(log: RunLog, path: str) -> None:
    """JSON-lines: one metadata line, one aggregates line, then step records."""
    with open(path, "w") as fh:
        fh.write(json.dumps({"metadata": log.metadata}) + "\n")
        fh.write(json.dumps({"aggregates": log.aggregates}) + "\n")
        for rec in log.steps:
            fh.write(json.dumps(rec) + "\n")


def read_log(path: str) -> RunLog:
    with open(path) as fh:
        metadata = json.loads(fh.readline())["metadata"]
        aggregates = json.loads(fh.readline())["aggregates"]
        steps = [json.loads(line) for line in fh if line.strip()]
    return RunLog(steps=steps, aggregates=aggregates, metadata=metadata)


SWEEP_METRICS = ("avg_protection", "action_discrepancy")


def _sweep_cell(args):
    case, n_nodes, seeds, overrides = args
    config = RunConfig(case=case, n_nodes=n_nodes, **overrides)
    logs = [run_case(config, s) for s in seeds]
    values = {
        "avg_protection": [avg_protection(log, "all") for log in logs],
        "action_discrepancy": [action_discrepancy(log, "all") for log in logs],
    }
    rows = []
    for metric in SWEEP_METRICS:
        vals = values[metric]
        rows.append({
            "case": case, "n_nodes": n_nodes, "seed_count": len(seeds),
            "metric": metric,
            "mean": float(np.mean(vals)),
            "std": float(np.std(vals)),
        })
    return rows


def sweep(cases, node_counts, seeds, overrides: dict | None = None,
          processes: int | None = None) -> list:
    """Mean/std of each reported metric per (case, n_nodes) cell."""
    cases = list(cases)
    node_counts = list(node_counts)
    seeds = list(seeds)
    if not cases or not node_counts or not seeds:
        raise ValueError("cases, node_counts and seeds must be nonempty")
    cells = [(case, n, seeds, overrides or {})
             for case in cases for n in node_counts]
    if processes and processes > 1:
        with ProcessPoolExecutor(max_workers=processes) as pool:
            results = list(pool.map(_sweep_cell, cells))
    else:
        results = [_sweep_cell(cell) for cell in cells]
    return [row for rows in results for row in rows]


def write_sweep_csv(rows, path: str) -> None:
    fields = ["case", "n_nodes", "seed_count", "metric", "mean", "std"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in fields})
