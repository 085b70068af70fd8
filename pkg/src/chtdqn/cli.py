"""Command-line entry points: single runs, sweeps, log reports, the exact
small-instance checker, attacker pretraining, and the game service."""

from __future__ import annotations

import argparse
import json
import sys

from . import agents, orchestrator
from .orchestrator import RunConfig


def _parse_int_list(text: str) -> list:
    return [int(part) for part in text.split(",") if part]


def _parse_range(text: str) -> list:
    """Either 'lo:hi' (inclusive) or a comma list."""
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    return _parse_int_list(text)


def _config_overrides(args, base: dict | None = None) -> dict:
    overrides = dict(base or {})
    if getattr(args, "steps", None) is not None:
        overrides["total_steps"] = args.steps
    if getattr(args, "train_steps", None) is not None:
        overrides["train_steps"] = args.train_steps
    return overrides


def cmd_run(args) -> int:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    base.update(_config_overrides(args))
    base["case"] = args.case
    base["n_nodes"] = args.nodes
    config = orchestrator.config_from_dict(base)
    log = orchestrator.run_case(config, args.seed)
    if args.out:
        orchestrator.write_log(log, args.out)
    print(json.dumps({"metadata": {k: v for k, v in log.metadata.items()},
                      "aggregates": log.aggregates}, indent=2))
    return 0


def cmd_sweep(args) -> int:
    rows = orchestrator.sweep(
        cases=_parse_int_list(args.cases),
        node_counts=_parse_range(args.nodes_range),
        seeds=list(range(args.seeds)),
        overrides=_config_overrides(args),
        processes=args.processes,
    )
    orchestrator.write_sweep_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_report(args) -> int:
    for path in args.logs:
        log = orchestrator.read_log(path)
        recomputed = {
            "avg_protection_train": orchestrator.avg_protection(log, "train"),
            "avg_protection_eval": orchestrator.avg_protection(log, "eval"),
            "avg_protection_all": orchestrator.avg_protection(log, "all"),
            "action_discrepancy_all": orchestrator.action_discrepancy(log,
                                                                      "all"),
            "reselection": orchestrator.reselection_stats(log),
        }
        print(json.dumps({"path": path,
                          "metadata": log.metadata,
                          "stored": log.aggregates,
                          "recomputed": recomputed}, indent=2))
    return 0


def cmd_oracle(args) -> int:
    from . import oracle

    report = oracle.oracle_report(seed=args.seed,
                                  finite_budget=args.budget)
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_pretrain(args) -> int:
    """Train a DQN attacker against a DQN defender and save the checkpoint."""
    config = RunConfig(case=4, n_nodes=args.nodes,
                       total_steps=args.steps, train_steps=args.steps)
    import numpy as np

    from . import environment as env
    from .agents import DqnAgent, TransitionRecord

    seeds = orchestrator._spawn_seeds(args.seed)
    s_env, s_def, s_atk = seeds[0], seeds[1], seeds[2]
    profiles = env.sample_profiles(args.nodes, s_env)
    state = env.initial_state(args.nodes, config.econ, s_env + 1)
    defender = orchestrator._make_agent(config, s_def)
    attacker = orchestrator._make_agent(config, s_atk)
    for t in range(args.steps):
        eps = agents.epsilon_at(config.schedule, t)
        a_d = defender.act(state, eps)
        a_a = attacker.act(state, eps)
        next_state, r_d, r_a, _ = env.step(state, a_d, a_a, profiles,
                                           config.econ)
        record = TransitionRecord(state, a_d, a_a, r_d, r_a, next_state)
        defender.observe(record)
        attacker.observe(record)
        agents.train_if_ready(defender, "r_D", "a_D")
        agents.train_if_ready(attacker, "r_A", "a_A")
        state = next_state
    agents.save_agent(attacker, args.out)
    print(f"saved attacker checkpoint to {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .game_service import ENV_BIND, ServiceSettings, create_app
    import os

    bind = args.bind or os.environ.get(ENV_BIND, "127.0.0.1:8000")
    host, _, port = bind.rpartition(":")
    app = create_app(ServiceSettings.from_env())
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chtdqn",
        description="attacker/defender security-game simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario case")
    p_run.add_argument("--case", type=int, required=True, choices=(1, 2, 3, 4))
    p_run.add_argument("--nodes", type=int, default=6)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--steps", type=int, default=None)
    p_run.add_argument("--train-steps", type=int, default=None)
    p_run.add_argument("--config", help="JSON config file; flags override")
    p_run.add_argument("--out", help="write JSON-lines step log here")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid of cases x sizes x seeds")
    p_sweep.add_argument("--cases", default="1,2,3,4")
    p_sweep.add_argument("--nodes-range", default="2:10",
                         help="'lo:hi' inclusive or comma list")
    p_sweep.add_argument("--seeds", type=int, default=10,
                         help="number of seeds (0..n-1)")
    p_sweep.add_argument("--steps", type=int, default=None)
    p_sweep.add_argument("--train-steps", type=int, default=None)
    p_sweep.add_argument("--processes", type=int, default=None)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_report = sub.add_parser("report",
                              help="recompute aggregates from step logs")
    p_report.add_argument("logs", nargs="+")
    p_report.set_defaults(func=cmd_report)

    p_oracle = sub.add_parser("oracle",
                              help="exact small-instance dominance report")
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--budget", type=int, default=200_000)
    p_oracle.add_argument("--out")
    p_oracle.set_defaults(func=cmd_oracle)

    p_pre = sub.add_parser("pretrain",
                           help="pretrain an attacker checkpoint")
    p_pre.add_argument("--nodes", type=int, default=6)
    p_pre.add_argument("--steps", type=int, default=1000)
    p_pre.add_argument("--seed", type=int, default=0)
    p_pre.add_argument("--out", required=True)
    p_pre.set_defaults(func=cmd_pretrain)

    p_serve = sub.add_parser("serve", help="start the game HTTP service")
    p_serve.add_argument("--bind", help="host:port (default env or 127.0.0.1:8000)")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
