"""HTTP service for the human-defender game: 40 rounds against a live DQN
attacker on a 6-node graph.

Two variants differ only in disclosure: reward_aware shows per-node potential
rewards; reward_transition_aware additionally shows the attacker's current
action probabilities (softmax of its Q-values at the present state) before
every round.  Sessions are isolated, seeded from a master seed plus a session
counter, and persisted as append-only JSON lines."""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import secrets
import threading
import time
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import agents, approximator, attack_graph, cognitive, environment as env
from .agents import DqnAgent, EpsilonSchedule, TransitionRecord

N_NODES = 6
ROUNDS = 40
VARIANTS = ("reward_aware", "reward_transition_aware")

ENV_BIND = "CHTDQN_BIND"
ENV_MASTER_SEED = "CHTDQN_MASTER_SEED"
ENV_CHECKPOINT = "CHTDQN_ATTACKER_CHECKPOINT"
ENV_CODE_KEY = "CHTDQN_CODE_KEY"
ENV_SESSION_DIR = "CHTDQN_SESSION_DIR"


@dataclass
class ServiceSettings:
    master_seed: int = 0
    code_key: str = "dev-key"
    checkpoint_path: str | None = None
    session_dir: str | None = None
    live_learning: bool = True
    inv_temperature: float = 1.0

    @classmethod
    def from_env(cls) -> "ServiceSettings":
        return cls(
            master_seed=int(os.environ.get(ENV_MASTER_SEED, "0")),
            code_key=os.environ.get(ENV_CODE_KEY, "dev-key"),
            checkpoint_path=os.environ.get(ENV_CHECKPOINT) or None,
            session_dir=os.environ.get(ENV_SESSION_DIR) or None,
        )


@dataclass
class GameSession:
    id: str
    counter: int
    seed: int
    variant: str
    graph: attack_graph.AttackGraph
    profiles: list
    econ: env.EconParams
    attacker: DqnAgent
    state: env.SecurityState
    round: int = 0
    score: float = 0.0
    history: list = field(default_factory=list)
    created_at: float = field(default_factory=time.time)
    finished_at: float | None = None
    code: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def finished(self) -> bool:
        return self.finished_at is not None


class ActionRequest(BaseModel):
    node: int
    response_time_ms: float


class SessionRequest(BaseModel):
    variant: str


def _attacker_policy(session: GameSession,
                     settings: ServiceSettings) -> list:
    q = approximator.forward(session.attacker.online,
                             session.state.as_input())
    return [float(p) for p in
            cognitive.softmax_policy(q, settings.inv_temperature)]


def _potential_rewards(profiles, econ: env.EconParams) -> list:
    return [float(econ.alpha_D * p.b - econ.beta_D * p.c_D) for p in profiles]


def _view(session: GameSession, settings: ServiceSettings) -> dict:
    view = {
        "variant": session.variant,
        "round": session.round,
        "rounds_total": ROUNDS,
        "graph": attack_graph.to_json(session.graph),
        "potential_rewards": _potential_rewards(session.profiles,
                                                session.econ),
        "cumulative_score": session.score,
    }
    if session.variant == "reward_transition_aware":
        view["attack_probabilities"] = _attacker_policy(session, settings)
    return view


class GameService:
    """Session registry; all HTTP handlers delegate here."""

    def __init__(self, settings: ServiceSettings):
        self.settings = settings
        self.sessions: dict[str, GameSession] = {}
        self._counter = 0
        self._create_lock = threading.Lock()
        if settings.session_dir:
            os.makedirs(settings.session_dir, exist_ok=True)

    def _persist(self, session: GameSession, event: dict) -> None:
        if not self.settings.session_dir:
            return
        path = os.path.join(self.settings.session_dir,
                            f"{session.id}.jsonl")
        with open(path, "a") as fh:
            fh.write(json.dumps(event) + "\n")

    def _new_attacker(self, seed: int) -> DqnAgent:
        schedule = EpsilonSchedule(eps_start=0.9, eps_end=0.05,
                                   decay_rate=2.0, horizon=ROUNDS)
        if self.settings.checkpoint_path:
            agent = agents.load_agent(self.settings.checkpoint_path,
                                      seed=seed)
            if agent.n_nodes != N_NODES:
                raise RuntimeError("checkpoint node count mismatch")
            agent.schedule = schedule
            # 40 live rounds: small batches so updates actually happen.
            agent.batch_size = 8
            return agent
        return DqnAgent(N_NODES, seed, batch_size=8,
                        target_sync_every=10, clip_norm=100.0,
                        schedule=schedule)

    def create_session(self, variant: str) -> GameSession:
        if variant not in VARIANTS:
            raise HTTPException(status_code=400,
                                detail=f"variant must be one of {VARIANTS}")
        with self._create_lock:
            counter = self._counter
            self._counter += 1
        ss = np.random.SeedSequence(self.settings.master_seed,
                                    spawn_key=(counter,))
        s_env, s_atk = [int(c.generate_state(1)[0]) for c in ss.spawn(2)]
        econ = env.EconParams()
        session = GameSession(
            id=secrets.token_urlsafe(16),
            counter=counter,
            seed=self.settings.master_seed,
            variant=variant,
            graph=attack_graph.generate(N_NODES, s_env),
            profiles=env.sample_profiles(N_NODES, s_env),
            econ=econ,
            attacker=self._new_attacker(s_atk),
            state=env.initial_state(N_NODES, econ, s_env + 1),
        )
        self.sessions[session.id] = session
        self._persist(session, {
            "event": "created", "session_id": session.id,
            "variant": variant, "master_seed": self.settings.master_seed,
            "session_counter": counter, "created_at": session.created_at,
        })
        return session

    def _get(self, session_id: str) -> GameSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    def submit_action(self, session_id: str, node: int,
                      response_time_ms: float) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.finished or session.round >= ROUNDS:
                raise HTTPException(status_code=409,
                                    detail="session complete")
            if not 0 <= node < N_NODES:
                raise HTTPException(status_code=400, detail="invalid node")
            eps = agents.epsilon_at(session.attacker.schedule, session.round)
            a_a = session.attacker.act(session.state, eps)
            policy_snapshot = _attacker_policy(session, self.settings)
            next_state, r_d, r_a, delta_vec = env.step(
                session.state, node, a_a, session.profiles, session.econ)
            if 0 in delta_vec:
                attack_graph.record_exploit(session.graph, a_a)
            attack_graph.refresh_probabilities(session.graph)

            if self.settings.live_learning:
                session.attacker.observe(TransitionRecord(
                    session.state, node, a_a, r_d, r_a, next_state))
                agents.train_if_ready(session.attacker, "r_A", "a_A")

            session.score += r_d
            protection = env.protection_ratio(delta_vec, session.profiles)
            session.state = next_state
            session.round += 1

            record = {
                "round": session.round,
                "s": [int(v) for v in next_state.bits],
                "a_D": int(node),
                "a_A": int(a_a),
                "r_D": r_d,
                "r_A": r_a,
                "delta": [int(v) for v in delta_vec],
                "protection": protection,
                "response_time_ms": float(response_time_ms),
                "server_time": time.time(),
                "attacker_policy": policy_snapshot,
                "exploit_probs": [float(p)
                                  for p in session.graph.exploit_probs],
            }
            session.history.append(record)
            self._persist(session, {"event": "round", **record})

            result = {
                "round": session.round,
                "rounds_total": ROUNDS,
                "attacked_node": int(a_a),
                "delta": record["delta"],
                "r_D": r_d,
                "r_A": r_a,
                "cumulative_score": session.score,
                "protection": protection,
            }
            if session.variant == "reward_transition_aware":
                result["attack_probabilities"] = _attacker_policy(
                    session, self.settings)
            return result

    def finalize(self, session_id: str) -> dict:
        session = self._get(session_id)
        with session.lock:
            if session.round < ROUNDS:
                raise HTTPException(status_code=409,
                                    detail="session not complete")
            if session.code is None:
                session.finished_at = time.time()
                session.code = confirmation_code(
                    self.settings.code_key, session.id, session.score,
                    session.finished_at)
                self._persist(session, {
                    "event": "finalized", "score": session.score,
                    "code": session.code,
                    "finished_at": session.finished_at,
                })
            return {"score": session.score, "code": session.code}

    def export_session(self, session_id: str) -> dict:
        session = self._get(session_id)
        elapsed = ((session.finished_at or time.time())
                   - session.created_at)
        return {
            "session_id": session.id,
            "variant": session.variant,
            "master_seed": session.seed,
            "session_counter": session.counter,
            "created_at": session.created_at,
            "finished_at": session.finished_at,
            "elapsed_seconds": elapsed,
            "rounds_completed": session.round,
            "final_score": session.score,
            "confirmation_code": session.code,
            "graph": attack_graph.to_json(session.graph),
            "potential_rewards": _potential_rewards(session.profiles,
                                                    session.econ),
            "history": list(session.history),
        }


def confirmation_code(key: str, session_id: str, score: float,
                      finished_at: float) -> str:
    message = f"{session_id}:{score:.6f}:{finished_at:.3f}".encode()
    return hmac.new(key.encode(), message, hashlib.sha256).hexdigest()


def verify_code(key: str, session_id: str, score: float,
                finished_at: float, code: str) -> bool:
    expected = confirmation_code(key, session_id, score, finished_at)
    return hmac.compare_digest(expected, code)


def create_app(settings: ServiceSettings | None = None) -> FastAPI:
    settings = settings or ServiceSettings.from_env()
    service = GameService(settings)
    app = FastAPI(title="chtdqn game service")
    app.state.service = service

    @app.post("/session", status_code=201)
    def create_session(body: SessionRequest):
        session = service.create_session(body.variant)
        return {"session_id": session.id,
                "view": _view(session, settings)}

    @app.post("/session/{session_id}/action")
    def submit_action(session_id: str, body: ActionRequest):
        return service.submit_action(session_id, body.node,
                                     body.response_time_ms)

    @app.post("/session/{session_id}/finalize")
    def finalize(session_id: str):
        return service.finalize(session_id)

    @app.get("/session/{session_id}/export")
    def export_session(session_id: str):
        return service.export_session(session_id)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "backend": approximator.backend_name}

    return app
