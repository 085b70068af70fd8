import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from chtdqn import approximator, cognitive
from chtdqn.game_service import (ROUNDS, ServiceSettings, create_app,
                                 verify_code)


@pytest.fixture
def client(tmp_path):
    settings = ServiceSettings(master_seed=11, code_key="test-key",
                               session_dir=str(tmp_path))
    app = create_app(settings)
    with TestClient(app) as c:
        c.app = app
        yield c


def start(client, variant="reward_aware"):
    r = client.post("/session", json={"variant": variant})
    assert r.status_code == 201
    return r.json()["session_id"], r.json()["view"]


def play_round(client, sid, node=0, rt=100.0):
    return client.post(f"/session/{sid}/action",
                       json={"node": node, "response_time_ms": rt})


def test_healthz(client):
    body = client.get("/healthz").json()
    assert body["status"] == "ok"


def test_variant_gates_probability_field(client):
    _, view1 = start(client, "reward_aware")
    assert "attack_probabilities" not in view1
    _, view2 = start(client, "reward_transition_aware")
    probs = view2["attack_probabilities"]
    assert len(probs) == 6
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)


def test_unknown_variant_rejected(client):
    assert client.post("/session", json={"variant": "x"}).status_code == 400


def test_sessions_have_distinct_ids(client):
    a, _ = start(client)
    b, _ = start(client)
    assert a != b


def test_round_resolution_and_score(client):
    sid, view = start(client)
    result = play_round(client, sid, node=2).json()
    assert result["round"] == 1
    assert 0 <= result["attacked_node"] < 6
    assert len(result["delta"]) == 6
    if result["attacked_node"] == 2:
        assert result["delta"] == [1] * 6
        assert result["protection"] == 1.0
    assert result["cumulative_score"] == result["r_D"]


def test_invalid_node_and_unknown_session(client):
    sid, _ = start(client)
    assert play_round(client, sid, node=6).status_code == 400
    assert play_round(client, "nope", node=0).status_code == 404


def test_forty_first_action_conflicts(client):
    sid, _ = start(client)
    for i in range(ROUNDS):
        assert play_round(client, sid, node=i % 6).status_code == 200
    assert play_round(client, sid, node=0).status_code == 409


def test_premature_finalize_conflicts(client):
    sid, _ = start(client)
    assert client.post(f"/session/{sid}/finalize").status_code == 409


def test_finalize_idempotent_and_verifiable(client):
    sid, _ = start(client)
    for i in range(ROUNDS):
        play_round(client, sid, node=i % 6)
    first = client.post(f"/session/{sid}/finalize").json()
    second = client.post(f"/session/{sid}/finalize").json()
    assert first == second
    export = client.get(f"/session/{sid}/export").json()
    assert verify_code("test-key", sid, export["final_score"],
                       export["finished_at"], first["code"])
    assert not verify_code("test-key", sid, export["final_score"] + 1,
                           export["finished_at"], first["code"])


def test_export_contents(client):
    sid, _ = start(client, "reward_transition_aware")
    for i in range(3):
        play_round(client, sid, node=i, rt=250.0 + i)
    export = client.get(f"/session/{sid}/export").json()
    assert export["rounds_completed"] == 3
    assert len(export["history"]) == 3
    for rec in export["history"]:
        assert set(rec) >= {"s", "a_D", "a_A", "r_D", "r_A", "delta",
                            "protection", "response_time_ms", "server_time",
                            "attacker_policy", "exploit_probs"}
    total = sum(rec["r_D"] for rec in export["history"])
    assert total == pytest.approx(export["final_score"], abs=1e-9)
    assert export["elapsed_seconds"] >= 0.0
    assert client.get("/session/none/export").status_code == 404


def test_disclosed_probabilities_match_attacker_q(client):
    sid, _ = start(client, "reward_transition_aware")
    result = play_round(client, sid, node=1).json()
    service = client.app.state.service
    session = service.sessions[sid]
    q = approximator.forward(session.attacker.online,
                             session.state.as_input())
    expected = cognitive.softmax_policy(q, 1.0)
    assert np.allclose(result["attack_probabilities"], expected, atol=1e-6)


def test_variant1_round_result_has_no_probabilities(client):
    sid, _ = start(client, "reward_aware")
    result = play_round(client, sid).json()
    assert "attack_probabilities" not in result


def test_session_isolation(client):
    sid_a, _ = start(client)
    sid_b, _ = start(client)
    ra = play_round(client, sid_a, node=0).json()
    rb = play_round(client, sid_b, node=0).json()
    play_round(client, sid_a, node=1)
    export_b = client.get(f"/session/{sid_b}/export").json()
    assert export_b["rounds_completed"] == 1
    assert ra["round"] == rb["round"] == 1


def test_sessions_persist_as_jsonl(client, tmp_path):
    sid, _ = start(client)
    play_round(client, sid)
    path = tmp_path / f"{sid}.jsonl"
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert lines[0]["event"] == "created"
    assert lines[1]["event"] == "round"
