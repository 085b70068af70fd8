import numpy as np
import pytest

from chtdqn import environment as env


def test_sample_profiles_ranges():
    profiles = env.sample_profiles(50, seed=0)
    for p in profiles:
        assert p.b == int(p.b) and 1 <= p.b <= 10
        assert abs(p.b_hat - p.b) <= 1.0 or p.b_hat == env.COST_FLOOR
        assert p.c_D > 0 and p.c_A > 0


def test_sample_profiles_deterministic():
    a = env.sample_profiles(8, seed=4)
    b = env.sample_profiles(8, seed=4)
    assert [(p.b, p.b_hat, p.c_D, p.c_A) for p in a] == \
        [(p.b, p.b_hat, p.c_D, p.c_A) for p in b]


def test_sample_profiles_rejects_zero():
    with pytest.raises(ValueError):
        env.sample_profiles(0, seed=0)


def test_delta_examples():
    assert env.delta(1, 0, 3).tolist() == [0, 1, 1]
    assert env.delta(0, 0, 3).tolist() == [1, 1, 1]
    assert env.delta(0, 0, 1).tolist() == [1]


def test_delta_rejects_out_of_range():
    with pytest.raises(ValueError):
        env.delta(3, 0, 3)
    with pytest.raises(ValueError):
        env.delta(0, -1, 3)


def test_step_reward_examples(two_node_profiles, econ):
    state = env.SecurityState(bits=np.zeros(2))
    nxt, r_d, _, d = env.step(state, 0, 0, two_node_profiles, econ)
    assert d.tolist() == [1, 1]
    assert r_d == 77.0  # (50-2)+(30-1)
    assert nxt.bits.tolist() == [0, 0]

    nxt, r_d, r_a, d = env.step(state, 1, 0, two_node_profiles, econ)
    assert d.tolist() == [0, 1]
    assert r_d == -23.0  # -(50+2)+(30-1)
    assert r_a == 17.0  # (50-2)-(30+1)
    assert nxt.bits.tolist() == [1, 0]


def test_step_dimension_mismatch(two_node_profiles, econ):
    state = env.SecurityState(bits=np.zeros(3))
    with pytest.raises(ValueError):
        env.step(state, 0, 0, two_node_profiles, econ)


def test_initial_state_degenerate():
    zeros = env.initial_state(5, env.EconParams(bern_p=0.0), seed=0)
    ones = env.initial_state(5, env.EconParams(bern_p=1.0), seed=0)
    assert zeros.bits.tolist() == [0] * 5
    assert ones.bits.tolist() == [1] * 5
    again = env.initial_state(5, env.EconParams(bern_p=0.5), seed=3)
    assert again.bits.tolist() == \
        env.initial_state(5, env.EconParams(bern_p=0.5), seed=3).bits.tolist()


def test_protection_ratio_examples():
    b5 = [env.NodeProfile(5, 5, 1, 1), env.NodeProfile(5, 5, 1, 1)]
    b91 = [env.NodeProfile(9, 9, 1, 1), env.NodeProfile(1, 1, 1, 1)]
    three = [env.NodeProfile(2, 2, 1, 1)] * 3
    assert env.protection_ratio([1, 1, 1], three) == 1.0
    assert env.protection_ratio([0, 1], b5) == 0.5
    assert env.protection_ratio([0, 1], b91) == pytest.approx(0.1, abs=1e-12)


def test_protection_ratio_rejects_empty():
    with pytest.raises(ValueError):
        env.protection_ratio([], [])


def test_reward_bound_holds(econ):
    profiles = env.sample_profiles(5, seed=9)
    bound = env.reward_bound(profiles, econ)
    r_d_table, _ = env.reward_tables(profiles, econ)
    assert np.abs(r_d_table).max() <= bound + 1e-9


def test_matched_action_maximizes_defender_reward(econ):
    profiles = env.sample_profiles(4, seed=2)
    r_d, _ = env.reward_tables(profiles, econ)
    for a in range(4):
        assert r_d[a, a] == r_d.max()


def test_reward_tables_match_step(two_node_profiles, econ):
    r_d, r_a = env.reward_tables(two_node_profiles, econ)
    state = env.SecurityState(bits=np.zeros(2))
    for a_d in range(2):
        for a_a in range(2):
            _, rd, ra, _ = env.step(state, a_d, a_a, two_node_profiles, econ)
            assert r_d[a_d, a_a] == rd
            assert r_a[a_d, a_a] == ra


def test_econ_rejects_bad_gamma():
    with pytest.raises(ValueError):
        env.EconParams(gamma=1.0)
