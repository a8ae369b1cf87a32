import numpy as np
import pytest

import hetsim


def zero_actions(env):
    return np.zeros(env.n_agents * env.action_width)


def test_api_version_is_a_string():
    assert isinstance(hetsim.API_VERSION, str)
    assert hetsim.API_VERSION.count(".") == 2


def test_presets():
    assert hetsim.preset("R1") == hetsim.Preset.R1
    assert hetsim.preset("R4") == hetsim.Preset.R4
    with pytest.raises(hetsim.ConfigError):
        hetsim.preset("R9")


def test_reset_is_deterministic_with_expected_widths():
    env = hetsim.make_env()
    a = hetsim.reset(env, 42)
    b = hetsim.reset(env, 42)
    assert a == b
    assert [len(o) for o in a] == [34, 34, 35]
    assert env.observation_widths == [34, 34, 35]
    assert env.action_width == 18


def test_step_returns_observations_rewards_done_info():
    env = hetsim.make_env()
    hetsim.reset(env, 1)
    obs, rewards, done, info = hetsim.step(env, zero_actions(env))
    assert len(obs) == 3
    assert len(rewards) == 3
    assert done is False
    assert info["step"] == 1
    assert len(info["terms"]) == 3
    for dist, goal, coll, comm in info["terms"]:
        assert dist == 0.0 and goal == 0.0 and coll == 0.0
    assert isinstance(info["events"], list)


def test_two_dimensional_actions_match_flat_actions():
    rng = np.random.default_rng(0)
    acts = rng.uniform(-1, 1, size=(3, 18))
    env_a = hetsim.make_env()
    env_b = hetsim.make_env()
    hetsim.reset(env_a, 5)
    hetsim.reset(env_b, 5)
    out_a = hetsim.step(env_a, acts)
    out_b = hetsim.step(env_b, acts.ravel())
    assert out_a[0] == out_b[0]
    assert out_a[1] == out_b[1]


def test_wrong_action_width_names_the_expected_width():
    env = hetsim.make_env()
    hetsim.reset(env, 1)
    with pytest.raises(ValueError, match="width 18"):
        hetsim.step(env, np.zeros((3, 17)))
    with pytest.raises(ValueError, match="width 18"):
        hetsim.step(env, np.zeros(10))


def test_closed_handle_fails_cleanly():
    env = hetsim.make_env()
    hetsim.reset(env, 1)
    hetsim.close(env)
    assert env.closed
    with pytest.raises(RuntimeError, match="closed"):
        hetsim.reset(env, 1)
    with pytest.raises(RuntimeError, match="closed"):
        hetsim.step(env, zero_actions(env))
    with pytest.raises(RuntimeError, match="closed"):
        hetsim.close(env)


def test_step_before_reset_fails():
    env = hetsim.make_env()
    with pytest.raises(RuntimeError, match="reset"):
        hetsim.step(env, zero_actions(env))


def test_stepping_a_finished_episode_raises():
    env = hetsim.make_env()
    hetsim.reset(env, 2)
    done = False
    while not done:
        _, _, done, _ = hetsim.step(env, zero_actions(env))
    with pytest.raises(hetsim.StepError):
        hetsim.step(env, zero_actions(env))


def test_config_file_and_errors(tmp_path):
    cfg = tmp_path / "small.toml"
    cfg.write_text("n_h = 1\nn_d = 1\nd_c = 4\n")
    env = hetsim.make_env(str(cfg), preset=hetsim.Preset.R2)
    assert env.preset == hetsim.Preset.R2
    assert [len(o) for o in hetsim.reset(env, 0)] == [22, 23]
    assert env.action_width == 6
    bad = tmp_path / "bad.toml"
    bad.write_text("bogus = 1\n")
    with pytest.raises(hetsim.ConfigError):
        hetsim.make_env(str(bad))


def test_hundred_step_rollout_matches_native_run():
    rng = np.random.default_rng(11)
    actions = rng.uniform(-1.2, 1.2, size=(100, 3 * 18))
    native_rewards, native_positions = hetsim.native_rollout(None, 9, actions)
    env = hetsim.make_env()
    hetsim.reset(env, 9)
    rewards, positions = [], []
    for row in actions:
        _, r, done, info = hetsim.step(env, row)
        rewards.append(r)
        positions.append([c for p in info["positions"] for c in p])
        if done:
            break
    assert rewards == native_rewards
    assert positions == native_positions


def test_batch_is_independent_of_jobs():
    serial = hetsim.run_batch(None, list(range(20)), "greedy", 100, 1)
    parallel = hetsim.run_batch(None, list(range(20)), "greedy", 100, 4)
    assert serial == parallel
    assert len(serial) == 20
    assert all(len(m["targets_acquired_by_step"]) == 100 for m in serial)
