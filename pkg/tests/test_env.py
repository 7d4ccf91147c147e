import numpy as np
import pytest

from iscm.env import EnvConfig, PushWorld, default_env_config
from iscm.errors import ConfigurationError, UsageError
from iscm.materials import CUBE_COLORS, make_cube


def greedy_pusher(env):
    """Steer behind the cube farthest inside the circle and push it outward."""
    center = np.array(env.config.circle_center)
    targets = [c for c in env.cubes
               if np.linalg.norm(c.position - center) <= env.config.circle_radius]
    if not targets:
        return np.zeros(2)
    cube = min(targets, key=lambda c: np.linalg.norm(c.position - center))
    outward = cube.position - center
    if np.linalg.norm(outward) < 1e-9:
        outward = np.array([0.0, 1.0])
    outward = outward / np.linalg.norm(outward)
    spec = env.config.cube_specs[0]
    behind = cube.position - outward * (spec.side / 2 + env.config.effector_radius + 0.01)
    to_behind = behind - env._effector_pos
    if np.linalg.norm(to_behind) > 0.03:
        action = to_behind * 8.0
    else:
        action = outward
    return np.clip(action, -1.0, 1.0)


def run_episode(env, policy, seed=None):
    env.reset(seed=seed)
    total, steps = 0.0, 0
    done = False
    while not done:
        result = env.step(policy(env))
        total += result.extrinsic_reward
        steps += 1
        done = result.done
    return total, steps, env.is_success()


class TestReset:
    def test_same_seed_gives_identical_observations(self):
        env = PushWorld(default_env_config("three-cubes"))
        a = env.reset(seed=7)
        b = env.reset(seed=7)
        assert all(np.array_equal(x, y) for x, y in zip(a.frames, b.frames))
        assert np.array_equal(a.visual, b.visual)

    def test_three_cubes_start_inside_circle(self):
        cfg = default_env_config("three-cubes")
        env = PushWorld(cfg)
        env.reset(seed=3)
        center = np.array(cfg.circle_center)
        for cube in env.cubes:
            assert np.linalg.norm(cube.position - center) < cfg.circle_radius

    def test_circle_smaller_than_cube_is_rejected(self):
        with pytest.raises(ConfigurationError):
            EnvConfig(circle_radius=0.05, cube_specs=(make_cube("wood", side=0.08),))

    def test_effector_starts_at_home_outside_circle(self):
        cfg = default_env_config("ceramic")
        env = PushWorld(cfg)
        env.reset(seed=0)
        home = np.array(cfg.effector_home)
        assert np.array_equal(env._effector_pos, home)
        assert np.linalg.norm(home - np.array(cfg.circle_center)) > cfg.circle_radius


class TestStep:
    def test_zero_action_static_scene(self):
        env = PushWorld(default_env_config("ceramic"))
        env.reset(seed=1)
        result = env.step(np.zeros(2))
        assert result.extrinsic_reward == -0.02
        assert result.impulses == []
        assert not result.done

    def test_full_episode_without_success_returns_minus_one(self):
        env = PushWorld(default_env_config("ceramic"))
        total, steps, success = run_episode(env, lambda e: np.zeros(2), seed=1)
        assert not success
        assert steps == 50
        assert total == pytest.approx(-1.0)

    def test_scripted_push_succeeds_and_return_matches_rule(self):
        env = PushWorld(default_env_config("ceramic"))
        total, steps, success = run_episode(env, greedy_pusher, seed=5)
        assert success
        assert steps < 50
        assert total == pytest.approx(1.0 - steps * (1.0 / 50.0))

    def test_scripted_push_clears_three_cubes(self):
        env = PushWorld(default_env_config("three-cubes"))
        total, steps, success = run_episode(env, greedy_pusher, seed=11)
        assert success
        assert total == pytest.approx(1.0 - steps * 0.02)

    def test_step_after_done_raises(self):
        env = PushWorld(default_env_config("ceramic"))
        run_episode(env, lambda e: np.zeros(2), seed=2)
        with pytest.raises(UsageError):
            env.step(np.zeros(2))

    def test_reward_accounting_random_policy(self):
        cfg = default_env_config("ceramic", seed=9)
        env = PushWorld(cfg)
        rng = np.random.default_rng(0)
        for _ in range(60):
            total, steps, success = run_episode(env, lambda e: rng.uniform(-1, 1, 2))
            expected = (1.0 if success else 0.0) - steps * (1.0 / 50.0)
            assert total == pytest.approx(expected, abs=1e-12)
            assert steps <= 50

    def test_impulses_are_positive_and_above_threshold(self):
        cfg = default_env_config("three-cubes", seed=4)
        env = PushWorld(cfg)
        env.reset()
        seen = 0
        for _ in range(50):
            result = env.step(greedy_pusher(env))
            for event in result.impulses:
                assert event.magnitude > cfg.sound_threshold > 0
                seen += 1
            if result.done:
                break
        assert seen > 0


class TestDeterminism:
    def test_identical_trajectories_from_same_seed(self):
        actions = np.random.default_rng(12).uniform(-1, 1, (30, 2))
        traces = []
        for _ in range(2):
            env = PushWorld(default_env_config("three-cubes"))
            env.reset(seed=21)
            rows = []
            for a in actions:
                r = env.step(a)
                rows.append((r.extrinsic_reward, r.done, tuple(r.impulses),
                             r.observation.visual.tobytes()))
                if r.done:
                    break
            traces.append(rows)
        assert traces[0] == traces[1]

    def test_episode_seed_sequence_is_deterministic(self):
        envs = [PushWorld(default_env_config("ceramic", seed=33)) for _ in range(2)]
        for _ in range(3):
            a = envs[0].reset()
            b = envs[1].reset()
            assert np.array_equal(a.visual, b.visual)


class TestPhysicsInvariants:
    def test_kinetic_energy_never_increases_with_idle_effector(self):
        cfg = default_env_config("three-cubes")
        env = PushWorld(cfg)
        env.reset(seed=8)
        rng = np.random.default_rng(3)
        for cube in env.cubes:
            cube.velocity[:] = rng.uniform(-0.8, 0.8, 2)
        energy = env.kinetic_energy()
        for _ in range(30):
            if env._done:
                break
            env.step(np.zeros(2))
            new_energy = env.kinetic_energy()
            assert new_energy <= energy + 1e-12
            energy = new_energy

    def test_cubes_stay_on_table(self):
        cfg = default_env_config("three-cubes", seed=14)
        env = PushWorld(cfg)
        env.reset()
        rng = np.random.default_rng(7)
        bound = cfg.table_half_extent
        for _ in range(50):
            result = env.step(rng.uniform(-1, 1, 2))
            for spec, cube in zip(cfg.cube_specs, env.cubes):
                assert np.all(np.abs(cube.position) <= bound - spec.side / 2 + 1e-9)
            if result.done:
                break


class TestSuccessPredicate:
    def _env(self):
        env = PushWorld(default_env_config("three-cubes"))
        env.reset(seed=2)
        return env

    def test_all_far_outside_is_success(self):
        env = self._env()
        for k, cube in enumerate(env.cubes):
            cube.position[:] = (0.45, 0.45 - 0.1 * k)
        assert env.is_success()

    def test_center_exactly_on_boundary_is_not_success(self):
        env = self._env()
        for cube in env.cubes:
            cube.position[:] = (0.45, 0.45)
        env.cubes[0].position[:] = (env.config.circle_radius, 0.0)
        assert not env.is_success()

    def test_one_inside_one_outside_is_not_success(self):
        env = self._env()
        env.cubes[0].position[:] = (0.0, 0.1)
        env.cubes[1].position[:] = (0.45, 0.45)
        env.cubes[2].position[:] = (-0.45, 0.45)
        assert not env.is_success()


class TestRender:
    def test_render_is_pure_function_of_state(self):
        env = PushWorld(default_env_config("three-cubes"))
        env.reset(seed=6)
        assert np.array_equal(env.render(), env.render())

    def test_cube_at_circle_center_paints_material_color(self):
        env = PushWorld(default_env_config("metal"))
        env.reset(seed=0)
        env.cubes[0].position[:] = env.config.circle_center
        img = env.render()
        assert tuple(img[41, 41]) == CUBE_COLORS["metal"]
        assert tuple(img[42, 42]) == CUBE_COLORS["metal"]

    def test_empty_scene_shows_only_circle_and_effector(self):
        cfg = EnvConfig(cube_specs=())
        env = PushWorld(cfg)
        env.reset(seed=0)
        img = env.render().astype(int)
        background = np.array([232, 232, 228])
        changed = np.any(img != background, axis=-1)
        xs = (np.arange(84) + 0.5) / 84 - 0.5
        ys = 0.5 - (np.arange(84) + 0.5) / 84
        xx, yy = xs[None, :], ys[:, None]
        circle = xx**2 + yy**2 <= cfg.circle_radius**2
        ex, ey = cfg.effector_home
        disc = (xx - ex) ** 2 + (yy - ey) ** 2 <= cfg.effector_radius**2
        assert np.array_equal(changed, circle | disc)

    def test_frame_shape_and_dtype(self):
        env = PushWorld(default_env_config("wood"))
        obs = env.reset(seed=0)
        assert obs.visual.shape == (84, 84, 9)
        assert obs.visual.dtype == np.uint8
        assert obs.audio is None
