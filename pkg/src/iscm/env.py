"""Top-down 2-D pushing environment.

A velocity-controlled circular effector pushes cubes out of a red goal
circle on a square table. Physics is semi-implicit Euler with impulse-based
collision resolution between the effector disc, axis-aligned cube boxes and
the table walls, plus Coulomb-style friction. Every contact whose normal
impulse exceeds a threshold is reported as an impact event so a sound
synthesizer can be driven from it.

Rewards are sparse: -step_penalty per step, +success_reward on the step
where the last cube center leaves the circle. Episodes are capped at
max_steps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Protocol, Sequence

import numpy as np

from .errors import ConfigurationError, UsageError
from .materials import CubeSpec, cubes_for_task
from .seeding import split_seed

FRAME_SIZE = 84
FRAME_STACK = 3
GRAVITY = 9.81

BACKGROUND_COLOR = (232, 232, 228)
CIRCLE_COLOR = (170, 60, 60)
EFFECTOR_COLOR = (40, 40, 40)


class ImpactEvent(NamedTuple):
    """One contact impulse loud enough to make a sound."""

    magnitude: float  # normal impulse, N*s
    material: str


@dataclass(frozen=True)
class Observation:
    """What the agent sees: the last three RGB frames and, when the audio
    pipeline is attached, the last three impact-sound spectrograms."""

    frames: tuple[np.ndarray, ...]
    spectrograms: tuple[np.ndarray, ...] | None

    @property
    def visual(self) -> np.ndarray:
        """Stacked frames, shape (84, 84, 9), uint8."""
        return np.concatenate(self.frames, axis=-1)

    @property
    def audio(self) -> np.ndarray | None:
        """Stacked spectrograms, shape (32, 32, 3), float32; None without audio."""
        if self.spectrograms is None:
            return None
        return np.stack(self.spectrograms, axis=-1)


@dataclass
class CubeState:
    position: np.ndarray  # (2,) m
    velocity: np.ndarray  # (2,) m/s


@dataclass
class StepResult:
    observation: Observation
    extrinsic_reward: float
    done: bool
    impulses: list[ImpactEvent]
    cubes_inside: int


@dataclass(frozen=True)
class EnvConfig:
    circle_radius: float = 0.3
    circle_center: tuple[float, float] = (0.0, 0.0)
    table_half_extent: float = 0.5
    max_steps: int = 50
    step_penalty: float = 1.0 / 50.0
    success_reward: float = 1.0
    physics_dt: float = 0.05
    substeps: int = 4
    friction: float = 0.4
    max_effector_speed: float = 0.5
    effector_radius: float = 0.05
    sound_threshold: float = 1e-3  # minimum normal impulse (N*s) that emits sound
    cube_specs: tuple[CubeSpec, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.circle_radius <= 0:
            raise ConfigurationError("circle_radius must be > 0")
        if self.table_half_extent <= 0:
            raise ConfigurationError("table_half_extent must be > 0")
        cx, cy = self.circle_center
        ext = self.table_half_extent
        if abs(cx) + self.circle_radius > ext or abs(cy) + self.circle_radius > ext:
            raise ConfigurationError("goal circle does not fit on the table")
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be >= 1")
        if self.physics_dt <= 0 or self.substeps < 1:
            raise ConfigurationError("physics_dt must be > 0 and substeps >= 1")
        if self.friction < 0:
            raise ConfigurationError("friction must be >= 0")
        if self.max_effector_speed <= 0:
            raise ConfigurationError("max_effector_speed must be > 0")
        if self.effector_radius <= 0:
            raise ConfigurationError("effector_radius must be > 0")
        for spec in self.cube_specs:
            if self.circle_radius < spec.side:
                raise ConfigurationError(
                    f"circle radius {self.circle_radius} too small for cube side {spec.side}"
                )
            if self.circle_radius - spec.side / 2.0 <= 0:
                raise ConfigurationError("no room to place a cube center inside the circle")
        home = self.effector_home
        if abs(home[0]) + self.effector_radius > ext or abs(home[1]) + self.effector_radius > ext:
            raise ConfigurationError("effector home pose falls outside the table")

    @property
    def effector_home(self) -> tuple[float, float]:
        """Fixed start pose below the circle, clear of it."""
        cx, cy = self.circle_center
        return (cx, cy - self.circle_radius - self.effector_radius - 0.05)

    @property
    def control_dt(self) -> float:
        """Simulated seconds per control step."""
        return self.physics_dt * self.substeps


def default_env_config(task: str = "three-cubes", seed: int = 0, **overrides) -> EnvConfig:
    """EnvConfig with the scene contents implied by a task name."""
    cubes = tuple(cubes_for_task(task, overrides.pop("cube_side", 0.08)))
    return EnvConfig(cube_specs=cubes, seed=seed, **overrides)


class AudioStep(Protocol):
    """Anything that can turn a step's impact events into one spectrogram."""

    def reset(self, seed: int) -> None: ...

    def step_spectrogram(self, events: Sequence[ImpactEvent]) -> np.ndarray: ...


class PushWorld:
    """The environment. One instance per training loop; not thread-safe."""

    def __init__(self, config: EnvConfig, audio: AudioStep | None = None):
        self.config = config
        self.audio = audio
        self._ready = False
        self._episode_index = 0
        self._cubes: list[CubeState] = []
        self._effector_pos = np.zeros(2)
        self._effector_vel = np.zeros(2)
        self._step_count = 0
        self._done = True
        self._frames: list[np.ndarray] = []
        self._specs: list[np.ndarray] = []

    # -- lifecycle ---------------------------------------------------------

    def reset(self, seed: int | None = None) -> Observation:
        """Place all cubes inside the circle and the effector at home.

        With an explicit seed the initial state is a pure function of it;
        without one, each reset advances a deterministic per-episode seed
        sequence derived from config.seed.
        """
        if seed is None:
            seed = split_seed(self.config.seed, f"episode-{self._episode_index}")
        self._episode_index += 1
        rng = np.random.default_rng(seed)

        self._cubes = self._place_cubes(rng)
        self._effector_pos = np.array(self.config.effector_home, dtype=float)
        self._effector_vel = np.zeros(2)
        self._step_count = 0
        self._done = False
        self._ready = True

        frame = self.render()
        self._frames = [frame] * FRAME_STACK
        if self.audio is not None:
            self.audio.reset(split_seed(seed, "audio"))
            silence = self.audio.step_spectrogram([])
            self._specs = [silence] * FRAME_STACK
        else:
            self._specs = []
        return self._observation()

    def _place_cubes(self, rng: np.random.Generator) -> list[CubeState]:
        cx, cy = self.config.circle_center
        placed: list[tuple[np.ndarray, float]] = []
        states = []
        for spec in self.config.cube_specs:
            r_max = self.config.circle_radius - spec.side / 2.0
            for _ in range(200):
                radius = r_max * np.sqrt(rng.uniform())
                angle = rng.uniform(0.0, 2.0 * np.pi)
                pos = np.array([cx + radius * np.cos(angle), cy + radius * np.sin(angle)])
                gap = 0.005
                ok = all(
                    np.max(np.abs(pos - other)) >= (spec.side + other_side) / 2.0 + gap
                    for other, other_side in placed
                )
                if ok:
                    break
            else:
                raise ConfigurationError("could not place cubes inside the circle")
            placed.append((pos, spec.side))
            states.append(CubeState(position=pos, velocity=np.zeros(2)))
        return states

    # -- stepping ----------------------------------------------------------

    def step(self, action: np.ndarray) -> StepResult:
        self._require_reset()
        if self._done:
            raise UsageError("step() called on a finished episode; call reset()")
        command = np.clip(np.asarray(action, dtype=float).reshape(2), -1.0, 1.0)
        self._effector_vel = command * self.config.max_effector_speed

        events: list[ImpactEvent] = []
        for _ in range(self.config.substeps):
            self._substep(self.config.physics_dt, events)

        self._step_count += 1
        success = self.is_success()
        self._done = success or self._step_count >= self.config.max_steps
        reward = -self.config.step_penalty
        if success:
            reward += self.config.success_reward

        frame = self.render()
        self._frames = self._frames[1:] + [frame]
        if self.audio is not None:
            spec = self.audio.step_spectrogram(events)
            self._specs = self._specs[1:] + [spec]

        return StepResult(
            observation=self._observation(),
            extrinsic_reward=reward,
            done=self._done,
            impulses=events,
            cubes_inside=self._cubes_inside(),
        )

    def _substep(self, dt: float, events: list[ImpactEvent]) -> None:
        cfg = self.config
        ext = cfg.table_half_extent

        # Table friction decelerates sliding cubes, then semi-implicit Euler.
        decel = cfg.friction * GRAVITY * dt
        for cube in self._cubes:
            speed = float(np.linalg.norm(cube.velocity))
            if speed <= decel:
                cube.velocity[:] = 0.0
            elif speed > 0.0:
                cube.velocity -= decel * (cube.velocity / speed)
            cube.position += cube.velocity * dt

        self._effector_pos += self._effector_vel * dt
        lim = ext - cfg.effector_radius
        np.clip(self._effector_pos, -lim, lim, out=self._effector_pos)

        for i, cube in enumerate(self._cubes):
            self._collide_effector_cube(cube, cfg.cube_specs[i], events)
        for i in range(len(self._cubes)):
            for j in range(i + 1, len(self._cubes)):
                self._collide_cubes(i, j, events)
        for i, cube in enumerate(self._cubes):
            self._collide_cube_walls(cube, cfg.cube_specs[i], events)

    def _emit(self, impulse: float, material: str, events: list[ImpactEvent]) -> None:
        if impulse > self.config.sound_threshold:
            events.append(ImpactEvent(magnitude=impulse, material=material))

    def _collide_effector_cube(self, cube: CubeState, spec: CubeSpec, events) -> None:
        cfg = self.config
        half = spec.side / 2.0
        lo, hi = cube.position - half, cube.position + half
        closest = np.clip(self._effector_pos, lo, hi)
        delta = self._effector_pos - closest
        dist = float(np.linalg.norm(delta))
        if dist >= cfg.effector_radius:
            return
        if dist > 1e-12:
            normal = -delta / dist  # pushes the cube away from the effector
            depth = cfg.effector_radius - dist
        else:
            # Effector center inside the box: separate along the shallowest axis.
            overlaps = np.minimum(self._effector_pos - lo, hi - self._effector_pos)
            axis = int(np.argmin(overlaps))
            normal = np.zeros(2)
            normal[axis] = 1.0 if cube.position[axis] >= self._effector_pos[axis] else -1.0
            depth = cfg.effector_radius + float(overlaps[axis])
        cube.position += normal * depth

        rel = cube.velocity - self._effector_vel
        approach = -float(rel @ normal)  # > 0 when closing
        if approach <= 0.0:
            return
        restitution = spec.material.restitution
        impulse = (1.0 + restitution) * spec.mass * approach
        cube.velocity += (impulse / spec.mass) * normal
        self._apply_contact_friction(cube, spec.mass, rel, normal, impulse)
        self._emit(impulse, spec.material.name, events)

    def _collide_cubes(self, i: int, j: int, events) -> None:
        a, b = self._cubes[i], self._cubes[j]
        sa, sb = self.config.cube_specs[i], self.config.cube_specs[j]
        half_sum = (sa.side + sb.side) / 2.0
        d = b.position - a.position
        overlap = half_sum - np.abs(d)
        if overlap[0] <= 0.0 or overlap[1] <= 0.0:
            return
        axis = int(np.argmin(overlap))
        normal = np.zeros(2)
        normal[axis] = 1.0 if d[axis] >= 0.0 else -1.0

        inv_a, inv_b = 1.0 / sa.mass, 1.0 / sb.mass
        share = overlap[axis] / (inv_a + inv_b)
        a.position -= normal * share * inv_a
        b.position += normal * share * inv_b

        rel = b.velocity - a.velocity
        approach = -float(rel @ normal)
        if approach <= 0.0:
            return
        restitution = max(sa.material.restitution, sb.material.restitution)
        reduced_mass = 1.0 / (inv_a + inv_b)
        impulse = (1.0 + restitution) * reduced_mass * approach
        a.velocity -= (impulse * inv_a) * normal
        b.velocity += (impulse * inv_b) * normal

        tangential = rel - float(rel @ normal) * normal
        t_speed = float(np.linalg.norm(tangential))
        if t_speed > 1e-12:
            t_dir = tangential / t_speed
            friction_impulse = min(self.config.friction * impulse, reduced_mass * t_speed)
            a.velocity += (friction_impulse * inv_a) * t_dir
            b.velocity -= (friction_impulse * inv_b) * t_dir
        # One sound event per contact; arbitrarily credit the first cube's material.
        self._emit(impulse, sa.material.name, events)

    def _collide_cube_walls(self, cube: CubeState, spec: CubeSpec, events) -> None:
        ext = self.config.table_half_extent
        half = spec.side / 2.0
        restitution = spec.material.restitution
        for axis in range(2):
            for sign in (-1.0, 1.0):
                bound = sign * (ext - half)
                outside = sign * cube.position[axis] > sign * bound
                if not outside:
                    continue
                cube.position[axis] = bound
                v = cube.velocity[axis]
                if sign * v > 0.0:
                    impulse = spec.mass * (1.0 + restitution) * abs(v)
                    cube.velocity[axis] = -restitution * v
                    self._emit(impulse, spec.material.name, events)

    def _apply_contact_friction(self, cube, mass, rel, normal, normal_impulse) -> None:
        tangential = rel - float(rel @ normal) * normal
        t_speed = float(np.linalg.norm(tangential))
        if t_speed <= 1e-12:
            return
        t_dir = tangential / t_speed
        friction_impulse = min(self.config.friction * normal_impulse, mass * t_speed)
        cube.velocity -= (friction_impulse / mass) * t_dir

    # -- queries -----------------------------------------------------------

    def is_success(self) -> bool:
        """True iff every cube center is strictly outside the circle."""
        self._require_reset()
        return self._cubes_inside() == 0

    def _cubes_inside(self) -> int:
        center = np.array(self.config.circle_center)
        count = 0
        for cube in self._cubes:
            if float(np.linalg.norm(cube.position - center)) <= self.config.circle_radius:
                count += 1
        return count

    def kinetic_energy(self) -> float:
        """Total cube kinetic energy (effector excluded; it is kinematic)."""
        self._require_reset()
        return sum(
            0.5 * spec.mass * float(cube.velocity @ cube.velocity)
            for spec, cube in zip(self.config.cube_specs, self._cubes)
        )

    @property
    def cubes(self) -> list[CubeState]:
        return self._cubes

    @property
    def step_count(self) -> int:
        return self._step_count

    def _require_reset(self) -> None:
        if not self._ready:
            raise UsageError("environment has not been reset")

    def _observation(self) -> Observation:
        specs = tuple(self._specs) if self.audio is not None else None
        return Observation(frames=tuple(self._frames), spectrograms=specs)

    # -- rendering ---------------------------------------------------------

    def render(self) -> np.ndarray:
        """Orthographic top-down view, shape (84, 84, 3), uint8."""
        self._require_reset()
        cfg = self.config
        ext = cfg.table_half_extent
        n = FRAME_SIZE
        xs = (np.arange(n) + 0.5) / n * (2.0 * ext) - ext  # column -> world x
        ys = ext - (np.arange(n) + 0.5) / n * (2.0 * ext)  # row -> world y
        xx = xs[None, :]
        yy = ys[:, None]

        img = np.empty((n, n, 3), dtype=np.uint8)
        img[:] = BACKGROUND_COLOR

        cx, cy = cfg.circle_center
        circle = (xx - cx) ** 2 + (yy - cy) ** 2 <= cfg.circle_radius**2
        img[circle] = CIRCLE_COLOR

        for spec, cube in zip(cfg.cube_specs, self._cubes):
            half = spec.side / 2.0
            box = (np.abs(xx - cube.position[0]) <= half) & (np.abs(yy - cube.position[1]) <= half)
            img[box] = spec.color

        ex, ey = self._effector_pos
        disc = (xx - ex) ** 2 + (yy - ey) ** 2 <= cfg.effector_radius**2
        img[disc] = EFFECTOR_COLOR
        return img
