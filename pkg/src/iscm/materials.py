"""Material presets shared by the physics and the impact-sound synthesizer.

A material couples the parameters that drive how a cube moves (planar
density, bounciness) with the parameters that drive how it sounds when
struck (modal frequencies, decay rates, gains).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError


@dataclass(frozen=True)
class MaterialPreset:
    """Modal sound model plus the physical constants of one material.

    modal_freqs are in Hz, modal_dampings in 1/s (exponential decay rates),
    modal_gains are unitless relative amplitudes. density is planar (kg/m^2).
    """

    name: str
    modal_freqs: tuple[float, ...]
    modal_dampings: tuple[float, ...]
    modal_gains: tuple[float, ...]
    density: float
    restitution: float

    def __post_init__(self):
        n = len(self.modal_freqs)
        if not (len(self.modal_dampings) == len(self.modal_gains) == n) or n == 0:
            raise ConfigurationError(
                f"material {self.name!r}: modal parameter lists must be equal length and non-empty"
            )
        if any(f <= 0 for f in self.modal_freqs):
            raise ConfigurationError(f"material {self.name!r}: modal frequencies must be > 0")
        if any(d <= 0 for d in self.modal_dampings):
            raise ConfigurationError(f"material {self.name!r}: modal dampings must be > 0")
        if any(g < 0 for g in self.modal_gains):
            raise ConfigurationError(f"material {self.name!r}: modal gains must be >= 0")
        if not 0.0 <= self.restitution <= 1.0:
            raise ConfigurationError(f"material {self.name!r}: restitution must be in [0, 1]")
        if self.density <= 0:
            raise ConfigurationError(f"material {self.name!r}: density must be > 0")

    def check_nyquist(self, sample_rate: float) -> None:
        """All modal frequencies must sit strictly below sample_rate / 2."""
        nyquist = sample_rate / 2.0
        if any(f >= nyquist for f in self.modal_freqs):
            raise ConfigurationError(
                f"material {self.name!r}: modal frequency at or above Nyquist ({nyquist} Hz)"
            )


@dataclass(frozen=True)
class CubeSpec:
    """One cube to be placed in the scene."""

    material: MaterialPreset
    side: float
    mass: float
    color: tuple[int, int, int]

    def __post_init__(self):
        if self.side <= 0:
            raise ConfigurationError("cube side must be > 0")
        if self.mass <= 0:
            raise ConfigurationError("cube mass must be > 0")


# Ceramic rings at high frequencies with slow decay, wood thuds at mid
# frequencies and dies quickly, metal is a dense stack of long-ringing
# high partials. That spread keeps the materials apart in the frequency
# domain, which is what the crossmodal head feeds on.
CERAMIC = MaterialPreset(
    name="ceramic",
    modal_freqs=(1900.0, 3800.0, 5900.0),
    modal_dampings=(12.0, 16.0, 22.0),
    modal_gains=(1.0, 0.7, 0.5),
    density=300.0,
    restitution=0.65,
)

WOOD = MaterialPreset(
    name="wood",
    modal_freqs=(380.0, 760.0, 1500.0),
    modal_dampings=(60.0, 85.0, 110.0),
    modal_gains=(1.0, 0.6, 0.35),
    density=150.0,
    restitution=0.25,
)

METAL = MaterialPreset(
    name="metal",
    modal_freqs=(2400.0, 3100.0, 4500.0, 6200.0, 7400.0),
    modal_dampings=(4.0, 5.0, 6.0, 7.0, 8.0),
    modal_gains=(1.0, 0.85, 0.7, 0.6, 0.5),
    density=600.0,
    restitution=0.5,
)

MATERIALS: dict[str, MaterialPreset] = {m.name: m for m in (CERAMIC, WOOD, METAL)}

# Render colors. The goal circle is a muted red, so the metal cube gets a
# clearly brighter red to stay distinguishable in pixel space.
CUBE_COLORS: dict[str, tuple[int, int, int]] = {
    "ceramic": (60, 90, 200),
    "wood": (150, 100, 50),
    "metal": (230, 30, 30),
}

DEFAULT_CUBE_SIDE = 0.08


def make_cube(material_name: str, side: float = DEFAULT_CUBE_SIDE) -> CubeSpec:
    """Build a CubeSpec for a named material; mass follows planar density."""
    try:
        mat = MATERIALS[material_name]
    except KeyError:
        raise ConfigurationError(f"unknown material {material_name!r}") from None
    return CubeSpec(
        material=mat,
        side=side,
        mass=mat.density * side * side,
        color=CUBE_COLORS[material_name],
    )


def cubes_for_task(task: str, side: float = DEFAULT_CUBE_SIDE) -> list[CubeSpec]:
    """Scene contents per task variant.

    three-cubes: one cube of each material (the pretraining scene).
    ceramic / wood / metal: a single cube of that material.
    """
    if task == "three-cubes":
        return [make_cube("ceramic", side), make_cube("wood", side), make_cube("metal", side)]
    if task in MATERIALS:
        return [make_cube(task, side)]
    raise ConfigurationError(f"unknown task {task!r}")
