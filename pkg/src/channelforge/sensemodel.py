"""Electrical model of the liquid-metal channel and the constant-current
4-wire measurement chain."""

import json
import math
from dataclasses import dataclass

import numpy as np


class SenseModelError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelElectrical:
    resistivity: float  # Ohm*mm
    step_lengths: np.ndarray  # mm per path step
    area: float  # mm^2, nominal cross-section

    def __post_init__(self):
        if not self.resistivity > 0:
            raise SenseModelError("resistivity must be positive")
        if not self.area > 0:
            raise SenseModelError("cross-section area must be positive")
        steps = np.asarray(self.step_lengths, dtype=np.float64)
        if steps.size == 0 or steps.sum() <= 0:
            raise SenseModelError("zero-length channel")
        object.__setattr__(self, "step_lengths", steps)

    @property
    def baseline(self) -> float:
        """R0 = rho * L / A for the undeformed channel."""
        return self.resistivity * float(self.step_lengths.sum()) / self.area


@dataclass(frozen=True)
class DeformationProfile:
    """Per-step cross-section area scale factor, 1 = undeformed."""

    scale: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scale, dtype=np.float64)
        if (s <= 0).any():
            raise SenseModelError("area scale must be positive (occlusion not modeled)")
        if (s > 1).any():
            raise SenseModelError("area scale must be <= 1")
        object.__setattr__(self, "scale", s)


@dataclass(frozen=True)
class MeasurementChain:
    current: float = 0.2  # A
    voltage_limit: float = 3.3  # V
    gain: float = 1.5
    noise_rms: float = 0.0  # V, at the amplifier output

    def __post_init__(self):
        if self.current <= 0 or self.voltage_limit <= 0 or self.gain <= 0:
            raise SenseModelError("current, voltage limit and gain must be positive")


def path_step_lengths(path, grid) -> np.ndarray:
    poly = np.atleast_2d(path.polyline(grid))
    return np.linalg.norm(np.diff(poly, axis=0), axis=1)


def electrical_from_path(path, grid, resistivity: float) -> ChannelElectrical:
    return ChannelElectrical(
        resistivity=resistivity,
        step_lengths=path_step_lengths(path, grid),
        area=math.pi * path.radius**2,
    )


def baseline_resistance(path, grid, radius: float, resistivity: float) -> float:
    """rho * L / (pi r^2) over the polyline length."""
    if radius <= 0:
        raise SenseModelError("radius must be positive")
    lengths = path_step_lengths(path, grid)
    total = float(lengths.sum())
    if total <= 0:
        raise SenseModelError("zero-length path")
    return resistivity * total / (math.pi * radius**2)


def calibrate_resistivity(path, grid, radius: float, target_r0: float) -> float:
    """Resistivity that makes baseline_resistance hit target_r0 exactly."""
    if target_r0 <= 0:
        raise SenseModelError("target baseline resistance must be positive")
    lengths = path_step_lengths(path, grid)
    total = float(lengths.sum())
    if total <= 0:
        raise SenseModelError("zero-length path")
    return target_r0 * math.pi * radius**2 / total


def deformed_resistance(elec: ChannelElectrical, deform: DeformationProfile) -> float:
    """Series-resistor sum R = rho * sum(length_i / (A * s_i))."""
    if len(deform.scale) != len(elec.step_lengths):
        raise SenseModelError(
            f"profile length {len(deform.scale)} does not match "
            f"path step count {len(elec.step_lengths)}"
        )
    return float(
        elec.resistivity * np.sum(elec.step_lengths / (elec.area * deform.scale))
    )


def measure(chain: MeasurementChain, resistance: float, rng=None):
    """One reading through the constant-current chain.

    Output voltage clips at the supply's compliance limit before the
    amplifier. Noise is Gaussian at the output, drawn from rng when given.
    """
    if resistance < 0:
        raise SenseModelError("resistance must be >= 0")
    raw = chain.current * resistance
    clipped = raw > chain.voltage_limit
    v = min(raw, chain.voltage_limit) * chain.gain
    if chain.noise_rms > 0:
        if rng is None:
            raise SenseModelError("noisy measurement needs an explicit rng/seed")
        if not isinstance(rng, np.random.Generator):
            rng = np.random.default_rng(rng)
        v += float(rng.normal(0.0, chain.noise_rms))
    return {
        "voltage_out": float(v),
        "resistance_est": float(v / (chain.current * chain.gain)),
        "clipped": bool(clipped),
    }


class SensitivityPlant:
    """Fixture-calibrated force response: per drive current, a
    piecewise-linear map from applied force (N) to the normalised
    resistance fraction dR/R0.

    The per-current tables are empirical calibration data, not physics:
    dR is current-independent in the series-resistor model, but the
    measured response of the reference sensor varies with drive current,
    so each current carries its own curve.
    """

    def __init__(self, tables: dict):
        # tables: {current_A: [[force_N, fraction], ...]} sorted by force
        self.tables = {}
        for cur, pts in tables.items():
            arr = np.asarray(pts, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise SenseModelError("calibration table rows must be [force, fraction]")
            self.tables[float(cur)] = arr

    @property
    def force_range(self):
        lo = max(t[0, 0] for t in self.tables.values())
        hi = min(t[-1, 0] for t in self.tables.values())
        return lo, hi

    def _table(self, current: float) -> np.ndarray:
        key = min(self.tables, key=lambda c: abs(c - current))
        if abs(key - current) > 1e-9:
            raise SenseModelError(
                f"no calibration for current {current} A "
                f"(have {sorted(self.tables)})"
            )
        return self.tables[key]

    def fraction(self, current: float, force: float) -> float:
        t = self._table(current)
        lo, hi = self.force_range
        if force < lo - 1e-9 or force > hi + 1e-9:
            raise SenseModelError(
                f"force {force} N outside calibrated range [{lo}, {hi}] N"
            )
        return float(np.interp(force, t[:, 0], t[:, 1]))

    def deformation(self, current: float, force: float, n_steps: int) -> DeformationProfile:
        # uniform squeeze whose series resistance reproduces the fraction:
        # R = R0 / s  =>  s = 1 / (1 + dR/R0)
        frac = self.fraction(current, force)
        s = 1.0 / (1.0 + frac)
        return DeformationProfile(scale=np.full(n_steps, s))

    def to_json(self) -> str:
        currents = sorted(self.tables)
        data = {
            "currents_A": currents,
            "force_N_to_fraction": [
                [[float(f), float(v)] for f, v in self.tables[c]] for c in currents
            ],
        }
        return json.dumps(data, sort_keys=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SensitivityPlant":
        data = json.loads(text)
        tables = {
            c: pts
            for c, pts in zip(data["currents_A"], data["force_N_to_fraction"])
        }
        return cls(tables)


def demo_sensitivity_plant() -> SensitivityPlant:
    """Bundled calibration fixture: full-range fraction ~0.29 at 0.2/0.3 A
    and ~0.38 at 0.5 A over 0..8 N, steepest between 2 and 4 N."""
    low = [[0, 0.0], [1, 0.02], [2, 0.06], [3, 0.135], [4, 0.20], [6, 0.255], [8, 0.29]]
    high = [[0, 0.0], [1, 0.03], [2, 0.08], [3, 0.175], [4, 0.26], [6, 0.33], [8, 0.38]]
    return SensitivityPlant({0.2: low, 0.3: low, 0.5: high})


def sensitivity_table(
    plant: SensitivityPlant,
    forces,
    chain: MeasurementChain,
    elec: ChannelElectrical,
    rng=None,
):
    """Normalised response (dR/R0) and its finite-difference gradient vs
    force, measured through the chain."""
    forces = np.asarray(forces, dtype=np.float64)
    r0 = elec.baseline
    fractions = []
    for f in forces:
        prof = plant.deformation(chain.current, float(f), len(elec.step_lengths))
        r = deformed_resistance(elec, prof)
        est = measure(chain, r, rng=rng)["resistance_est"]
        fractions.append((est - r0) / r0)
    fractions = np.asarray(fractions)
    grad = np.gradient(fractions, forces) if len(forces) > 1 else np.zeros_like(fractions)
    return [
        {"force_n": float(f), "fraction": float(x), "gradient_per_n": float(g)}
        for f, x, g in zip(forces, fractions, grad)
    ]
