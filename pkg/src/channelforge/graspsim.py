"""Resistance-feedback grasp loop: a phenomenological plant mapping gripper
closure to channel deformation, and the stepping controller that stops once
the sensed resistance reaches its target."""

import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import sigproc
from .sensemodel import (
    ChannelElectrical,
    DeformationProfile,
    MeasurementChain,
    deformed_resistance,
    measure,
)


class GraspSimError(ValueError):
    pass


# amplifier-output noise (V) that reproduces the bench pick-and-place spread
CALIBRATED_NOISE_RMS = 0.001


@dataclass(frozen=True)
class GraspPlant:
    """Monotone piecewise-linear closure (mm) -> normalised squeeze dR/R0.

    Calibrated against bench fixtures, not a mechanics simulation. Zero
    deformation below the contact onset closure. The fingertip force
    observable mirrors the unreliable load cell: proportional to squeeze
    but subject to contact-miss dropout.
    """

    elec: ChannelElectrical
    control_points: np.ndarray  # (n, 2) closure_mm -> fraction
    contact_onset: float  # mm
    onset_jitter: float = 0.0  # mm, per-episode uniform shift of the curve
    force_scale: float = 40.0  # N per unit fraction, crude
    force_dropout: float = 0.4  # probability a step misses the load cell

    def __post_init__(self):
        pts = np.asarray(self.control_points, dtype=np.float64)
        if np.any(np.diff(pts[:, 0]) <= 0) or np.any(np.diff(pts[:, 1]) < 0):
            raise GraspSimError("control points must be monotone in closure and fraction")
        object.__setattr__(self, "control_points", pts)

    def fraction(self, closure: float, onset_shift: float = 0.0) -> float:
        c = closure - onset_shift
        if c < self.contact_onset:
            return 0.0
        pts = self.control_points
        return float(np.interp(c, pts[:, 0], pts[:, 1]))

    def resistance(self, closure: float, onset_shift: float = 0.0) -> float:
        """True channel resistance (Ohm) at the given closure."""
        frac = self.fraction(closure, onset_shift)
        n = len(self.elec.step_lengths)
        prof = DeformationProfile(scale=np.full(n, 1.0 / (1.0 + frac)))
        return deformed_resistance(self.elec, prof)


@dataclass(frozen=True)
class ControllerConfig:
    target_resistance: float = 0.125  # Ohm, as delta over baseline
    step_size: float = 1.0  # mm per closing step
    step_dwell: float = 0.2  # s
    max_closure: float = 30.0  # mm
    sample_rate: float = 1000.0  # Hz

    def __post_init__(self):
        for name in ("target_resistance", "step_size", "step_dwell", "max_closure", "sample_rate"):
            if not getattr(self, name) > 0:
                raise GraspSimError(f"{name} must be positive")


def step_controller(closure: float, reading: float, cfg: ControllerConfig) -> str:
    """Pure policy: stop once the reading hits the target or the gripper
    runs out of travel, otherwise keep closing."""
    if reading >= cfg.target_resistance:
        return "stop"
    if closure >= cfg.max_closure:
        return "stop"
    return "close_step"


@dataclass
class GraspEpisode:
    timeline: list  # {t, closure, reading, true_delta, force, action}
    outcome: str  # target_reached | max_closure | aborted
    max_reading: float  # Ohm, peak true resistance delta over the episode

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t_s,closure_mm,ohms,action\n")
        for e in self.timeline:
            buf.write(
                f"{e['t']:.6g},{e['closure']:.6g},{e['reading']:.12g},{e['action']}\n"
            )
        return buf.getvalue()


def run_episode(
    plant: GraspPlant, cfg: ControllerConfig, chain: MeasurementChain, seed=0
) -> GraspEpisode:
    """Close in steps, sampling the (noisy) baseline-subtracted resistance
    at the DAQ rate while the gripper moves; the instant a sample hits the
    target the gripper stops mid-step."""
    rng = np.random.default_rng(seed)
    r0 = plant.elec.baseline
    n_dwell = max(1, int(round(cfg.step_dwell * cfg.sample_rate)))
    onset_shift = 0.0
    if plant.onset_jitter > 0:
        onset_shift = float(rng.uniform(-plant.onset_jitter, plant.onset_jitter))

    def read(c):
        true_r = plant.resistance(c, onset_shift)
        est = measure(chain, true_r, rng=rng)["resistance_est"]
        return est - r0, true_r - r0

    timeline = []
    closure = 0.0
    t = 0.0
    outcome = "aborted"
    max_delta = 0.0
    max_steps = int(np.ceil(cfg.max_closure / cfg.step_size)) + 1
    for _ in range(max_steps + 1):
        reading, true_delta = read(closure)
        max_delta = max(max_delta, true_delta)
        missed = rng.random() < plant.force_dropout
        force = 0.0 if missed else plant.fraction(closure, onset_shift) * plant.force_scale
        force += float(rng.normal(0.0, 0.05))
        action = step_controller(closure, reading, cfg)
        timeline.append(
            {
                "t": t,
                "closure": closure,
                "reading": reading,
                "true_delta": true_delta,
                "force": force,
                "action": action,
            }
        )
        t += cfg.step_dwell
        if action == "stop":
            outcome = (
                "target_reached" if reading >= cfg.target_resistance else "max_closure"
            )
            break
        # gripper closes across the dwell; stop the instant a sample trips
        target = min(closure + cfg.step_size, cfg.max_closure)
        stopped = False
        for s in range(1, n_dwell + 1):
            c = closure + (target - closure) * s / n_dwell
            reading, true_delta = read(c)
            max_delta = max(max_delta, true_delta)
            if reading >= cfg.target_resistance:
                closure = c
                timeline.append(
                    {
                        "t": t,
                        "closure": closure,
                        "reading": reading,
                        "true_delta": true_delta,
                        "force": force,
                        "action": "stop",
                    }
                )
                outcome = "target_reached"
                stopped = True
                break
        if stopped:
            break
        closure = target
        t += cfg.step_dwell
    return GraspEpisode(timeline=timeline, outcome=outcome, max_reading=max_delta)


def batch_run(plant, cfg, chain, n: int, seed=0):
    """n independent episodes with per-episode seeds derived from the batch
    seed; returns (episodes, BoxStats of max readings)."""
    if n < 1:
        raise GraspSimError("n must be >= 1")
    seeds = np.random.SeedSequence(seed).spawn(n)
    episodes = [run_episode(plant, cfg, chain, seed=s) for s in seeds]
    stats = sigproc.box_stats([e.max_reading for e in episodes])
    return episodes, stats


def batch_summary_json(episodes, stats) -> str:
    data = {
        "episodes": len(episodes),
        "outcomes": {
            o: sum(1 for e in episodes if e.outcome == o)
            for o in ("target_reached", "max_closure", "aborted")
        },
        "max_readings_ohm": [e.max_reading for e in episodes],
        "box_stats": stats.as_dict(),
    }
    return json.dumps(data, sort_keys=True, indent=1) + "\n"


def demo_grasp_plant(elec: ChannelElectrical) -> GraspPlant:
    """Bundled plant: contact at 8 mm, squeeze ramp crossing the 0.125 Ohm
    pick target well before max closure."""
    r0 = elec.baseline
    # delta-R control points (Ohm) crossing the 0.125 target at 20.5 mm
    delta = [(8.0, 0.0), (12.0, 0.04), (18.0, 0.10), (24.0, 0.16), (30.0, 0.22)]
    pts = np.array([[c, dr / r0] for c, dr in delta])
    return GraspPlant(elec=elec, control_points=pts, contact_onset=8.0, onset_jitter=1.0)
