"""Trace analysis: drift removal, cycle segmentation, per-cycle statistics
and box-and-whisker summaries."""

import io
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal


class SigprocError(ValueError):
    pass


DEFAULT_CUTOFF_HZ = 0.01
DEFAULT_FILTER_ORDER = 2
BASELINE_DECILE = 0.10


@dataclass(frozen=True)
class ResistanceTrace:
    sample_rate: float  # Hz
    t0: float  # s
    resistance: np.ndarray  # Ohm
    force: np.ndarray | None = None  # N, optional

    def __post_init__(self):
        r = np.asarray(self.resistance, dtype=np.float64)
        if np.isnan(r).any():
            raise SigprocError("trace contains NaN samples")
        if not self.sample_rate > 0:
            raise SigprocError("sample_rate must be positive")
        object.__setattr__(self, "resistance", r)
        if self.force is not None:
            f = np.asarray(self.force, dtype=np.float64)
            if len(f) != len(r):
                raise SigprocError("force channel length mismatch")
            object.__setattr__(self, "force", f)

    def __len__(self):
        return len(self.resistance)

    @property
    def times(self):
        return self.t0 + np.arange(len(self.resistance)) / self.sample_rate

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.force is not None:
            buf.write("t_s,ohms,force_n\n")
            for t, r, f in zip(self.times, self.resistance, self.force):
                buf.write(f"{t:.9g},{r:.12g},{f:.12g}\n")
        else:
            buf.write("t_s,ohms\n")
            for t, r in zip(self.times, self.resistance):
                buf.write(f"{t:.9g},{r:.12g}\n")
        return buf.getvalue()


def ingest_csv(data) -> ResistanceTrace:
    """Parse 't_s,ohms[,force_n]' CSV; timestamps must be strictly
    increasing and uniformly spaced within 1e-6 s."""
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    lines = [ln for ln in data.strip().splitlines() if ln.strip()]
    if not lines:
        raise SigprocError("empty CSV")
    header = [c.strip() for c in lines[0].split(",")]
    if header[:2] != ["t_s", "ohms"] or (
        len(header) == 3 and header[2] != "force_n"
    ) or len(header) > 3:
        raise SigprocError(f"unexpected header {lines[0]!r}; want t_s,ohms[,force_n]")
    has_force = len(header) == 3

    ts, rs, fs = [], [], []
    for row_idx, ln in enumerate(lines[1:], start=1):
        parts = ln.split(",")
        if len(parts) != len(header):
            raise SigprocError(f"row {row_idx}: expected {len(header)} columns")
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise SigprocError(f"row {row_idx}: non-numeric value")
        if any(math.isnan(v) for v in vals):
            raise SigprocError(f"row {row_idx}: NaN value")
        ts.append(vals[0])
        rs.append(vals[1])
        if has_force:
            fs.append(vals[2])
    ts = np.asarray(ts)
    if len(ts) < 2:
        raise SigprocError("need at least 2 samples")
    dts = np.diff(ts)
    bad = np.nonzero(dts <= 0)[0]
    if len(bad):
        raise SigprocError(f"row {int(bad[0]) + 2}: timestamps not strictly increasing")
    dt = dts[0]
    off = np.nonzero(np.abs(dts - dt) > 1e-6)[0]
    if len(off):
        raise SigprocError(f"row {int(off[0]) + 2}: non-uniform sampling interval")
    return ResistanceTrace(
        sample_rate=1.0 / dt,
        t0=float(ts[0]),
        resistance=np.asarray(rs),
        force=np.asarray(fs) if has_force else None,
    )


def _cycle_baseline_points(trace: ResistanceTrace, period: float):
    """(t, R) of the lowest-decile samples of each full cycle window."""
    n = int(round(period * trace.sample_rate))
    count = len(trace) // n
    if count == 0:
        # fall back to the whole trace as one window
        n, count = len(trace), 1
    t = trace.times
    pts_t, pts_r = [], []
    for c in range(count):
        w = trace.resistance[c * n : (c + 1) * n]
        wt = t[c * n : (c + 1) * n]
        k = max(1, int(len(w) * BASELINE_DECILE))
        order = np.argsort(w, kind="stable")[:k]
        pts_t.append(wt[order])
        pts_r.append(w[order])
    return np.concatenate(pts_t), np.concatenate(pts_r)


def remove_drift(
    trace: ResistanceTrace,
    method: str = "both",
    period: float = 6.0,
    cutoff_hz: float = DEFAULT_CUTOFF_HZ,
    order: int = DEFAULT_FILTER_ORDER,
) -> ResistanceTrace:
    """Remove slow baseline drift.

    linear: subtract an OLS line fitted to the per-cycle baseline (the
    lowest decile of each cycle window). highpass: zero-phase Butterworth
    (forward-backward). both: linear, then highpass. The output is
    re-anchored so the per-cycle baseline sits at zero.
    """
    if method not in ("highpass", "linear", "both"):
        raise SigprocError(f"unknown drift method {method!r}")
    r = trace.resistance.copy()
    t = trace.times

    if method in ("linear", "both"):
        bt, br = _cycle_baseline_points(trace, period)
        slope, intercept = np.polyfit(bt, br, 1)
        r = r - (slope * t + intercept)

    if method in ("highpass", "both"):
        min_len = trace.sample_rate / cutoff_hz
        if len(r) < min_len:
            raise SigprocError(
                f"trace too short for highpass settling: need >= {int(min_len)} "
                f"samples at cutoff {cutoff_hz} Hz, have {len(r)}"
            )
        sos = signal.butter(
            order, cutoff_hz, btype="highpass", fs=trace.sample_rate, output="sos"
        )
        # pad on the filter's own timescale with an even extension, else the
        # settling transient bleeds into the first/last cycles (the default
        # odd extension inverts a cyclic trace at the boundary)
        padlen = min(len(r) - 1, int(3.0 * trace.sample_rate / cutoff_hz))
        r = signal.sosfiltfilt(sos, r, padtype="even", padlen=padlen)

    out = ResistanceTrace(trace.sample_rate, trace.t0, r, trace.force)
    # re-anchor: per-cycle baseline back to zero
    _, br = _cycle_baseline_points(out, period)
    r = r - float(np.median(br))
    return ResistanceTrace(trace.sample_rate, trace.t0, r, trace.force)


def segment_cycles(trace: ResistanceTrace, period: float):
    """Fixed-period windows, phase-aligned by cross-correlating the first
    two periods (lag search within +/- period/2); trailing partial cycle
    dropped."""
    if period <= 0:
        raise SigprocError("period must be positive")
    n = int(round(period * trace.sample_rate))
    if len(trace) < n:
        raise SigprocError(
            f"trace of {len(trace)} samples is shorter than one period ({n})"
        )
    best_lag = 0
    if len(trace) >= 2 * n + n // 2:
        r = trace.resistance
        best_score = -np.inf
        for lag in range(0, n // 2 + 1):
            a = r[lag : lag + n]
            b = r[lag + n : lag + 2 * n]
            sa = a - a.mean()
            sb = b - b.mean()
            denom = np.linalg.norm(sa) * np.linalg.norm(sb)
            score = float(sa @ sb / denom) if denom > 0 else 0.0
            # prefer the smallest lag on ties so aligned traces slice at 0
            if score > best_score + 1e-12:
                best_score = score
                best_lag = lag
    count = (len(trace) - best_lag) // n
    return [
        trace.resistance[best_lag + c * n : best_lag + (c + 1) * n]
        for c in range(count)
    ]


@dataclass
class CycleStats:
    cycle_count: int
    peaks: np.ndarray
    mean_peak: float
    sd_peak: float
    mean_waveform: np.ndarray
    sd_envelope: np.ndarray

    def as_dict(self):
        return {
            "cycles": self.cycle_count,
            "mean_peak_ohm": self.mean_peak,
            "sd_peak_ohm": self.sd_peak,
            "peaks_ohm": [float(p) for p in self.peaks],
        }


def cycle_stats(windows) -> CycleStats:
    """Per-sample mean/SD across equal-length windows and per-cycle peak
    stats; SD uses the n-1 denominator."""
    if len(windows) == 0:
        raise SigprocError("need at least one cycle window")
    lengths = {len(w) for w in windows}
    if len(lengths) != 1:
        raise SigprocError("cycle windows must have equal lengths")
    arr = np.stack([np.asarray(w, dtype=np.float64) for w in windows])
    peaks = arr.max(axis=1)
    ddof = 1 if len(windows) > 1 else 0
    return CycleStats(
        cycle_count=len(windows),
        peaks=peaks,
        mean_peak=float(peaks.mean()),
        sd_peak=float(peaks.std(ddof=ddof)),
        mean_waveform=arr.mean(axis=0),
        sd_envelope=arr.std(axis=0, ddof=ddof if len(windows) > 1 else 0),
    )


@dataclass
class BoxStats:
    median: float
    q1: float
    q3: float
    whisker_low: float
    whisker_high: float
    outliers: list

    def as_dict(self):
        return {
            "median": self.median,
            "q1": self.q1,
            "q3": self.q3,
            "whisker_low": self.whisker_low,
            "whisker_high": self.whisker_high,
            "outliers": [float(o) for o in self.outliers],
        }


def box_stats(values) -> BoxStats:
    """Quartiles by linear interpolation; whiskers at the most extreme data
    points within 1.5*IQR of the quartiles, the rest flagged as outliers."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise SigprocError("need at least one value")
    q1, med, q3 = (float(x) for x in np.quantile(v, [0.25, 0.5, 0.75], method="linear"))
    iqr = q3 - q1
    lo_fence = q1 - 1.5 * iqr
    hi_fence = q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    return BoxStats(
        median=med,
        q1=q1,
        q3=q3,
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        outliers=sorted(float(x) for x in v[(v < lo_fence) | (v > hi_fence)]),
    )


def stats_json(stats: CycleStats) -> str:
    return json.dumps(stats.as_dict(), sort_keys=True, indent=1) + "\n"


def plot_data_csv(stats: CycleStats, sample_rate: float) -> str:
    """Mean waveform plus SD envelope for external plotting."""
    buf = io.StringIO()
    buf.write("t_s,mean_ohm,sd_ohm\n")
    for i, (m, s) in enumerate(zip(stats.mean_waveform, stats.sd_envelope)):
        buf.write(f"{i / sample_rate:.9g},{m:.12g},{s:.12g}\n")
    return buf.getvalue()
