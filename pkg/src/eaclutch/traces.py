"""Measured load-cell trace analysis: ingestion, zero-phase filtering,
engagement/release time extraction, slip percentage, and preload estimation.

Traces are uniformly sampled (force, voltage) time series with voltage-on
and voltage-off markers. Engagement extraction works on the filtered force
channel; release extraction uses the raw channel by default (an opt-in flag
filters first).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.signal

from .dynamics import ClutchConfig, preload_from_baseline
from .numerics import fit_least_squares


class TraceFormatError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


class NoReleaseError(RuntimeError):
    pass


@dataclass
class Trace:
    t: np.ndarray  # [s]
    force: np.ndarray  # [N]
    voltage: np.ndarray  # [V]
    sample_rate: float  # [Hz]
    t_on: float  # voltage-on marker [s]
    t_off: float  # voltage-off marker [s]

    def __post_init__(self):
        n = len(self.t)
        if len(self.force) != n or len(self.voltage) != n:
            raise TraceFormatError("t, force, voltage arrays must have equal length")
        if not (self.t[0] <= self.t_on <= self.t[-1] and self.t[0] <= self.t_off <= self.t[-1]):
            raise TraceFormatError("markers must lie inside the time range")


@dataclass
class ExtractionResult:
    time_s: float
    ok: bool
    detail: str = ""


_UNIFORMITY_PPM = 1.0


def _detect_markers(t: np.ndarray, voltage: np.ndarray) -> tuple[float, float]:
    thr = 0.1 * np.max(np.abs(voltage))
    if thr <= 0:
        raise TraceFormatError("voltage channel is identically zero; cannot detect markers")
    on = np.nonzero(np.abs(voltage) >= thr)[0]
    return float(t[on[0]]), float(t[on[-1]])


def load_trace(path: str | Path) -> Trace:
    """Read a CSV trace with header t_s, force_n, voltage_v (optional
    constant marker columns t_on_s, t_off_s). Sampling must be uniform to
    within 1 ppm; markers are auto-detected from a 10%-of-peak voltage
    threshold when absent."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError(f"{path}: empty file") from None
        cols = [h.strip() for h in header]
        required = ["t_s", "force_n", "voltage_v"]
        for name in required:
            if name not in cols:
                raise TraceFormatError(f"{path}: missing required column '{name}'")
        idx = {name: cols.index(name) for name in cols}
        rows = list(reader)
    if len(rows) < 16:
        raise TraceFormatError(f"{path}: too few samples ({len(rows)})")
    data = np.asarray(rows, dtype=float)
    t = data[:, idx["t_s"]]
    force = data[:, idx["force_n"]]
    voltage = data[:, idx["voltage_v"]]

    dt = np.diff(t)
    dt_med = float(np.median(dt))
    if dt_med <= 0:
        raise TraceFormatError(f"{path}: time column is not increasing")
    jitter = np.max(np.abs(dt - dt_med))
    if jitter > _UNIFORMITY_PPM * 1e-6 * dt_med:
        raise TraceFormatError(
            f"{path}: non-uniform sampling (jitter {jitter:.3e} s on dt {dt_med:.3e} s)"
        )

    if "t_on_s" in idx and "t_off_s" in idx:
        t_on = float(data[0, idx["t_on_s"]])
        t_off = float(data[0, idx["t_off_s"]])
    else:
        t_on, t_off = _detect_markers(t, voltage)
    return Trace(
        t=t, force=force, voltage=voltage, sample_rate=1.0 / dt_med, t_on=t_on, t_off=t_off
    )


def lowpass_zero_phase(trace: Trace, cutoff: float = 250.0, order: int = 2) -> Trace:
    """Forward-backward Butterworth low-pass on the force channel only
    (zero phase; effective order is twice the design order)."""
    if cutoff >= trace.sample_rate / 2:
        raise ValueError(f"cutoff {cutoff} Hz must be below Nyquist {trace.sample_rate / 2} Hz")
    sos = scipy.signal.butter(order, cutoff, btype="low", fs=trace.sample_rate, output="sos")
    filtered = scipy.signal.sosfiltfilt(sos, trace.force)
    return replace(trace, force=filtered)


def extract_engagement_time(
    trace: Trace,
    r2_min: float = 0.8,
    fit_start: float = 0.5e-3,
    end_min: float = 2e-3,
    end_max: float = 20e-3,
    baseline_window: float = 10e-3,
) -> ExtractionResult:
    """Back-interpolated engagement delay after the voltage-on marker.

    For every possible end sample between end_min and end_max after t_on, a
    line is fit to the force from fit_start after t_on to that end; fits
    with R^2 above r2_min vote with their baseline-crossing time, and the
    smallest positive crossing wins. Results that would be negative, or the
    absence of any qualifying fit, give 0 with a quality flag.
    """
    t, f = trace.t, trace.force
    t_on = trace.t_on
    if t_on - t[0] < baseline_window:
        raise InsufficientDataError(
            f"need {baseline_window * 1e3:.0f} ms of pre-voltage data, have {(t_on - t[0]) * 1e3:.1f} ms"
        )
    pre = (t >= t_on - baseline_window) & (t < t_on)
    baseline = float(np.mean(f[pre]))

    i0 = int(np.searchsorted(t, t_on + fit_start))
    j_lo = int(np.searchsorted(t, t_on + end_min))
    j_hi = int(np.searchsorted(t, t_on + end_max, side="right"))
    if j_hi - 1 <= i0 or j_hi > len(t):
        raise InsufficientDataError("trace too short for the engagement fit windows")

    # cumulative sums allow all end windows to be fit in O(n)
    tw = t[i0:j_hi] - t_on
    fw = f[i0:j_hi]
    cs_t = np.cumsum(tw)
    cs_t2 = np.cumsum(tw * tw)
    cs_f = np.cumsum(fw)
    cs_tf = np.cumsum(tw * fw)
    cs_f2 = np.cumsum(fw * fw)

    ends = np.arange(max(j_lo - i0, 1), j_hi - i0)  # end index within window (inclusive)
    n = ends + 1.0
    st, st2 = cs_t[ends], cs_t2[ends]
    sf, stf, sf2 = cs_f[ends], cs_tf[ends], cs_f2[ends]
    denom = n * st2 - st * st
    valid = denom > 0
    slope = np.where(valid, (n * stf - st * sf) / np.where(valid, denom, 1.0), 0.0)
    intercept = (sf - slope * st) / n
    ss_tot = sf2 - sf * sf / n
    ss_res = ss_tot - slope * (stf - st * sf / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(ss_tot > 0, 1.0 - ss_res / ss_tot, 0.0)

    good = valid & (r2 > r2_min) & (slope != 0)
    if not np.any(good):
        return ExtractionResult(0.0, ok=False, detail="no fit with sufficient R^2")
    crossings = (baseline - intercept[good]) / slope[good]
    positive = crossings[crossings > 0]
    if len(positive) == 0:
        return ExtractionResult(0.0, ok=False, detail="no positive baseline crossing; rounded to 0")
    return ExtractionResult(float(np.min(positive)), ok=True, detail=f"{int(np.sum(good))} fits")


def extract_release_time(
    trace: Trace,
    threshold: float = 0.9,
    final_window_frac: float = 0.2,
    min_settle_window: float = 0.5,
    prefilter: bool = False,
) -> float:
    """Time after the voltage-off marker at which the force has fallen
    `threshold` of the way from its value at t_off to its final settled
    value (mean over the trailing final_window_frac of the trace). Uses the
    raw force channel unless prefilter is set."""
    if not 0 < threshold < 1:
        raise ValueError("threshold must be in (0, 1)")
    work = lowpass_zero_phase(trace) if prefilter else trace
    t, f = work.t, work.force
    t_off = work.t_off
    if t[-1] - t_off < min_settle_window:
        raise InsufficientDataError(
            f"need {min_settle_window} s of post-release settling, have {t[-1] - t_off:.3f} s"
        )
    i_off = int(np.searchsorted(t, t_off, side="right")) - 1
    f_off = float(f[i_off])
    n_final = max(int(len(t) * final_window_frac), 1)
    f_final = float(np.mean(f[-n_final:]))
    target = f_off + threshold * (f_final - f_off)

    seg_t = t[i_off:]
    seg_f = f[i_off:]
    if f_final <= f_off:
        hit = np.nonzero(seg_f <= target)[0]
    else:
        hit = np.nonzero(seg_f >= target)[0]
    hit = hit[hit > 0]
    if len(hit) == 0:
        raise NoReleaseError(f"force never crosses the {threshold:.0%} release threshold")
    i = int(hit[0])
    f1, f2 = seg_f[i - 1], seg_f[i]
    if f2 == f1:
        t_cross = float(seg_t[i])
    else:
        t_cross = float(seg_t[i - 1] + (target - f1) * (seg_t[i] - seg_t[i - 1]) / (f2 - f1))
    return t_cross - t_off


def slip_percentage(
    trace: Trace,
    noise_window: float = 0.5,
    recovery_window: float = 5e-3,
    noise_multiple: float = 3.0,
) -> float:
    """Worst percentage of force lost in a slip during the voltage-on
    segment: peaks followed within recovery_window by a drop exceeding
    noise_multiple times the pre-voltage noise standard deviation. 0 when
    no slip qualifies."""
    t, f = trace.t, trace.force
    on = (t >= trace.t_on) & (t <= trace.t_off)
    if not np.any(on):
        raise InsufficientDataError("no voltage-on segment in trace")
    pre = (t >= trace.t_on - noise_window) & (t < trace.t_on)
    if not np.any(pre):
        pre = t < trace.t_on
    pre_f = f[pre]
    # detrend: the baseline drifts with the motor drive
    coeff = np.polyfit(t[pre], pre_f, 1)
    noise_sigma = float(np.std(pre_f - np.polyval(coeff, t[pre])))

    seg_t, seg_f = t[on], f[on]
    peaks, _ = scipy.signal.find_peaks(seg_f)
    worst = 0.0
    n_rec = max(int(recovery_window * trace.sample_rate), 1)
    for p in peaks:
        if seg_f[p] <= 0:
            continue
        trough = float(np.min(seg_f[p : p + n_rec + 1]))
        drop = seg_f[p] - trough
        if drop > noise_multiple * noise_sigma:
            worst = max(worst, 100.0 * drop / seg_f[p])
    return worst


def estimate_preload(
    trace: Trace, config: ClutchConfig, min_baseline_window: float = 3.0
) -> float:
    """Preload force from the pre-voltage kinetic-friction baseline."""
    t, f = trace.t, trace.force
    if trace.t_on - t[0] < min_baseline_window:
        raise InsufficientDataError(
            f"need {min_baseline_window} s of pre-voltage data, have {trace.t_on - t[0]:.2f} s"
        )
    baseline = float(np.mean(f[t < trace.t_on]))
    return preload_from_baseline(baseline, config, kinetic=True)


def fit_voltage_exponent(data) -> tuple[float, float, np.ndarray]:
    """Least-squares fit of F(V) = c*V^n in log-log space.

    Returns (c, n, stderr) where stderr covers [ln c, n].
    """
    arr = np.asarray(list(data), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
        raise ValueError("need at least 3 (voltage, force) pairs")
    v, fcap = arr[:, 0], arr[:, 1]
    if np.any(v <= 0) or np.any(fcap <= 0):
        raise ValueError("voltages and forces must be positive")

    def linmodel(params, lv):
        return params[0] + params[1] * lv

    res = fit_least_squares(linmodel, (np.log(v), np.log(fcap)), init=[0.0, 1.5])
    return float(math.exp(res.params[0])), float(res.params[1]), res.stderr


def analyze_trace(trace: Trace, config: ClutchConfig | None = None) -> dict:
    """Per-trace metric row: engagement (filtered channel), 90% and 10%
    release (raw channel), slip percentage, and preload when a config is
    supplied. Extraction failures are recorded as flags, not raised."""
    row: dict = {}
    filtered = lowpass_zero_phase(trace)
    try:
        eng = extract_engagement_time(filtered)
        row["engagement_s"] = eng.time_s
        row["engagement_ok"] = eng.ok
    except (InsufficientDataError, ValueError) as exc:
        row["engagement_s"] = None
        row["engagement_ok"] = False
        row["engagement_error"] = str(exc)
    for name, thr in (("release90_s", 0.9), ("release10_s", 0.1)):
        try:
            row[name] = extract_release_time(trace, threshold=thr)
        except (InsufficientDataError, NoReleaseError) as exc:
            row[name] = None
            row[f"{name}_error"] = str(exc)
    try:
        row["slip_pct"] = slip_percentage(trace)
    except InsufficientDataError as exc:
        row["slip_pct"] = None
        row["slip_error"] = str(exc)
    if config is not None:
        try:
            row["preload_n"] = estimate_preload(trace, config)
        except InsufficientDataError as exc:
            row["preload_n"] = None
            row["preload_error"] = str(exc)
    return row
