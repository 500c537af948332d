"""Coupled electromechanical gap dynamics: equations of motion, static
equilibria, shear force/capacity, engagement and release simulation (with
load-cell stick-slip), shear-capacity frequency response, and parameter
sweeps.

Gap coordinate: T_air is the mean dielectric-substrate separation, positive
opening away from the substrate. The dielectric's equation of motion is

    m_d * T..  =  F_k + F_b' - lambda*F_ea' - m_d*g - F_preload

with the contact force F_k opening the gap, the averaged squeeze-film force
F_b' = -b'(T) * T. opposing the gap rate, and the averaged electroadhesive
force closing it. The substrate is fixed vertically; its base normal force

    F_N,base = max(F_k + F_b' + m_s*g - lambda*F_ea', 0)

is a diagnostic only (a lift-off flag is set when the floor clamps it).
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import contact as contact_mod
from . import polarization as pol
from .constants import (
    DEFAULT_ABS_TOL,
    DEFAULT_ENGAGE_TRAVERSAL,
    DEFAULT_FLOOR_GAP,
    DEFAULT_FORCE_RATIO,
    DEFAULT_REL_TOL,
    DEFAULT_RELEASE_THRESHOLD,
    EPSILON_0,
    G_STANDARD,
    GAUSS_TRUNCATION_SIGMAS,
)
from .contact import AirProperties, ContactModel
from .electrostatics import ClutchGeometry
from .numerics import OdeProblem, Tolerance, solve_ivp
from .polarization import DielectricModel, DriveSignal

trapezoid = getattr(np, "trapezoid", None) or np.trapz


class NoEquilibriumError(RuntimeError):
    """The static balance has no root in the searched bracket."""


# ---------------------------------------------------------------------------
# Configuration types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LambdaLaw:
    """Electroadhesive-force multiplier law: ideal unity, a fixed value, or
    the fitted linear-in-voltage law (clamped at zero)."""

    kind: str = "linear"  # "unity" | "fixed" | "linear"
    value: float = 1.0
    intercept: float = 2.40
    slope: float = -0.0058  # [1/V]

    def __post_init__(self):
        if self.kind not in ("unity", "fixed", "linear"):
            raise ValueError(f"unknown lambda law kind {self.kind!r}")


def lambda_ea(v: float, law: LambdaLaw) -> float:
    """Multiplier applied to the averaged EA force at drive amplitude v."""
    if v < 0:
        raise ValueError("v must be >= 0")
    if law.kind == "unity":
        return 1.0
    if law.kind == "fixed":
        return max(law.value, 0.0)
    return max(law.intercept + law.slope * v, 0.0)


@dataclass(frozen=True)
class LoadCellModel:
    stiffness: float  # k_lc [N/m]
    damping: float  # b_lc [kg/s]
    mass: float  # m_lc [kg]
    resonance_check_hz: float | None = None

    def __post_init__(self):
        if not (self.stiffness > 0 and self.damping > 0 and self.mass > 0):
            raise ValueError("load cell parameters must be > 0")
        if self.resonance_check_hz is not None:
            f = self.resonance_hz
            if abs(f - self.resonance_check_hz) > 0.01 * self.resonance_check_hz:
                raise ValueError(
                    f"load cell resonance {f:.1f} Hz disagrees with the configured "
                    f"check value {self.resonance_check_hz:.1f} Hz by more than 1%"
                )

    @property
    def resonance_hz(self) -> float:
        return math.sqrt(self.stiffness / self.mass) / (2.0 * math.pi)


@dataclass(frozen=True)
class SimSettings:
    floor_gap: float = DEFAULT_FLOOR_GAP
    engage_traversal: float = DEFAULT_ENGAGE_TRAVERSAL
    release_threshold: float = DEFAULT_RELEASE_THRESHOLD
    force_ratio: float = DEFAULT_FORCE_RATIO
    rel_tol: float = DEFAULT_REL_TOL
    abs_tol: float = DEFAULT_ABS_TOL
    t_max: float = 0.05  # simulation horizon [s]
    stick_velocity: float = 1e-6  # |x.| below which the load cell can stick [m/s]

    def __post_init__(self):
        if not 0 < self.engage_traversal < 1:
            raise ValueError("engage_traversal must be in (0, 1)")
        if not 0 < self.release_threshold < 1:
            raise ValueError("release_threshold must be in (0, 1)")
        if not 0 < self.force_ratio <= 1:
            raise ValueError("force_ratio must be in (0, 1]")
        if not self.floor_gap > 0:
            raise ValueError("floor_gap must be > 0")


@dataclass(frozen=True)
class ClutchConfig:
    geometry: ClutchGeometry
    dielectric: DielectricModel
    contact: ContactModel
    drive: DriveSignal
    load_cell: LoadCellModel
    m_d: float  # dielectric moving mass [kg]
    m_s: float  # substrate mass [kg]
    f_preload: float  # [N]
    mu_d_static: float
    mu_d_kinetic: float
    mu_base_static: float
    mu_base_kinetic: float
    lambda_law: LambdaLaw = LambdaLaw()
    sim: SimSettings = SimSettings()
    g: float = G_STANDARD
    air: AirProperties = AirProperties()

    def __post_init__(self):
        if not (self.m_d > 0 and self.m_s > 0):
            raise ValueError("masses must be > 0")
        if self.f_preload < 0:
            raise ValueError("f_preload must be >= 0")
        for pair in (("mu_d_static", "mu_d_kinetic"), ("mu_base_static", "mu_base_kinetic")):
            s, k = (getattr(self, p) for p in pair)
            if s < 0 or k < 0:
                raise ValueError("friction coefficients must be >= 0")
            if s < k:
                raise ValueError(f"{pair[0]} must be >= {pair[1]}")

    @property
    def lam(self) -> float:
        return lambda_ea(self.drive.amplitude, self.lambda_law)


def default_dielectric_mass(geometry: ClutchGeometry, density: float) -> float:
    """Moving film mass over the substrate footprint: rho * T_d * L_s * w_s."""
    return (
        density
        * geometry.dielectric_thickness
        * geometry.substrate_overlap_length
        * geometry.substrate_width
    )


def default_substrate_mass(geometry: ClutchGeometry, density: float) -> float:
    """Substrate bar mass over the overlap length: rho * w_s * T_s * L_s."""
    return (
        density
        * geometry.substrate_width
        * geometry.substrate_thickness
        * geometry.substrate_overlap_length
    )


# ---------------------------------------------------------------------------
# Precomputed drive evaluation (hot path)
# ---------------------------------------------------------------------------


class _DriveEval:
    """Segment table of the filtered drive voltage and the ideal level edges
    up to a fixed horizon: O(log n) voltage lookups and vectorized
    polarization-edge access, exactly matching polarization.drive_voltage /
    drive_edges (cross-checked in tests)."""

    def __init__(self, signal: DriveSignal, horizon: float, t_off: float | None = None):
        self.signal = signal
        self.t_off = t_off
        bounds = [0.0]
        if signal.waveform == "bipolar_square":
            half = 0.5 / signal.frequency
            t_stop = horizon if t_off is None else min(horizon, t_off)
            bounds.extend(k * half for k in range(1, int(math.ceil(t_stop / half))))
        if t_off is not None and 0.0 < t_off <= horizon:
            bounds.append(t_off)
            bounds.sort()
        n = len(bounds)
        targets = np.empty(n)
        taus = np.empty(n)
        starts = np.empty(n)
        v = 0.0
        v_amp = signal.amplitude
        for i, t_k in enumerate(bounds):
            target = pol.ideal_drive_level(signal, t_k, t_off) * v_amp
            if t_off is not None and t_k >= t_off:
                tau = signal.tau_fall
            else:
                tau = signal.tau_rise if target > v else signal.tau_fall
            targets[i], taus[i], starts[i] = target, tau, v
            t_next = bounds[i + 1] if i + 1 < n else None
            if t_next is not None:
                v = target + (v - target) * math.exp(-(t_next - t_k) / tau)
        self.bounds = np.array(bounds)
        self.targets = targets
        self.taus = taus
        self.starts = starts
        # ideal-level edges for the polarization superposition
        edges = pol.drive_edges(signal, horizon, t_off)
        self.edge_times = np.array([e[0] for e in edges])
        self.edge_deltas = np.array([e[1] for e in edges])

    def voltage(self, t: float) -> float:
        if t <= 0 or self.signal.amplitude == 0:
            return 0.0
        i = int(np.searchsorted(self.bounds, t, side="right")) - 1
        tgt = self.targets[i]
        return tgt + (self.starts[i] - tgt) * math.exp(-(t - self.bounds[i]) / self.taus[i])


class _KappaTracker:
    """Effective permittivity under a drive, using the cached step-response
    kernel for vectorized edge superposition."""

    def __init__(self, model: DielectricModel, drive: _DriveEval):
        self.model = model
        self.drive = drive
        self.kernel = pol._step_kernel(model.alpha)
        self.dk = model.kappa_s - model.kappa_inf

    def state(self, t: float) -> float:
        n = int(np.searchsorted(self.drive.edge_times, t, side="right"))
        if n == 0:
            return 0.0
        ages = (t - self.drive.edge_times[:n]) / self.model.tau
        return float(np.dot(self.drive.edge_deltas[:n], self.kernel(ages)))

    def kappa(self, t: float) -> float:
        m = self.model
        return m.kappa_inf + self.dk * min(abs(self.state(t)), 1.0)


# ---------------------------------------------------------------------------
# Fast force evaluations (panel Gauss-Legendre; cross-checked against the
# adaptive-quadrature contact module in tests)
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


class _GapForces:
    """Per-configuration force engine for the gap ODE right-hand side."""

    def __init__(self, config: ClutchConfig):
        geom, cm = config.geometry, config.contact
        self.config = config
        self.sig = cm.sigma_d
        self.td = geom.dielectric_thickness
        self.contact_scale = (
            cm.stiffness_k * geom.substrate_overlap_length * geom.substrate_width * cm.sigma_d**1.5
        )
        self.ea_scale = 0.5 * EPSILON_0 * geom.n_electrodes * geom.overlap_area
        s_min = min(geom.substrate_overlap_length, geom.substrate_width)
        s_max = max(geom.substrate_overlap_length, geom.substrate_width)
        self.b_scale = 96.0 * config.air.dynamic_viscosity * s_min**3 * s_max / math.pi**4
        self.floor = config.sim.floor_gap

    # -- primitive kernels ---------------------------------------------------

    def contact_force(self, t_air: float) -> float:
        return self.contact_scale * contact_mod.g_three_halves(t_air / self.sig)

    def _gauss_panels(self, lo: float, hi: float, splits: Iterable[float]):
        pts = [lo] + sorted(s for s in splits if lo < s < hi) + [hi]
        taus = []
        wts = []
        for a, b in zip(pts[:-1], pts[1:]):
            half = 0.5 * (b - a)
            taus.append(0.5 * (a + b) + half * _GL_NODES)
            wts.append(half * _GL_WEIGHTS)
        return np.concatenate(taus), np.concatenate(wts)

    def ea_force_avg(self, t_air: float, kappa: float, v: float) -> float:
        """Roughness-averaged EA force; asperity-contact regions (local gap
        <= 0) contribute the saturated zero-gap force."""
        if v == 0.0:
            return 0.0
        sig = self.sig
        lo = t_air - GAUSS_TRUNCATION_SIGMAS * sig
        hi = max(t_air + GAUSS_TRUNCATION_SIGMAS * sig, sig)
        pref = self.ea_scale * kappa * kappa * (0.5 * v) ** 2
        f0 = pref / self.td**2
        total = 0.0
        if lo < 0.0:
            total += f0 * (_norm_cdf(-t_air / sig) - _norm_cdf((lo - t_air) / sig))
            lo = 0.0
        if lo >= hi:
            return total
        # resolve the sharp kernel variation near contact, scale T_d/kappa
        sc = self.td / kappa
        taus, wts = self._gauss_panels(lo, hi, (sc, 4.0 * sc, 16.0 * sc, sig, 3.0 * sig))
        dens = np.exp(-0.5 * ((taus - t_air) / sig) ** 2) / (sig * _SQRT_2PI)
        total += float(np.sum(wts * dens * pref / (self.td + kappa * taus) ** 2))
        return total

    def damping_coeff_avg(self, t_air: float) -> float:
        """Roughness-averaged squeeze-film coefficient with the floor-gap
        regularization; the average runs over local gaps in [0, inf)."""
        sig = self.sig
        lo = max(0.0, t_air - GAUSS_TRUNCATION_SIGMAS * sig)
        hi = max(t_air + GAUSS_TRUNCATION_SIGMAS * sig, lo + sig)
        b_floor = self.b_scale / self.floor**3
        total = 0.0
        if lo < self.floor:
            total += b_floor * (
                _norm_cdf((min(self.floor, hi) - t_air) / sig) - _norm_cdf((lo - t_air) / sig)
            )
            lo = self.floor
        if lo >= hi:
            return total
        taus, wts = self._gauss_panels(lo, hi, (2.0 * lo, 4.0 * lo, 8.0 * lo, 16.0 * lo))
        dens = np.exp(-0.5 * ((taus - t_air) / sig) ** 2) / (sig * _SQRT_2PI)
        total += float(np.sum(wts * dens * self.b_scale / taus**3))
        return total

    # -- assembled dynamics ----------------------------------------------------

    def gap_acceleration(
        self, t_air: float, tdot: float, kappa: float, v: float, lam: float
    ) -> tuple[float, dict]:
        cfg = self.config
        f_k = self.contact_force(t_air)
        b = self.damping_coeff_avg(t_air)
        f_b = -b * tdot
        f_ea = lam * self.ea_force_avg(t_air, kappa, abs(v))
        acc = (f_k + f_b - f_ea - cfg.m_d * cfg.g - cfg.f_preload) / cfg.m_d
        f_n_base_raw = f_k + f_b + cfg.m_s * cfg.g - f_ea
        diag = {
            "f_k": f_k,
            "f_b": f_b,
            "f_ea_adj": f_ea,
            "f_n_base": max(f_n_base_raw, 0.0),
            "base_liftoff": f_n_base_raw < 0.0,
        }
        return acc, diag

    def static_residual(self, t_air: float, kappa: float, v: float, lam: float) -> float:
        cfg = self.config
        return (
            self.contact_force(t_air)
            - lam * self.ea_force_avg(t_air, kappa, v)
            - cfg.m_d * cfg.g
            - cfg.f_preload
        )


def gap_dynamics_rhs(state: Sequence[float], t: float, config: ClutchConfig):
    """Public right-hand side of the gap equation of motion at time t under
    the configured drive. Returns (derivative, diagnostics)."""
    forces = _GapForces(config)
    kappa = pol.effective_kappa(config.dielectric, config.drive, max(t, 0.0))
    v = pol.drive_voltage(config.drive, max(t, 0.0))
    acc, diag = forces.gap_acceleration(state[0], state[1], kappa, v, config.lam)
    return np.array([state[1], acc]), diag


# ---------------------------------------------------------------------------
# Static equilibria
# ---------------------------------------------------------------------------


def equilibrium_gap(
    config: ClutchConfig,
    v: float,
    from_gap: float | None = None,
    _forces: "_GapForces | None" = None,
) -> float:
    """Gap solving the static balance F_k = lambda*F_ea' + m_d*g + F_preload
    at saturated polarization, reached by continuation from the V=0
    equilibrium (quasi-static loading path). Compression-regime roots are
    taken when continuation loses the open-gap branch (pull-in)."""
    forces = _forces or _GapForces(config)
    kappa_sat = config.dielectric.kappa_s
    lam = lambda_ea(v, config.lambda_law)
    sig = forces.sig

    if from_gap is None:
        def residual_v0(t_air):
            return forces.static_residual(t_air, kappa_sat, 0.0, lam)

        hi = 20.0 * sig
        if residual_v0(hi) > 0:
            raise NoEquilibriumError(
                "contact force exceeds gravity+preload even at 20 sigma_d; no V=0 equilibrium"
            )
        gap = brentq(residual_v0, 0.0, hi, xtol=1e-15)
    else:
        gap = from_gap
    if v == 0.0:
        return gap

    # continuation in voltage, evenly in V^2 (force scale)
    n_steps = 12
    for vsq in np.linspace(0.0, v * v, n_steps + 1)[1:]:
        vi = math.sqrt(vsq)

        def res(t_air, _vi=vi):
            return forces.static_residual(t_air, kappa_sat, _vi, lam)

        r_prev = res(gap)
        if r_prev == 0.0:
            continue
        if r_prev < 0.0:
            # root moved below the previous gap: expand downward
            step = max(0.05 * sig, 1e-9)
            lo = gap - step
            floor = -5.0 * sig
            while lo > floor and res(lo) < 0.0:
                step *= 2.0
                lo = max(lo - step, floor)
            if res(lo) < 0.0:
                raise NoEquilibriumError(
                    f"no static balance found down to {floor:.3e} m at V={vi:.1f}"
                )
            gap = brentq(res, lo, gap, xtol=1e-15)
        else:
            # (rare) root above: expand upward
            step = max(0.05 * sig, 1e-9)
            hi2 = gap + step
            while hi2 < 40.0 * sig and res(hi2) > 0.0:
                step *= 2.0
                hi2 = min(hi2 + step, 40.0 * sig)
            if res(hi2) > 0.0:
                raise NoEquilibriumError(f"no static balance found up to 40 sigma at V={vi:.1f}")
            gap = brentq(res, gap, hi2, xtol=1e-15)
    return gap


# ---------------------------------------------------------------------------
# Shear force, capacity, preload
# ---------------------------------------------------------------------------


def shear_force(config: ClutchConfig, f_n_base: float, f_k: float, moving: bool) -> float:
    """Shear friction on the substrate: mu_base*F_N,base + mu_d*F_k, kinetic
    coefficients while the substrate moves, static otherwise."""
    if moving:
        return config.mu_base_kinetic * f_n_base + config.mu_d_kinetic * f_k
    return config.mu_base_static * f_n_base + config.mu_d_static * f_k


def shear_capacity(config: ClutchConfig, t_air_settled: float) -> float:
    """Shear force capacity at a settled gap (static coefficients):

        F_max = mu_base*(m_d*g + m_s*g + F_preload) + mu_d*F_k(T_settled)
    """
    f_k = contact_mod.contact_force(
        t_air_settled,
        config.contact,
        config.geometry.substrate_overlap_length,
        config.geometry.substrate_width,
    )
    return (
        config.mu_base_static * ((config.m_d + config.m_s) * config.g + config.f_preload)
        + config.mu_d_static * f_k
    )


def preload_from_baseline(f_shear_v0: float, config: ClutchConfig, kinetic: bool = True) -> float:
    """Invert the V=0 sliding-friction baseline for the preload force:

        F_preload = (F_shear,V=0 - mu_base*m_s*g - mu_d*m_d*g) / (mu_d + mu_base)

    Kinetic coefficients by default (the baseline is measured while moving).
    Negative results are clamped to 0 with a warning.
    """
    if kinetic:
        mu_b, mu_d = config.mu_base_kinetic, config.mu_d_kinetic
    else:
        mu_b, mu_d = config.mu_base_static, config.mu_d_static
    denom = mu_d + mu_b
    if denom <= 0:
        raise ValueError("mu_d + mu_base must be > 0")
    preload = (f_shear_v0 - mu_b * config.m_s * config.g - mu_d * config.m_d * config.g) / denom
    if preload < 0:
        warnings.warn(
            f"baseline {f_shear_v0:.4g} N implies negative preload {preload:.4g} N; clamped to 0",
            stacklevel=2,
        )
        return 0.0
    return preload


def baseline_shear_v0(config: ClutchConfig, kinetic: bool = True) -> float:
    """V=0 sliding baseline, the exact algebraic inverse of preload_from_baseline."""
    if kinetic:
        mu_b, mu_d = config.mu_base_kinetic, config.mu_d_kinetic
    else:
        mu_b, mu_d = config.mu_base_static, config.mu_d_static
    return (
        mu_b * config.m_s * config.g
        + mu_d * config.m_d * config.g
        + (mu_d + mu_b) * config.f_preload
    )


# ---------------------------------------------------------------------------
# Simulation results
# ---------------------------------------------------------------------------


@dataclass
class SimResult:
    kind: str  # "engage" | "release"
    t: np.ndarray
    gap: np.ndarray
    gap_vel: np.ndarray
    shear: np.ndarray
    voltage: np.ndarray
    kappa_eff: np.ndarray
    termination_reason: str
    t_engage: float | None = None
    t_release: float | None = None
    x_lc: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {
            "kind": self.kind,
            "termination_reason": self.termination_reason,
            **{k: v for k, v in self.extras.items() if np.isscalar(v) or v is None},
        }
        if self.t_engage is not None:
            out["t_engage_s"] = self.t_engage
        if self.t_release is not None:
            out["t_release_s"] = self.t_release
        return out


# ---------------------------------------------------------------------------
# Engagement
# ---------------------------------------------------------------------------


def simulate_engagement(config: ClutchConfig) -> SimResult:
    """Integrate the gap equation from the V=0 equilibrium with the drive and
    polarization transients active; t_engage is when the gap has traversed
    the configured fraction (default 0.5%) of the way to the saturated-V
    equilibrium."""
    if config.drive.amplitude <= 0:
        raise ValueError("engagement requires a positive drive amplitude")
    forces = _GapForces(config)
    gap0 = equilibrium_gap(config, 0.0, _forces=forces)
    gap_inf = equilibrium_gap(config, config.drive.amplitude, from_gap=gap0, _forces=forces)
    target = gap0 - config.sim.engage_traversal * (gap0 - gap_inf)
    lam = config.lam
    drive = _DriveEval(config.drive, horizon=config.sim.t_max)
    tracker = _KappaTracker(config.dielectric, drive)

    def rhs(t, y):
        acc, _ = forces.gap_acceleration(y[0], y[1], tracker.kappa(t), drive.voltage(t), lam)
        return np.array([y[1], acc])

    def crossed(t, y):
        return y[0] - target

    problem = OdeProblem(rhs=rhs, initial_state=np.array([gap0, 0.0]), t0=0.0, events=[crossed])
    tol = Tolerance(config.sim.rel_tol, config.sim.abs_tol)
    traj = solve_ivp(problem, t_end=config.sim.t_max, tol=tol, method="LSODA")

    t_engage = traj.event_time
    reason = "engaged" if t_engage is not None else "no_engagement"
    t, y = traj.t, traj.y
    volts = np.array([drive.voltage(ti) for ti in t])
    kappas = np.array([tracker.kappa(ti) for ti in t])
    shear = np.empty_like(t)
    for i in range(len(t)):
        _, diag = forces.gap_acceleration(y[i, 0], y[i, 1], kappas[i], volts[i], lam)
        shear[i] = shear_force(config, diag["f_n_base"], diag["f_k"], moving=False)
    return SimResult(
        kind="engage",
        t=t,
        gap=y[:, 0],
        gap_vel=y[:, 1],
        shear=shear,
        voltage=volts,
        kappa_eff=kappas,
        termination_reason=reason,
        t_engage=t_engage,
        extras={
            "gap_initial_m": gap0,
            "gap_saturated_m": gap_inf,
            "gap_target_m": target,
            "capacity_n": shear_capacity(config, gap_inf),
        },
    )


# ---------------------------------------------------------------------------
# Release (coupled gap + load cell with stick-slip)
# ---------------------------------------------------------------------------


def simulate_release(
    config: ClutchConfig,
    loadcell: LoadCellModel | None = None,
    force_ratio: float | None = None,
) -> SimResult:
    """Release from the saturated-V equilibrium: the drive falls at t=0, the
    polarization depolarizes through the step-response kernel, and the load
    cell unloads against stick-slip friction. t_release is when the
    load-cell force k_lc*x_lc first falls the configured fraction (default
    90%) of the way from its initial to its final settled value."""
    lc = loadcell or config.load_cell
    ratio = config.sim.force_ratio if force_ratio is None else force_ratio
    if not 0 < ratio <= 1:
        raise ValueError("force_ratio must be in (0, 1]")

    forces = _GapForces(config)
    gap_r = equilibrium_gap(config, config.drive.amplitude, _forces=forces)
    f_max_pred = shear_capacity(config, gap_r)
    x0 = (f_max_pred / lc.stiffness) * ratio
    lam = config.lam
    model, signal = config.dielectric, config.drive
    dk = model.kappa_s - model.kappa_inf
    kernel = pol._step_kernel(model.alpha)
    v_amp = signal.amplitude
    tau_f = signal.tau_fall

    def kappa_at(t: float) -> float:
        # depolarization from the saturated state through the same kernel
        return model.kappa_inf + dk * (1.0 - float(kernel(t / model.tau)))

    def v_at(t: float) -> float:
        return v_amp * math.exp(-t / tau_f)

    def gap_forces_at(t, t_air, tdot):
        return forces.gap_acceleration(t_air, tdot, kappa_at(t), v_at(t), lam)

    def static_capacity(t, t_air, tdot) -> float:
        _, diag = gap_forces_at(t, t_air, tdot)
        return shear_force(config, diag["f_n_base"], diag["f_k"], moving=False)

    def kinetic_friction(t, t_air, tdot) -> float:
        _, diag = gap_forces_at(t, t_air, tdot)
        return shear_force(config, diag["f_n_base"], diag["f_k"], moving=True)

    tol = Tolerance(config.sim.rel_tol, config.sim.abs_tol)
    t_max = config.sim.t_max
    v_stick = config.sim.stick_velocity

    ts: list[np.ndarray] = []
    states: list[np.ndarray] = []  # columns T, Tdot, x, xdot

    t_cur = 0.0
    z = np.array([gap_r, 0.0, x0, 0.0])
    reason = "t_max_reached"
    stuck = True
    direction = -1.0
    guard = 0
    while t_cur < t_max:
        guard += 1
        if guard > 400:
            reason = "phase_limit"
            break
        if stuck:
            x_hold = z[2]

            def rhs_stuck(t, y):
                acc, _ = gap_forces_at(t, y[0], y[1])
                return np.array([y[1], acc])

            def breakaway(t, y, _x=x_hold):
                return static_capacity(t, y[0], y[1]) - lc.stiffness * _x

            if breakaway(t_cur, z[:2]) <= 0.0:
                ev_time = t_cur
            else:
                problem = OdeProblem(rhs_stuck, z[:2].copy(), t0=t_cur, events=[breakaway])
                traj = solve_ivp(problem, t_end=t_max, tol=tol, method="LSODA")
                seg_t = traj.t
                seg = np.column_stack(
                    [
                        traj.y[:, 0],
                        traj.y[:, 1],
                        np.full_like(seg_t, x_hold),
                        np.zeros_like(seg_t),
                    ]
                )
                ts.append(seg_t)
                states.append(seg)
                z = np.array([traj.y[-1, 0], traj.y[-1, 1], x_hold, 0.0])
                ev_time = traj.event_time
            if ev_time is None:
                reason = "stuck_permanently"
                t_cur = t_max
                break
            t_cur = ev_time
            stuck = False
            direction = -1.0 if z[2] > 0 else 1.0
        else:
            sgn = direction

            def rhs_slide(t, y, _sgn=sgn):
                acc, _ = gap_forces_at(t, y[0], y[1])
                fric = kinetic_friction(t, y[0], y[1])
                x_acc = (-lc.stiffness * y[2] - lc.damping * y[3] - fric * _sgn) / lc.mass
                return np.array([y[1], acc, y[3], x_acc])

            def stopped(t, y, _sgn=sgn):
                return y[3] + v_stick * _sgn  # velocity back near zero

            def returned(t, y):
                return y[2]

            problem = OdeProblem(rhs_slide, z.copy(), t0=t_cur, events=[returned, stopped])
            traj = solve_ivp(problem, t_end=t_max, tol=tol, method="LSODA")
            ts.append(traj.t)
            states.append(traj.y.copy())
            z = traj.y[-1].copy()
            if traj.event_time is None:
                t_cur = t_max
                break
            t_cur = traj.event_time
            if traj.event_index == 0:
                reason = "released"
                break
            # velocity fell to ~0: stick or reverse
            z[3] = 0.0
            if abs(lc.stiffness * z[2]) <= static_capacity(t_cur, z[0], z[1]):
                stuck = True
            else:
                direction = -1.0 if z[2] > 0 else 1.0

    t_all = np.concatenate(ts) if ts else np.array([0.0])
    z_all = np.vstack(states) if states else z[None, :]
    keep = np.concatenate([[True], np.diff(t_all) > 0])
    t_all, z_all = t_all[keep], z_all[keep]

    f_lc = lc.stiffness * z_all[:, 2]
    f0 = lc.stiffness * x0
    f_end = 0.0 if reason == "released" else float(f_lc[-1])
    thresh = config.sim.release_threshold
    target = f0 - thresh * (f0 - f_end)
    below = np.nonzero(f_lc <= target)[0]
    t_release = None
    if len(below):
        i = int(below[0])
        if i == 0:
            t_release = float(t_all[0])
        else:
            t_release = float(np.interp(target, [f_lc[i], f_lc[i - 1]], [t_all[i], t_all[i - 1]]))

    volts = np.array([v_at(ti) for ti in t_all])
    kappas = np.array([kappa_at(ti) for ti in t_all])
    return SimResult(
        kind="release",
        t=t_all,
        gap=z_all[:, 0],
        gap_vel=z_all[:, 1],
        shear=f_lc,
        voltage=volts,
        kappa_eff=kappas,
        termination_reason=reason,
        t_release=t_release,
        x_lc=z_all[:, 2],
        extras={
            "gap_initial_m": gap_r,
            "capacity_n": f_max_pred,
            "x_lc_initial_m": x0,
            "force_ratio": ratio,
        },
    )


# ---------------------------------------------------------------------------
# Shear-capacity frequency response
# ---------------------------------------------------------------------------


def capacity_vs_frequency(
    config: ClutchConfig,
    freqs: Sequence[float],
    settle_rel_change: float = 2e-3,
    max_blocks: int = 30,
) -> list[dict]:
    """Settle the gap dynamics under steady AC drive at each frequency and
    apply the capacity law to the period-averaged contact force. Rows carry
    the period-averaged F_k and lambda*F_ea' plus a settling flag."""
    if any(f <= 0 for f in freqs):
        raise ValueError("frequencies must be > 0")
    forces = _GapForces(config)
    lam = config.lam
    tol = Tolerance(config.sim.rel_tol, config.sim.abs_tol)
    mu_term = config.mu_base_static * ((config.m_d + config.m_s) * config.g + config.f_preload)
    gap_start = equilibrium_gap(config, config.drive.amplitude, _forces=forces)

    rows = []
    for f in freqs:
        signal = replace(config.drive, waveform="bipolar_square", frequency=f)
        period = 1.0 / f
        block = period * max(1, math.ceil(0.002 / period))
        horizon = block * (max_blocks + 2) + period
        drive = _DriveEval(signal, horizon=horizon)
        tracker = _KappaTracker(config.dielectric, drive)

        def rhs(t, y):
            acc, _ = forces.gap_acceleration(
                y[0], y[1], tracker.kappa(t), drive.voltage(t), lam
            )
            return np.array([y[1], acc])

        z = np.array([gap_start, 0.0])
        t_cur = 0.0
        prev_mean = None
        settled = False
        for _ in range(max_blocks):
            problem = OdeProblem(rhs, z.copy(), t0=t_cur)
            traj = solve_ivp(problem, t_end=t_cur + block, tol=tol, method="LSODA")
            z = traj.y[-1].copy()
            mean_gap = float(trapezoid(traj.y[:, 0], traj.t) / (traj.t[-1] - traj.t[0]))
            t_cur = traj.t[-1]
            if prev_mean is not None and abs(mean_gap - prev_mean) <= settle_rel_change * abs(
                prev_mean
            ):
                settled = True
                break
            prev_mean = mean_gap
        if not settled:
            warnings.warn(f"gap did not settle at {f:.3g} Hz; using last period", stacklevel=2)

        # densely sample one steady-state period
        t_grid = np.linspace(t_cur, t_cur + period, 257)
        problem = OdeProblem(rhs, z.copy(), t0=t_cur)
        traj = solve_ivp(
            problem, t_end=t_cur + period, tol=tol, method="LSODA", t_eval=t_grid
        )
        gaps = traj.y[:, 0]
        f_k = np.array([forces.contact_force(g) for g in gaps])
        f_ea = np.array(
            [
                lam * forces.ea_force_avg(g, tracker.kappa(ti), abs(drive.voltage(ti)))
                for g, ti in zip(gaps, traj.t)
            ]
        )
        mean_fk = float(trapezoid(f_k, traj.t) / period)
        mean_fea = float(trapezoid(f_ea, traj.t) / period)
        rows.append(
            {
                "frequency_hz": f,
                "capacity_n": mu_term + config.mu_d_static * mean_fk,
                "mean_f_k_n": mean_fk,
                "mean_f_ea_adj_n": mean_fea,
                "mean_gap_m": float(trapezoid(gaps, traj.t) / period),
                "settled": settled,
            }
        )
    return rows


def dc_capacity(config: ClutchConfig) -> float:
    """Low-frequency limit of the shear capacity (saturated dc equilibrium)."""
    gap = equilibrium_gap(config, config.drive.amplitude)
    return shear_capacity(config, gap)


def minus_3db_frequency(
    freqs: Sequence[float], capacities: Sequence[float], ref: float
) -> float | None:
    """Log-interpolated frequency where the capacity crosses ref/sqrt(2)."""
    target = ref / math.sqrt(2.0)
    f_arr = np.asarray(freqs, dtype=float)
    c_arr = np.asarray(capacities, dtype=float)
    order = np.argsort(f_arr)
    f_arr, c_arr = f_arr[order], c_arr[order]
    for i in range(len(f_arr) - 1):
        c1, c2 = c_arr[i], c_arr[i + 1]
        if (c1 - target) * (c2 - target) <= 0 and c1 != c2:
            lf1, lf2 = math.log(f_arr[i]), math.log(f_arr[i + 1])
            return math.exp(lf1 + (target - c1) * (lf2 - lf1) / (c2 - c1))
    return None


# ---------------------------------------------------------------------------
# Parameter sweeps
# ---------------------------------------------------------------------------


def _sweep_cell(args: tuple) -> dict:
    config_dict, overrides, metric = args
    from . import config as config_io

    row = dict(overrides)
    try:
        cfg = config_io.config_from_dict(config_io.apply_overrides(config_dict, overrides))
        if metric == "engage":
            result = simulate_engagement(cfg)
            row["metric_s"] = result.t_engage
        else:
            result = simulate_release(cfg)
            row["metric_s"] = result.t_release
        row["termination_reason"] = result.termination_reason
        row["error"] = ""
    except Exception as exc:  # per-cell failures recorded in-row
        row["metric_s"] = None
        row["termination_reason"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def parameter_sweep(
    base_config: ClutchConfig,
    axes: dict[str, Sequence],
    metric: str,
    workers: int = 1,
) -> list[dict]:
    """Full cross-product sweep over dot-path config axes, rows ordered
    lexicographically by axis name then grid position. Cells are pure and
    may run concurrently; row order is deterministic regardless."""
    if metric not in ("engage", "release"):
        raise ValueError("metric must be 'engage' or 'release'")
    if not axes or any(len(v) == 0 for v in axes.values()):
        raise ValueError("axes must be non-empty grids")
    from . import config as config_io

    base_dict = config_io.config_to_dict(base_config)
    names = sorted(axes)
    cells = [
        (base_dict, dict(zip(names, combo)), metric)
        for combo in itertools.product(*(list(axes[n]) for n in names))
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    return rows
