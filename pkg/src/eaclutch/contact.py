"""Greenwood-Williamson rough-surface contact force, squeeze-film damping,
and Gaussian roughness averaging of the damping and electroadhesive forces.

The asperity-height distribution is Gaussian with standard deviation
sigma_d; averages over it use the standard normal density (the source
material's printed exponent drops the square; the standard density is
used here). Averages are truncated at +/-8 sigma_d and evaluated with
adaptive quadrature; the dynamics hot path uses a fixed-order panel rule
cross-checked against this module in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

from . import electrostatics
from .constants import DEFAULT_FLOOR_GAP, GAUSS_TRUNCATION_SIGMAS, MU_AIR
from .electrostatics import ClutchGeometry
from .numerics import DEFAULT_TOL, Tolerance, bessel_k, fit_least_squares, quadrature

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# G_{3/2}(0) = 2^(1/4) * Gamma(5/4) / sqrt(2*pi)
G_THREE_HALVES_AT_ZERO = 2.0**0.25 * math.gamma(1.25) / _SQRT_2PI


@dataclass(frozen=True)
class ContactModel:
    """Fitted GW stiffness coefficient [N m^-3.5] and roughness scale [m]."""

    stiffness_k: float
    sigma_d: float

    def __post_init__(self):
        if not self.stiffness_k > 0:
            raise ValueError("stiffness_k must be > 0")
        if not self.sigma_d > 0:
            raise ValueError("sigma_d must be > 0")


@dataclass(frozen=True)
class AirProperties:
    dynamic_viscosity: float = MU_AIR

    def __post_init__(self):
        if not self.dynamic_viscosity > 0:
            raise ValueError("dynamic_viscosity must be > 0")


def _normal_pdf(x: np.ndarray | float) -> np.ndarray | float:
    return np.exp(-0.5 * np.square(x)) / _SQRT_2PI


def g_three_halves(h: float) -> float:
    """GW load integral G_{3/2}(h) = int_h^inf (s-h)^1.5 phi(s) ds.

    Closed form in terms of K_{1/4} and K_{3/4} for h > 0; the defining
    integral for h < 0 (the closed form's sqrt(h) is invalid there), which
    the gap dynamics can reach in the compression regime.
    """
    if h == 0.0:
        return G_THREE_HALVES_AT_ZERO
    if h < 0.0:
        return quadrature(
            lambda u: u**1.5 * _normal_pdf(u + h), 0.0, -h + 40.0, Tolerance(1e-12, 1e-16)
        )
    if h > 38.0:  # below double-precision underflow of the Gaussian weight
        return 0.0
    x = 0.25 * h * h
    return (
        math.sqrt(h)
        * math.exp(-x)
        / (4.0 * math.sqrt(math.pi))
        * ((h * h + 1.0) * bessel_k(0.25, x) - h * h * bessel_k(0.75, x))
    )


def contact_force(t_air: float, model: ContactModel, l_s: float, w_s: float) -> float:
    """GW stiffness force F_k = k * L_s * w_s * sigma_d^1.5 * G_{3/2}(T_air/sigma_d)."""
    return (
        model.stiffness_k
        * l_s
        * w_s
        * model.sigma_d**1.5
        * g_three_halves(t_air / model.sigma_d)
    )


def gap_from_contact_force(force: float, model: ContactModel, l_s: float, w_s: float) -> float:
    """Invert contact_force for the mean gap (monotone in t_air)."""
    scale = model.stiffness_k * l_s * w_s * model.sigma_d**1.5
    if force <= 0:
        raise ValueError("force must be > 0")
    target = force / scale
    lo, hi = -10.0, 37.0
    if target >= g_three_halves(lo):
        raise ValueError(f"force {force} exceeds the model's range at h={lo}")
    return model.sigma_d * brentq(lambda h: g_three_halves(h) - target, lo, hi, xtol=1e-13)


def squeeze_film_damping_coeff(
    t_air: float, l_s: float, w_s: float, air: AirProperties = AirProperties()
) -> float:
    """First-order squeeze-film coefficient for a large flat plate:

        b = 96 * mu_air * min(L,w)^3 * max(L,w) / (pi^4 * t_air^3)

    The damping force is F_b = -b * d(T_air)/dt.
    """
    if t_air <= 0:
        raise ValueError(f"t_air must be > 0 for the continuum film model, got {t_air}")
    s_min, s_max = min(l_s, w_s), max(l_s, w_s)
    return 96.0 * air.dynamic_viscosity * s_min**3 * s_max / (math.pi**4 * t_air**3)


def averaged_damping_coeff(
    t_air: float,
    model: ContactModel,
    l_s: float,
    w_s: float,
    air: AirProperties = AirProperties(),
    floor_gap: float = DEFAULT_FLOOR_GAP,
    tol: Tolerance = Tolerance(1e-9, 1e-14),
) -> float:
    """Squeeze-film coefficient averaged over the Gaussian asperity-height
    distribution, local gaps floored at floor_gap where continuum film
    theory breaks down. Integration range is [0, inf) truncated at 8 sigma."""
    sig = model.sigma_d
    lo = max(0.0, t_air - GAUSS_TRUNCATION_SIGMAS * sig)
    hi = max(t_air + GAUSS_TRUNCATION_SIGMAS * sig, lo + sig)
    b_floor = squeeze_film_damping_coeff(floor_gap, l_s, w_s, air)

    def integrand(tau):
        b = b_floor if tau < floor_gap else squeeze_film_damping_coeff(tau, l_s, w_s, air)
        return b * _normal_pdf((tau - t_air) / sig) / sig

    if floor_gap <= lo or floor_gap >= hi:
        return quadrature(integrand, lo, hi, tol)
    return quadrature(integrand, lo, floor_gap, tol) + quadrature(integrand, floor_gap, hi, tol)


def averaged_damping_force(
    t_air: float,
    tdot: float,
    model: ContactModel,
    l_s: float,
    w_s: float,
    air: AirProperties = AirProperties(),
    floor_gap: float = DEFAULT_FLOOR_GAP,
) -> float:
    """Roughness-averaged damping force, opposing the gap rate."""
    return -averaged_damping_coeff(t_air, model, l_s, w_s, air, floor_gap) * tdot


def averaged_ea_force(
    t_air: float,
    geom: ClutchGeometry,
    kappa: float,
    v: float,
    model: ContactModel,
    tol: Tolerance = Tolerance(1e-9, 1e-14),
) -> float:
    """Electroadhesive normal force averaged over the Gaussian asperity-height
    distribution. Where asperities are in contact (local gap <= 0) the
    flat-plate kernel saturates at its zero-gap value; this is what produces
    the large force amplification near T_air ~ sigma_d.
    """
    sig = model.sigma_d
    lo = t_air - GAUSS_TRUNCATION_SIGMAS * sig
    hi = max(t_air + GAUSS_TRUNCATION_SIGMAS * sig, lo + sig)
    f_contact_value, _ = electrostatics.ea_normal_force(geom, kappa, v, 0.0)

    def kernel(tau):
        if tau <= 0.0:
            return f_contact_value
        return electrostatics.ea_normal_force(geom, kappa, v, tau)[0]

    def integrand(tau):
        return kernel(tau) * _normal_pdf((tau - t_air) / sig) / sig

    if lo >= 0.0:
        return quadrature(integrand, lo, hi, tol)
    # contact mass handled in closed form, open-gap part by quadrature
    contact_mass = norm.cdf(-t_air / sig) - norm.cdf((lo - t_air) / sig)
    return f_contact_value * contact_mass + quadrature(integrand, 0.0, hi, tol)


def fit_contact_model(
    data,
    geom: ClutchGeometry,
    kappa: float,
    tol: Tolerance = DEFAULT_TOL,
) -> tuple[ContactModel, dict]:
    """Calibrate (k, sigma_d) from capacitance-vs-normal-force data.

    Capacitances are converted to mean gaps by inverting the series
    capacitance law; the GW force law is then least-squares fit with
    residuals on the gap (the noisy, derived quantity). Returns the model
    and a report with the predicted capacitance curve, standard errors,
    and a monotonicity warning flag.
    """
    arr = np.asarray(list(data), dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise ValueError("need at least 2 (normal_force, capacitance) pairs")
    force = arr[:, 0]
    cap = arr[:, 1]
    if np.any(cap <= 0):
        raise ValueError("capacitances must be positive")
    if np.any(force <= 0):
        raise ValueError("normal forces must be positive")
    gaps = np.array([electrostatics.air_gap_from_capacitance(geom, kappa, c) for c in cap])

    order = np.argsort(force)
    monotone = bool(np.all(np.diff(gaps[order]) <= 0))

    l_s, w_s = geom.substrate_overlap_length, geom.substrate_width
    sigma0 = max((gaps.max() - gaps.min()) / 2.0, 1e-8)
    h0 = max(gaps.max(), sigma0) / sigma0
    k0 = force.max() / (l_s * w_s * sigma0**1.5 * max(g_three_halves(h0), 1e-12))

    def model_gaps(params, f):
        k, sig = params
        m = ContactModel(max(k, 1e3), max(sig, 1e-9))
        return np.array([gap_from_contact_force(fi, m, l_s, w_s) for fi in f])

    # fit log-parameters: both are positive scale parameters
    def model_log(params, f):
        return model_gaps(np.exp(params), f)

    res = fit_least_squares(
        model_log, (force, gaps), init=np.log([k0, sigma0]), bounds=None, tol=tol
    )
    k_fit, sig_fit = np.exp(res.params)
    fitted = ContactModel(k_fit, sig_fit)

    cap_pred = np.array(
        [
            electrostatics.capacitance_ice(
                geom, kappa, max(gap_from_contact_force(fi, fitted, l_s, w_s), 0.0)
            )
            for fi in force
        ]
    )
    report = {
        "gaps_m": gaps,
        "predicted_capacitance_f": cap_pred,
        "stderr_log_params": res.stderr,
        "residual_norm_m": res.residual_norm,
        "gaps_monotone_in_force": monotone,
    }
    return fitted, report
