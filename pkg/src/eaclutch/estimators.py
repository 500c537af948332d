"""Calibration fits with a scikit-learn estimator interface.

Each estimator wraps one calibration procedure with fit/predict plus the
inherited get_params/set_params, so the calibrations compose with sklearn
pipelines and grid search. X arguments are 1-D arrays (a single-column 2-D
array is accepted and flattened).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import contact as contact_mod
from . import dynamics
from .contact import ContactModel
from .electrostatics import ClutchGeometry
from .numerics import Tolerance, fit_least_squares
from .polarization import DielectricModel, cole_cole_kappa


def _as_1d(x, name: str, positive: bool = False) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if positive and np.any(arr <= 0):
        raise ValueError(f"{name} must be strictly positive")
    return arr


class ColeColeFit(BaseEstimator):
    """Fit the real part of the Cole-Cole permittivity to
    (frequency [Hz], kappa') data with kappa_inf held fixed.

    Fitted attributes: kappa_s_, tau_, alpha_, stderr_, residual_norm_.
    """

    def __init__(self, kappa_inf: float = 4.0):
        self.kappa_inf = kappa_inf

    def _model(self, params: np.ndarray, f_hz: np.ndarray) -> np.ndarray:
        kappa_s, log_tau, alpha = params
        m = DielectricModel(
            kappa_inf=self.kappa_inf,
            kappa_s=max(kappa_s, self.kappa_inf),
            tau=np.exp(log_tau),
            alpha=min(max(alpha, 1e-3), 1.0),
        )
        return np.array([cole_cole_kappa(m, 2.0 * np.pi * f).real for f in f_hz])

    def fit(self, X, y):
        f_hz = _as_1d(X, "frequency", positive=True)
        kappa = _as_1d(y, "kappa_real")
        if len(f_hz) != len(kappa):
            raise ValueError("frequency and kappa arrays differ in length")
        if len(f_hz) < 3:
            raise ValueError("need at least 3 points")
        if np.log10(f_hz.max() / f_hz.min()) < 2.0:
            raise ValueError("data must span at least 2 decades of frequency")

        kappa_s0 = float(max(kappa.max(), self.kappa_inf + 1.0))
        # crude corner estimate: frequency where kappa' is halfway down
        half = 0.5 * (kappa.max() + kappa.min())
        idx = int(np.argmin(np.abs(kappa - half)))
        tau0 = 1.0 / (2.0 * np.pi * f_hz[idx])
        res = fit_least_squares(
            self._model,
            (f_hz, kappa),
            init=[kappa_s0, np.log(tau0), 0.6],
            bounds=[(self.kappa_inf, np.inf), (np.log(1e-12), np.log(1.0)), (0.01, 1.0)],
        )
        self.kappa_s_, log_tau, self.alpha_ = map(float, res.params)
        self.tau_ = float(np.exp(log_tau))
        self.stderr_ = res.stderr
        self.residual_norm_ = res.residual_norm
        return self

    def predict(self, X):
        check_is_fitted(self, "kappa_s_")
        f_hz = _as_1d(X, "frequency", positive=True)
        return self._model([self.kappa_s_, np.log(self.tau_), self.alpha_], f_hz)

    def model_(self) -> DielectricModel:
        check_is_fitted(self, "kappa_s_")
        return DielectricModel(
            kappa_inf=self.kappa_inf, kappa_s=self.kappa_s_, tau=self.tau_, alpha=self.alpha_
        )


class ContactFit(BaseEstimator):
    """Fit the rough-surface contact model (stiffness coefficient and
    roughness scale) from capacitance-vs-normal-force calibration data.

    X is the applied normal force [N], y the measured capacitance [F].
    Fitted attributes: stiffness_k_, sigma_d_, gaps_m_, capacitance_pred_,
    gaps_monotone_.
    """

    def __init__(self, geometry: ClutchGeometry = None, kappa: float = 54.2):
        self.geometry = geometry
        self.kappa = kappa

    def fit(self, X, y):
        if self.geometry is None:
            raise ValueError("geometry must be provided")
        force = _as_1d(X, "normal_force", positive=True)
        cap = _as_1d(y, "capacitance", positive=True)
        if len(force) != len(cap):
            raise ValueError("force and capacitance arrays differ in length")
        model, report = contact_mod.fit_contact_model(
            np.column_stack([force, cap]), self.geometry, self.kappa
        )
        self.stiffness_k_ = model.stiffness_k
        self.sigma_d_ = model.sigma_d
        self.gaps_m_ = report["gaps_m"]
        self.capacitance_pred_ = report["predicted_capacitance_f"]
        self.gaps_monotone_ = report["gaps_monotone_in_force"]
        self.stderr_log_params_ = report["stderr_log_params"]
        if not self.gaps_monotone_:
            import warnings

            warnings.warn("estimated gaps are not monotone in force; fit proceeds", stacklevel=2)
        return self

    def predict(self, X):
        """Model capacitance at the given normal forces."""
        check_is_fitted(self, "stiffness_k_")
        force = _as_1d(X, "normal_force", positive=True)
        from . import electrostatics

        m = self.model_()
        geom = self.geometry
        out = np.empty_like(force)
        for i, f in enumerate(force):
            gap = contact_mod.gap_from_contact_force(
                f, m, geom.substrate_overlap_length, geom.substrate_width
            )
            out[i] = electrostatics.capacitance_ice(geom, self.kappa, max(gap, 0.0))
        return out

    def model_(self) -> ContactModel:
        check_is_fitted(self, "stiffness_k_")
        return ContactModel(stiffness_k=self.stiffness_k_, sigma_d=self.sigma_d_)


class VoltageExponentFit(BaseEstimator):
    """Fit F_shear,max(V) = c * V^n in log-log space.

    Fitted attributes: prefactor_, exponent_, stderr_ (on [ln c, n]).
    """

    def fit(self, X, y):
        v = _as_1d(X, "voltage", positive=True)
        f = _as_1d(y, "shear_capacity", positive=True)
        if len(v) != len(f):
            raise ValueError("voltage and capacity arrays differ in length")
        if len(v) < 3:
            raise ValueError("need at least 3 points")

        def linmodel(params, lv):
            return params[0] + params[1] * lv

        res = fit_least_squares(linmodel, (np.log(v), np.log(f)), init=[0.0, 1.5])
        self.prefactor_ = float(np.exp(res.params[0]))
        self.exponent_ = float(res.params[1])
        self.stderr_ = res.stderr
        self.residual_norm_ = res.residual_norm
        return self

    def predict(self, X):
        check_is_fitted(self, "exponent_")
        v = _as_1d(X, "voltage", positive=True)
        return self.prefactor_ * v**self.exponent_


class LambdaLawFit(BaseEstimator):
    """Fit the linear-in-voltage electroadhesive-force multiplier from
    measured shear capacities.

    For each (V, F_max) pair the multiplier that makes the settled-gap
    capacity prediction match the measurement is solved for, then a line
    lambda(V) = intercept + slope*V is least-squares fit.

    X is drive amplitude [V], y measured shear capacity [N].
    Fitted attributes: intercept_, slope_, lambdas_.
    """

    def __init__(self, config=None):
        self.config = config

    def fit(self, X, y):
        from dataclasses import replace

        from scipy.optimize import brentq

        if self.config is None:
            raise ValueError("config must be provided")
        v = _as_1d(X, "voltage", positive=True)
        f = _as_1d(y, "shear_capacity", positive=True)
        if len(v) != len(f):
            raise ValueError("voltage and capacity arrays differ in length")

        def capacity_at(vi: float, lam: float) -> float:
            cfg = replace(
                self.config,
                drive=replace(self.config.drive, amplitude=vi),
                lambda_law=dynamics.LambdaLaw(kind="fixed", value=lam),
            )
            gap = dynamics.equilibrium_gap(cfg, vi)
            return dynamics.shear_capacity(cfg, gap)

        lambdas = np.empty_like(v)
        for i, (vi, fi) in enumerate(zip(v, f)):
            lo, hi = 1e-3, 50.0
            if capacity_at(vi, hi) < fi:
                lambdas[i] = hi
                continue
            if capacity_at(vi, lo) > fi:
                lambdas[i] = lo
                continue
            lambdas[i] = brentq(lambda lam: capacity_at(vi, lam) - fi, lo, hi, xtol=1e-6)

        def linmodel(params, x):
            return params[0] + params[1] * x

        res = fit_least_squares(linmodel, (v, lambdas), init=[1.0, 0.0])
        self.intercept_ = float(res.params[0])
        self.slope_ = float(res.params[1])
        self.stderr_ = res.stderr
        self.lambdas_ = lambdas
        return self

    def predict(self, X):
        check_is_fitted(self, "intercept_")
        v = _as_1d(X, "voltage", positive=True)
        return np.maximum(self.intercept_ + self.slope_ * v, 0.0)

    def law_(self) -> dynamics.LambdaLaw:
        check_is_fitted(self, "intercept_")
        return dynamics.LambdaLaw(kind="linear", intercept=self.intercept_, slope=self.slope_)
