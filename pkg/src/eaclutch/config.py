"""JSON configuration: loading, validation with field-level error messages,
dot-path overrides, canonical hashing, and the bundled nominal setup.

The document mirrors the physical description in SI units; masses may be
null, in which case they default to density * footprint volume.
"""

from __future__ import annotations

import copy
import hashlib
import json
from importlib import resources
from pathlib import Path
from typing import Any

from .constants import DENSITY_BRASS
from .contact import ContactModel
from .dynamics import (
    ClutchConfig,
    LambdaLaw,
    LoadCellModel,
    SimSettings,
    default_dielectric_mass,
    default_substrate_mass,
)
from .electrostatics import ClutchGeometry
from .polarization import DielectricModel, DriveSignal


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


class _Section:
    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ConfigError(path or "<root>", f"expected an object, got {type(data).__name__}")
        self.data = data
        self.path = path

    def _key(self, name: str) -> str:
        return f"{self.path}.{name}" if self.path else name

    def require(self, name: str, kind=float):
        if name not in self.data:
            raise ConfigError(self._key(name), "missing required field")
        return self._convert(name, self.data[name], kind)

    def get(self, name: str, default, kind=float):
        if name not in self.data or self.data[name] is None:
            return default
        return self._convert(name, self.data[name], kind)

    def _convert(self, name: str, value, kind):
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(self._key(name), f"expected a number, got {value!r}")
            return float(value)
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(self._key(name), f"expected an integer, got {value!r}")
            return value
        if kind is str:
            if not isinstance(value, str):
                raise ConfigError(self._key(name), f"expected a string, got {value!r}")
            return value
        raise AssertionError(kind)

    def section(self, name: str) -> "_Section":
        if name not in self.data:
            raise ConfigError(self._key(name), "missing required section")
        return _Section(self.data[name], self._key(name))

    def optional_section(self, name: str) -> "_Section":
        return _Section(self.data.get(name, {}), self._key(name))


def config_from_dict(doc: dict) -> ClutchConfig:
    root = _Section(doc, "")
    g = root.section("geometry")
    try:
        geometry = ClutchGeometry(
            n_electrodes=g.require("n_electrodes", int),
            electrode_length=g.require("electrode_length_m"),
            electrode_gap=g.require("electrode_gap_m"),
            dielectric_thickness=g.require("dielectric_thickness_m"),
            substrate_overlap_length=g.require("substrate_overlap_length_m"),
            substrate_width=g.require("substrate_width_m"),
            substrate_thickness=g.require("substrate_thickness_m"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("geometry", str(exc)) from exc

    d = root.section("dielectric")
    try:
        dielectric = DielectricModel(
            kappa_inf=d.require("kappa_inf"),
            kappa_s=d.require("kappa_s"),
            tau=d.require("tau_s"),
            alpha=d.require("alpha"),
            density=d.get("density_kg_m3", 1900.0),
            thickness=geometry.dielectric_thickness,
            conductivity=d.get("conductivity_s_per_m", 0.0),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("dielectric", str(exc)) from exc

    c = root.section("contact")
    try:
        contact = ContactModel(
            stiffness_k=c.require("stiffness_k_n_m35"), sigma_d=c.require("sigma_d_m")
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("contact", str(exc)) from exc

    dr = root.section("drive")
    try:
        drive = DriveSignal(
            waveform=dr.require("waveform", str),
            amplitude=dr.require("amplitude_v"),
            frequency=dr.get("frequency_hz", 0.0),
            tau_rise=dr.require("tau_rise_s"),
            tau_fall=dr.require("tau_fall_s"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("drive", str(exc)) from exc

    lc = root.section("load_cell")
    try:
        load_cell = LoadCellModel(
            stiffness=lc.require("stiffness_n_per_m"),
            damping=lc.require("damping_kg_per_s"),
            mass=lc.require("mass_kg"),
            resonance_check_hz=lc.get("resonance_check_hz", None),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("load_cell", str(exc)) from exc

    masses = root.optional_section("masses")
    m_d = masses.get("dielectric_kg", None)
    if m_d is None:
        m_d = default_dielectric_mass(geometry, dielectric.density)
    m_s = masses.get("substrate_kg", None)
    if m_s is None:
        m_s = default_substrate_mass(geometry, masses.get("substrate_density_kg_m3", DENSITY_BRASS))

    fr = root.section("friction")
    lam_sec = root.optional_section("lambda_law")
    kind = lam_sec.get("kind", "linear", str)
    try:
        lambda_law = LambdaLaw(
            kind=kind,
            value=lam_sec.get("value", 1.0),
            intercept=lam_sec.get("intercept", 2.40),
            slope=lam_sec.get("slope_per_v", -0.0058),
        )
    except ValueError as exc:
        raise ConfigError("lambda_law.kind", str(exc)) from exc

    sim_sec = root.optional_section("simulation")
    defaults = SimSettings()
    try:
        sim = SimSettings(
            floor_gap=sim_sec.get("floor_gap_m", defaults.floor_gap),
            engage_traversal=sim_sec.get("engage_traversal", defaults.engage_traversal),
            release_threshold=sim_sec.get("release_threshold", defaults.release_threshold),
            force_ratio=sim_sec.get("force_ratio", defaults.force_ratio),
            rel_tol=sim_sec.get("rel_tol", defaults.rel_tol),
            abs_tol=sim_sec.get("abs_tol", defaults.abs_tol),
            t_max=sim_sec.get("t_max_s", defaults.t_max),
            stick_velocity=sim_sec.get("stick_velocity_m_per_s", defaults.stick_velocity),
        )
    except ValueError as exc:
        raise ConfigError("simulation", str(exc)) from exc

    try:
        return ClutchConfig(
            geometry=geometry,
            dielectric=dielectric,
            contact=contact,
            drive=drive,
            load_cell=load_cell,
            m_d=m_d,
            m_s=m_s,
            f_preload=root.require("preload_n"),
            mu_d_static=fr.require("mu_d_static"),
            mu_d_kinetic=fr.require("mu_d_kinetic"),
            mu_base_static=fr.require("mu_base_static"),
            mu_base_kinetic=fr.require("mu_base_kinetic"),
            lambda_law=lambda_law,
            sim=sim,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("<root>", str(exc)) from exc


def config_to_dict(cfg: ClutchConfig) -> dict:
    return {
        "geometry": {
            "n_electrodes": cfg.geometry.n_electrodes,
            "electrode_length_m": cfg.geometry.electrode_length,
            "electrode_gap_m": cfg.geometry.electrode_gap,
            "dielectric_thickness_m": cfg.geometry.dielectric_thickness,
            "substrate_overlap_length_m": cfg.geometry.substrate_overlap_length,
            "substrate_width_m": cfg.geometry.substrate_width,
            "substrate_thickness_m": cfg.geometry.substrate_thickness,
        },
        "dielectric": {
            "kappa_inf": cfg.dielectric.kappa_inf,
            "kappa_s": cfg.dielectric.kappa_s,
            "tau_s": cfg.dielectric.tau,
            "alpha": cfg.dielectric.alpha,
            "density_kg_m3": cfg.dielectric.density,
            "conductivity_s_per_m": cfg.dielectric.conductivity,
        },
        "contact": {
            "stiffness_k_n_m35": cfg.contact.stiffness_k,
            "sigma_d_m": cfg.contact.sigma_d,
        },
        "drive": {
            "waveform": cfg.drive.waveform,
            "amplitude_v": cfg.drive.amplitude,
            "frequency_hz": cfg.drive.frequency,
            "tau_rise_s": cfg.drive.tau_rise,
            "tau_fall_s": cfg.drive.tau_fall,
        },
        "load_cell": {
            "stiffness_n_per_m": cfg.load_cell.stiffness,
            "damping_kg_per_s": cfg.load_cell.damping,
            "mass_kg": cfg.load_cell.mass,
            "resonance_check_hz": cfg.load_cell.resonance_check_hz,
        },
        "masses": {"dielectric_kg": cfg.m_d, "substrate_kg": cfg.m_s},
        "friction": {
            "mu_d_static": cfg.mu_d_static,
            "mu_d_kinetic": cfg.mu_d_kinetic,
            "mu_base_static": cfg.mu_base_static,
            "mu_base_kinetic": cfg.mu_base_kinetic,
        },
        "preload_n": cfg.f_preload,
        "lambda_law": {
            "kind": cfg.lambda_law.kind,
            "value": cfg.lambda_law.value,
            "intercept": cfg.lambda_law.intercept,
            "slope_per_v": cfg.lambda_law.slope,
        },
        "simulation": {
            "floor_gap_m": cfg.sim.floor_gap,
            "engage_traversal": cfg.sim.engage_traversal,
            "release_threshold": cfg.sim.release_threshold,
            "force_ratio": cfg.sim.force_ratio,
            "rel_tol": cfg.sim.rel_tol,
            "abs_tol": cfg.sim.abs_tol,
            "t_max_s": cfg.sim.t_max,
            "stick_velocity_m_per_s": cfg.sim.stick_velocity,
        },
    }


def apply_overrides(doc: dict, overrides: dict[str, Any]) -> dict:
    """Return a copy of the config document with dot-path overrides applied."""
    out = copy.deepcopy(doc)
    for path, value in overrides.items():
        keys = path.split(".")
        node = out
        for k in keys[:-1]:
            if not isinstance(node, dict) or k not in node:
                raise ConfigError(path, "unknown override path")
            node = node[k]
        if not isinstance(node, dict) or keys[-1] not in node:
            raise ConfigError(path, "unknown override path")
        node[keys[-1]] = value
    return out


def parse_override_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config_dict(path: str | Path) -> dict:
    p = Path(path)
    try:
        with open(p) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("<file>", f"config file not found: {p}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON in {p}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "top-level JSON value must be an object")
    return doc


def load_config(path: str | Path, overrides: dict[str, Any] | None = None) -> ClutchConfig:
    doc = load_config_dict(path)
    if overrides:
        doc = apply_overrides(doc, overrides)
    return config_from_dict(doc)


def nominal_config_dict() -> dict:
    with resources.files("eaclutch.data").joinpath("nominal.json").open() as fh:
        return json.load(fh)


def nominal_config(overrides: dict[str, Any] | None = None) -> ClutchConfig:
    doc = nominal_config_dict()
    if overrides:
        doc = apply_overrides(doc, overrides)
    return config_from_dict(doc)


def config_hash(doc: dict) -> str:
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()
