"""Quasistatic electroadhesive force laws for interdigitated-electrode (ICE)
and parallel-plate clutches, capacitive air-gap estimation, and the
Maxwell-Wagner interfacial time constant.

All formulas take the relative permittivity as a plain scalar so the
polarization module can feed a time-varying effective value.
"""

from __future__ import annotations

from dataclasses import dataclass

from .constants import EPSILON_0


@dataclass(frozen=True)
class ClutchGeometry:
    """Electrode pattern, dielectric, and substrate dimensions (SI)."""

    n_electrodes: int
    electrode_length: float  # L_e [m]
    electrode_gap: float  # L_g [m]
    dielectric_thickness: float  # T_d [m]
    substrate_overlap_length: float  # L_s [m]
    substrate_width: float  # w_s [m]
    substrate_thickness: float  # T_s [m]

    def __post_init__(self):
        if self.n_electrodes < 2 or self.n_electrodes % 2:
            raise ValueError("n_electrodes must be even and >= 2")
        for name in (
            "electrode_length",
            "electrode_gap",
            "dielectric_thickness",
            "substrate_overlap_length",
            "substrate_width",
            "substrate_thickness",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")

    @property
    def overlap_area(self) -> float:
        """Overlap area per electrode, A = L_e * w_s."""
        return self.electrode_length * self.substrate_width


@dataclass(frozen=True)
class MaterialElectrical:
    """Low-frequency permittivity and bulk conductivity of one layer."""

    kappa_s: float
    conductivity: float  # [S/m]

    def __post_init__(self):
        if self.kappa_s < 1.0:
            raise ValueError("kappa_s must be >= 1")
        if self.conductivity < 0.0:
            raise ValueError("conductivity must be >= 0")


@dataclass(frozen=True)
class FieldSolution:
    """Charge density and fields consistent with the applied potential."""

    sigma: float  # surface charge density [C/m^2]
    e_dielectric: float  # field in the dielectric [V/m]
    e_air: float  # field in the air gap [V/m]
    substrate_potential: float  # [V]


def capacitance_ice(geom: ClutchGeometry, kappa: float, t_air: float) -> float:
    """Capacitance between N adjacent interdigitated electrodes through a
    floating metal substrate: C = N*kappa*eps0*A / (4*(T_d + kappa*t_air))."""
    if t_air < 0:
        raise ValueError(f"t_air must be >= 0, got {t_air}")
    td = geom.dielectric_thickness
    return geom.n_electrodes * kappa * EPSILON_0 * geom.overlap_area / (4.0 * (td + kappa * t_air))


def air_gap_from_capacitance(geom: ClutchGeometry, kappa: float, c: float) -> float:
    """Invert capacitance_ice for the mean air gap. A negative result means
    the asperity-compression regime and is returned as-is."""
    if c <= 0:
        raise ValueError(f"capacitance must be > 0, got {c}")
    return geom.n_electrodes * EPSILON_0 * geom.overlap_area / (4.0 * c) - (
        geom.dielectric_thickness / kappa
    )


def _field_solution(kappa: float, v: float, t_air: float, denom: float) -> FieldSolution:
    sigma = 0.5 * v * EPSILON_0 * kappa / denom
    return FieldSolution(
        sigma=sigma,
        e_dielectric=sigma / (kappa * EPSILON_0),
        e_air=sigma / EPSILON_0,
        substrate_potential=0.5 * v,
    )


def ea_normal_force(
    geom: ClutchGeometry, kappa: float, v: float, t_air: float
) -> tuple[float, FieldSolution]:
    """Normal electroadhesive force on the substrate for an ICE clutch at
    potential difference v, plus the consistent field solution:

        F = (kappa^2 * eps0 / 2) * N * A * (v/2)^2 / (T_d + kappa*t_air)^2

    t_air may be negative (compression) while T_d + kappa*t_air stays > 0.
    """
    td = geom.dielectric_thickness
    denom = td + kappa * t_air
    if denom <= 0:
        raise ValueError(f"T_d + kappa*t_air must be > 0, got {denom}")
    force = (
        0.5
        * kappa**2
        * EPSILON_0
        * geom.n_electrodes
        * geom.overlap_area
        * (0.5 * v) ** 2
        / denom**2
    )
    return force, _field_solution(kappa, v, t_air, denom)


def ea_force_no_airgap(geom: ClutchGeometry, kappa: float, v: float) -> float:
    """Conventional parallel-plate force that ignores the air gap:
    F = (kappa*eps0/2) * N * A * (v/2)^2 / T_d^2."""
    td = geom.dielectric_thickness
    return 0.5 * kappa * EPSILON_0 * geom.n_electrodes * geom.overlap_area * (0.5 * v) ** 2 / td**2


# --- parallel-plate variants (two driven electrodes, no floating substrate) --


def parallel_plate_capacitance(area: float, kappa: float, t_d: float, t_air: float) -> float:
    if t_air < 0:
        raise ValueError(f"t_air must be >= 0, got {t_air}")
    return kappa * EPSILON_0 * area / (t_d + kappa * t_air)


def parallel_plate_air_gap(area: float, kappa: float, t_d: float, c: float) -> float:
    if c <= 0:
        raise ValueError(f"capacitance must be > 0, got {c}")
    return EPSILON_0 * area / c - t_d / kappa


def parallel_plate_force(area: float, kappa: float, t_d: float, t_air: float, v: float) -> float:
    denom = t_d + kappa * t_air
    if denom <= 0:
        raise ValueError(f"t_d + kappa*t_air must be > 0, got {denom}")
    return 0.5 * kappa**2 * EPSILON_0 * area * v**2 / denom**2


def maxwell_wagner_tau(
    sigma_air: float, sigma_diel: float, kappa: float, t_d: float, t_air: float
) -> float:
    """Time constant of Maxwell-Wagner interfacial polarization for a
    dielectric/air stack against a conductor:

        tau = eps0 * (kappa*t_air + t_d) / (sigma_diel*t_air + sigma_air*t_d)

    This is the disconnected-supply discharge constant, computed here only
    for comparison against the supply-connected Cole-Cole dynamics.
    """
    denom = sigma_diel * t_air + sigma_air * t_d
    if denom <= 0:
        raise ValueError("sigma_diel*t_air + sigma_air*t_d must be > 0")
    return EPSILON_0 * (kappa * t_air + t_d) / denom
