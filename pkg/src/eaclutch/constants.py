"""Physical constants and default numerical tolerances, in SI units."""

# Vacuum permittivity [F/m]
EPSILON_0 = 8.854e-12

# Dynamic viscosity of air [N s / m^2]
MU_AIR = 1.85e-5

# Standard gravity [m/s^2]
G_STANDARD = 9.81

# Film density of P(VDF-TrFE-CFE) [kg/m^3], used for the default dielectric mass
DENSITY_PVDF_TERPOLYMER = 1900.0

# Brass density [kg/m^3], used for the default substrate mass
DENSITY_BRASS = 8500.0

# Default relative / absolute tolerances for physics computations
DEFAULT_REL_TOL = 1e-8
DEFAULT_ABS_TOL = 1e-12

# Floor gap regularizing the squeeze-film kernel inside Gaussian averaging [m].
# Continuum squeeze-film theory breaks down at small gaps; the default is set
# by the scale of open flow channels between asperities at contact (~0.8 sigma_d
# for the calibrated surface), which reproduces the measured engagement/release
# timing magnitudes. Overridable per-config.
DEFAULT_FLOOR_GAP = 2.2e-6

# Gaussian roughness averages are truncated at +/- this many sigma_d
GAUSS_TRUNCATION_SIGMAS = 8.0

# Fraction of the initial-to-final gap traversal that ends an engagement run
DEFAULT_ENGAGE_TRAVERSAL = 0.005

# Fraction of the initial-to-final load-cell force drop that defines release
DEFAULT_RELEASE_THRESHOLD = 0.9

# Load-cell ratio F_shear(t_r)/F_shear,max used for the release initial state
DEFAULT_FORCE_RATIO = 0.8
