"""Physical constants used across the package (SI units)."""

# Exact SI value, fixed for reproducibility.
SPEED_OF_LIGHT_M_S = 299_792_458.0

BOLTZMANN_J_PER_K = 1.380649e-23

# Reference temperature for thermal-noise floors.
NOISE_REFERENCE_TEMPERATURE_K = 290.0
