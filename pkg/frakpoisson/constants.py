"""
Numeric defaults shared by the modules and surfaced by the command line.
"""
# Series evaluation
REL_TOL = 1e-13
MAX_TERMS = 10_000
# Largest |z| accepted off the closed left half-plane
Z_MAX = 50.0
# Largest derivative order
N_MAX = 200

# Discrete base spaces
M_MAX = 12
CONFIG_N_MAX = 8

# Truncation of count weights for inverse-CDF sampling
COUNT_TAIL = 1e-12

# Stable law quadrature
QUAD_POINTS = 4096
QUAD_TOL = 1e-10

# Midpoint refinement of intensity masses
MASS_RTOL = 1e-9

# Monte Carlo checks
SIGNIFICANCE = 1e-3
SIGMA_BUDGET = 4.0
MIN_EXPECTED = 5.0

# Parallel sampling
BLOCK_SIZE = 65536
THREADS_ENV = 'FRAKPOISSON_THREADS'
