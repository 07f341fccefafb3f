"""Physical constants (SI, CODATA 2018)."""

HBAR = 1.054571817e-34          # J s (derived from exact h)
AMU = 1.66053906660e-27         # kg
EV = 1.602176634e-19            # J (exact)
EPSILON_0 = 8.8541878128e-12    # F/m

# atomic units, used when quoting dispersion coefficients from the literature
HARTREE = 4.3597447222071e-18   # J
BOHR = 5.29177210903e-11        # m
C3_AU = HARTREE * BOHR**3       # J m^3, atomic unit of the C3 coefficient

NEV = 1e-9 * EV
UEV = 1e-6 * EV
