"""Frozen reference values, derived independently of the package.

Each value below was obtained with sympy from the closed forms listed here
and is re-derived in ``test_oracles.py`` so a drift in either direction is
caught.  Nothing in this file calls into ``mises``.
"""

from fractions import Fraction

import numpy as np
from scipy.special import erf

# closed-form solutions -------------------------------------------------


def heat_exact(t, x):
    """u_t = u_xx."""
    return np.exp(t - x)


def burgers_exact(t, x):
    """u_t + u u_x = u_xx, travelling front."""
    return 1.0 - np.tanh((x - t) / 2.0)


def s1_exact(t, x):
    """u_t = x u_x + u_xx (s(t) = 1), monotone in x."""
    width = 2.0 * np.sqrt((np.exp(2.0 * t) - 1.0) / 2.0 + 1.0)
    return erf(x * np.exp(t) / width)


def sqrt_eta(t, u):
    """Solves (eta eta_u)_t = 1."""
    return np.sqrt(2.0 * t * u + 1.0)


# manufactured boundary-layer field: u = a y + b + c y^2 ------------------

PRANDTL_U = "(1 + t*x/5)*y + ((x/10 + (1 + t*x/5)^2/4)/(1/2 + t/10) + t^2) + (1/2 + t/10)*y^2"
PRANDTL_POINT = (Fraction(1, 2), Fraction(1, 4))
PRANDTL_FORCING = {0: Fraction(23, 22), 1: Fraction(-3, 55)}

# spot values ----------------------------------------------------------

CUBIC_PROFILE_SPOT = {"x": 1.0, "u": 2.0, "eta": 4.0}   # u = x^3 + x

# numeric thresholds ----------------------------------------------------

HEAT_MAX_ERROR = 1e-5
BURGERS_MAX_ERROR = 1e-4
BURGERS_RESIDUAL = 5e-3
MIN_ORDER = 1.5
CLOSURE = 1e-3
EXACT_RESIDUAL = 1e-10
