"""Log-gamma, digamma, and log-beta on the positive reals.

Thin validating wrappers around scipy.special: the rest of the package
needs these three functions with strict domain checking (arguments are
posterior concentrations, always > 0) and accuracy tight enough that
lower-bound identities hold to ~1e-9.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

__all__ = ["ln_gamma", "digamma", "ln_beta"]


def _check_positive(x, name: str):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError(f"{name} must be finite and > 0, got {x!r}")
    return arr


def ln_gamma(x):
    """Natural log of the gamma function for x > 0 (scalar or array)."""
    arr = _check_positive(x, "x")
    out = _sp.gammaln(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def digamma(x):
    """Digamma (derivative of ln-gamma) for x > 0 (scalar or array)."""
    arr = _check_positive(x, "x")
    out = _sp.digamma(arr)
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def ln_beta(a, b):
    """ln B(a, b) = ln Γ(a) + ln Γ(b) - ln Γ(a + b) for a, b > 0."""
    arr_a = _check_positive(a, "a")
    arr_b = _check_positive(b, "b")
    out = _sp.betaln(arr_a, arr_b)
    scalar = (np.isscalar(a) or arr_a.ndim == 0) and (np.isscalar(b) or arr_b.ndim == 0)
    return float(out) if scalar else out
