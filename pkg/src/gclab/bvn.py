"""Standard bivariate normal rectangle probabilities.

P(Z1 <= x, Z2 <= y) for a standard bivariate normal pair with correlation
rho is computed from the one-dimensional integral representation

    P = Phi(x) Phi(y) + (1/2pi) int_0^rho exp(-(x^2 - 2 r x y + y^2)
                                              / (2 (1 - r^2))) / sqrt(1 - r^2) dr,

evaluated by deterministic Gauss-Legendre quadrature. For |rho| <= 0.999 the
128-node rule is accurate far below the 1e-8 budget; rho = 1 and rho = -1 are
handled by the comonotone / antithetic closed forms.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(128)


def bvn_cdf(x: float, y: float, rho) -> float | np.ndarray:
    """P(Z1 <= x, Z2 <= y) at correlation rho (scalar or array of rho)."""
    rho_arr = np.asarray(rho, dtype=float)
    if np.any(np.abs(rho_arr) > 1.0):
        raise ValueError("correlation must lie in [-1, 1]")
    base = norm.cdf(x) * norm.cdf(y)

    finite = np.abs(rho_arr) < 1.0
    # r grid: one row of quadrature nodes per requested correlation
    r = 0.5 * np.where(finite, rho_arr, 0.0)[..., None] * (_GL_NODES + 1.0)
    omr2 = 1.0 - r * r
    integrand = np.exp(-(x * x - 2.0 * r * x * y + y * y) / (2.0 * omr2)) / (
        2.0 * np.pi * np.sqrt(omr2)
    )
    correction = 0.5 * np.where(finite, rho_arr, 0.0) * (integrand @ _GL_WEIGHTS)
    out = base + correction

    if np.any(~finite):
        hi = np.minimum(norm.cdf(x), norm.cdf(y))          # rho = +1
        lo = np.maximum(norm.cdf(x) + norm.cdf(y) - 1.0, 0.0)  # rho = -1
        out = np.where(rho_arr == 1.0, hi, out)
        out = np.where(rho_arr == -1.0, lo, out)
    if np.ndim(rho) == 0:
        return float(out)
    return out


def bvn_indicator_cov(x: float, y: float, rho) -> float | np.ndarray:
    """Cov(1{Z1 <= x}, 1{Z2 <= y}) = P(Z1 <= x, Z2 <= y) - Phi(x) Phi(y)."""
    rho_arr = np.asarray(rho, dtype=float)
    base = norm.cdf(x) * norm.cdf(y)
    out = np.asarray(bvn_cdf(x, y, rho_arr)) - base
    # exact zero at rho = 0 rather than quadrature roundoff
    out = np.where(rho_arr == 0.0, 0.0, out)
    if np.ndim(rho) == 0:
        return float(out)
    return out


def orthant_probability(rho: float) -> float:
    """Closed form P(Z1 <= 0, Z2 <= 0) = 1/4 + arcsin(rho) / (2 pi)."""
    return 0.25 + float(np.arcsin(rho)) / (2.0 * np.pi)
