import numpy as np
import pytest
from scipy import integrate, stats

from gclab.bvn import bvn_cdf, bvn_indicator_cov, orthant_probability


def quad_oracle(x, y, rho):
    """Independent adaptive-quadrature evaluation of the same integral."""
    base = stats.norm.cdf(x) * stats.norm.cdf(y)
    if rho == 0.0:
        return base

    def integrand(r):
        return np.exp(-(x * x - 2 * r * x * y + y * y) / (2 * (1 - r * r))) / (
            2 * np.pi * np.sqrt(1 - r * r)
        )

    val, _ = integrate.quad(integrand, 0.0, rho, epsabs=1e-12)
    return base + val


@pytest.mark.parametrize("rho", [0.05, 0.25, 0.5, 0.75, 0.95])
def test_orthant_closed_form(rho):
    assert bvn_cdf(0.0, 0.0, rho) == pytest.approx(orthant_probability(rho), abs=1e-12)


def test_against_adaptive_quadrature():
    for x in (-2.0, -0.5, 0.3, 1.5):
        for y in (-1.0, 0.0, 2.0):
            for rho in (0.1, 0.6, 0.9):
                assert bvn_cdf(x, y, rho) == pytest.approx(
                    quad_oracle(x, y, rho), abs=1e-10
                )


def test_against_scipy_mvn():
    mvn = stats.multivariate_normal(mean=[0, 0], cov=[[1, 0.6], [0.6, 1]])
    assert bvn_cdf(0.3, -0.7, 0.6) == pytest.approx(mvn.cdf([0.3, -0.7]), abs=1e-7)


def test_independence_is_exact_zero():
    assert bvn_indicator_cov(0.4, -1.2, 0.0) == 0.0


def test_comonotone_boundary():
    for x, y in ((-0.3, 0.5), (1.0, 1.0)):
        expect = min(stats.norm.cdf(x), stats.norm.cdf(y))
        assert bvn_cdf(x, y, 1.0) == pytest.approx(expect, abs=1e-15)


def test_vectorized_over_rho_matches_scalars():
    rhos = np.array([0.0, 0.2, 0.7, 1.0])
    vec = bvn_indicator_cov(0.3, 0.3, rhos)
    scal = [bvn_indicator_cov(0.3, 0.3, float(r)) for r in rhos]
    assert np.allclose(vec, scal, atol=1e-14)


def test_positive_correlation_gives_nonnegative_indicator_cov():
    for rho in (0.1, 0.5, 0.9):
        for x in (-1.5, 0.0, 2.0):
            assert bvn_indicator_cov(x, x, rho) >= 0.0
