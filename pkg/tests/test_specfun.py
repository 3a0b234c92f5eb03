import math

import mpmath
import numpy as np
import pytest

from crowsqueeze.errors import DomainError
from crowsqueeze.specfun import (
    C0,
    MAX_ABS_ARG,
    airy_constant_c1,
    bessel_i0,
    bessel_j,
    bessel_j_orders,
)

mpmath.mp.dps = 40


def _mp_j(n, z):
    return complex(mpmath.besselj(n, mpmath.mpc(z.real, z.imag)))


# arguments cover the series region, the recurrence region and the
# lossy CROW regime (tiny negative imaginary part, large real part)
ARGS = [0.0, 1e-6, 0.5, 3.0 - 0.2j, 7.9, 8.1, 12.0 + 1.5j, -20.0 + 0.3j,
        55.0 - 0.01j, 120.0 - 0.002j, 400.0 - 1e-4j, 2j, -6.0 - 4j]


@pytest.mark.parametrize("z", ARGS)
def test_orders_match_mpmath(z):
    z = complex(z)
    nmax = 40
    got = bessel_j_orders(nmax, z)
    for n in range(nmax + 1):
        want = _mp_j(n, z)
        scale = max(abs(want), 1e-300)
        # orders far beyond |z| decay super-exponentially; compare absolutely there
        tol = 1e-12 * scale if abs(want) > 1e-200 else 1e-300
        assert abs(got[n] - want) <= max(tol, 1e-13 * max(1.0, abs(got[0]))), (n, z)


def test_negative_orders_use_parity():
    z = np.array([1.3, 9.0 - 0.5j, 33.0])
    for n in range(1, 12):
        np.testing.assert_allclose(bessel_j(-n, z), (-1) ** n * bessel_j(n, z), rtol=0, atol=0)


def test_conjugate_symmetry():
    z = np.array([2.0 - 0.3j, 15.0 - 1e-3j, 90.0 - 2e-4j])
    for n in (0, 3, 10, 27):
        np.testing.assert_allclose(bessel_j(n, np.conj(z)), np.conj(bessel_j(n, z)), rtol=1e-14)


def test_real_argument_gives_real_values():
    x = np.linspace(0, 300, 301)
    vals = bessel_j_orders(30, x)
    assert np.all(vals.imag == 0)


def test_recurrence_residual():
    # J_{n-1} + J_{n+1} = (2n / z) J_n
    z = np.array([0.7, 5.0 - 0.1j, 18.0 + 2j, 77.0 - 0.01j, 250.0])
    j = bessel_j_orders(60, z)
    n = np.arange(1, 60)[:, None]
    lhs = j[:-2] + j[2:]
    rhs = 2 * n / z * j[1:-1]
    scale = np.max(np.abs(j), axis=0)
    assert np.max(np.abs(lhs - rhs) / scale) <= 1e-8


def test_neumann_sum():
    # J_0^2 + 2 sum J_k^2 = 1 for real argument
    x = np.array([0.1, 4.0, 11.0, 60.0, 200.0])
    j = bessel_j_orders(400, x)
    total = j[0] ** 2 + 2 * np.sum(j[1:] ** 2, axis=0)
    np.testing.assert_allclose(total, 1.0, rtol=0, atol=1e-13)


def test_scalar_and_array_shapes():
    assert bessel_j_orders(3, 1.0).shape == (4,)
    assert bessel_j_orders(3, np.zeros((2, 5))).shape == (4, 2, 5)
    assert np.ndim(bessel_j(2, 1.0)) == 0


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_j_orders(-1, 1.0)
    with pytest.raises(DomainError):
        bessel_j_orders(3, 2 * MAX_ABS_ARG)
    with pytest.raises(DomainError):
        bessel_j_orders(3, np.nan)


@pytest.mark.parametrize("x", [0.0, 1e-8, 0.3, 5.0, 40.0, 300.0, 700.0])
def test_i0_matches_mpmath(x):
    want = float(mpmath.besseli(0, x))
    # the log of the peak term is O(x), so rounding grows mildly with x
    assert bessel_i0(x) == pytest.approx(want, rel=1e-12)
    scaled = float(mpmath.besseli(0, x) * mpmath.exp(-x))
    assert bessel_i0(x, scaled=True) == pytest.approx(scaled, rel=1e-12)


def test_i0_domain():
    with pytest.raises(DomainError):
        bessel_i0(-3.0)
    with pytest.raises(DomainError):
        bessel_i0(1e4)
    assert np.isfinite(bessel_i0(750.0, scaled=True))
    with pytest.raises(DomainError):
        bessel_i0(750.0)


def test_airy_constant():
    k = mpmath.cbrt(2)
    want = float(k * mpmath.airyai(-k * C0))
    assert airy_constant_c1() == pytest.approx(want, rel=1e-14)
    assert C0 == 0.8
