r"""Special functions used by the closed-form chain engines.

Only what the analytic formulas need is provided:

* :func:`bessel_j` / :func:`bessel_j_orders` -- :math:`J_n(z)` for integer
  order and complex argument,
* :func:`bessel_i0` -- the modified Bessel function :math:`I_0(x)` for real
  :math:`x \ge 0`,
* :func:`airy_constant_c1` -- the constant :math:`2^{1/3}\mathrm{Ai}(-2^{1/3}c_0)`
  that sets the far-cavity peak heights.

Small arguments (:math:`|z| \le 8`) use the ascending power series; larger
arguments use Miller's downward recurrence normalised with the generating
function identity

.. math::
    e^{\pm iz} = J_0(z) + 2\sum_{k \ge 1} (\pm i)^k J_k(z),

with the sign picked so that the normalising sum does not cancel.
"""

import math

import numpy as np

from .errors import DomainError

MAX_ORDER = 512
MAX_ABS_ARG = 1.0e4
MAX_I0_ARG = 1.0e3

#: Arguments up to this modulus are summed with the power series.  Beyond it
#: the series loses roughly ``log10(I_0(|z|))`` digits to cancellation.
SERIES_RADIUS = 8.0

#: Leading coefficient of the first-maximum location of ``|J_p|`` for large p.
C0 = 0.8

# 2**(1/3) * Ai(-2**(1/3) * C0), evaluated once to 15 digits with mpmath.
_C1 = 0.674844723867074

_RESCALE_AT = 1.0e250
_RESCALE_BY = 1.0e-250


def _check_order(n):
    if isinstance(n, (bool, np.bool_)) or int(n) != n:
        raise DomainError(f"Bessel order must be an integer, got {n!r}")
    n = int(n)
    if abs(n) > MAX_ORDER:
        raise DomainError(f"|order| = {abs(n)} exceeds supported maximum {MAX_ORDER}")
    return n


def _check_argument(z):
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError("Bessel argument must be finite")
    if z.size and np.max(np.abs(z)) > MAX_ABS_ARG:
        raise DomainError(
            f"|z| = {np.max(np.abs(z)):.6g} exceeds supported maximum {MAX_ABS_ARG:g}"
        )
    return z


def _series(n, z):
    """Ascending series for ``J_n`` on a flat complex array (``n >= 0``)."""
    out = np.zeros(z.shape, dtype=complex)
    nonzero = z != 0
    if n == 0:
        out[~nonzero] = 1.0
    zz = z[nonzero]
    if zz.size == 0:
        return out
    lead = np.exp(n * np.log(zz / 2) - math.lgamma(n + 1))
    q = -(zz * zz) / 4
    term = np.ones_like(zz)
    total = np.ones_like(zz)
    for k in range(1, 200):
        term = term * q / (k * (n + k))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    out[nonzero] = lead * total
    return out


def _miller(nmax, z):
    """All orders ``0..nmax`` for a flat array of ``|z| > 0`` by downward recurrence."""
    zmax = float(np.max(np.abs(z)))
    start = int(max(nmax, zmax) + 20 + 15 * zmax ** (1.0 / 3.0))
    start += start % 2
    # quadrant phase (i*s)**k with s = +1 when Im z <= 0 and s = -1 otherwise
    s = np.where(z.imag <= 0, 1.0, -1.0)
    quadrant = [np.ones_like(s), 1j * s, -np.ones_like(s), -1j * s]

    out = np.zeros((nmax + 1, z.size), dtype=complex)
    j_next = np.zeros(z.size, dtype=complex)
    j_k = np.ones(z.size, dtype=complex)
    norm = np.zeros(z.size, dtype=complex)
    two_over_z = 2.0 / z
    for k in range(start, 0, -1):
        if k <= nmax:
            out[k] = j_k
        norm += 2.0 * quadrant[k % 4] * j_k
        j_prev = k * two_over_z * j_k - j_next
        j_next, j_k = j_k, j_prev
        big = np.abs(j_k) > _RESCALE_AT
        if np.any(big):
            j_k[big] *= _RESCALE_BY
            j_next[big] *= _RESCALE_BY
            norm[big] *= _RESCALE_BY
            out[:, big] *= _RESCALE_BY
    out[0] = j_k
    norm += j_k
    return out * (np.exp(1j * s * z) / norm)


def bessel_j_orders(nmax, z):
    """Bessel functions of the first kind for every order ``0..nmax``.

    Parameters
    ----------
    nmax : int
        Highest order, ``0 <= nmax <= 512``.
    z : complex or array_like of complex
        Arguments, ``|z| <= 1e4``.

    Returns
    -------
    numpy.ndarray
        Complex array of shape ``(nmax + 1,) + np.shape(z)``; row ``n`` holds
        ``J_n(z)``.  Real arguments give exactly zero imaginary parts.
    """
    nmax = _check_order(nmax)
    if nmax < 0:
        raise DomainError("nmax must be non-negative")
    z = _check_argument(z)
    shape = z.shape
    flat = z.ravel()
    out = np.zeros((nmax + 1, flat.size), dtype=complex)
    small = np.abs(flat) <= SERIES_RADIUS
    if np.any(small):
        zs = flat[small]
        for n in range(nmax + 1):
            out[n, small] = _series(n, zs)
    if np.any(~small):
        out[:, ~small] = _miller(nmax, flat[~small])
    real = flat.imag == 0
    # J_n is real on the real axis; drop the normalisation round-off
    out[:, real] = out[:, real].real
    return out.reshape((nmax + 1,) + shape)


def bessel_j(n, z):
    """Bessel function of the first kind ``J_n(z)``, integer order, complex argument.

    Negative orders are returned through ``J_{-n}(z) = (-1)**n J_n(z)``.

    Raises
    ------
    DomainError
        If ``|n| > 512``, ``|z| > 1e4`` or ``z`` is not finite.
    """
    n = _check_order(n)
    scalar = np.ndim(z) == 0
    m = abs(n)
    zarr = _check_argument(z)
    flat = zarr.ravel()
    small = np.abs(flat) <= SERIES_RADIUS
    val = np.zeros(flat.size, dtype=complex)
    if np.any(small):
        val[small] = _series(m, flat[small])
    if np.any(~small):
        val[~small] = _miller(m, flat[~small])[m]
    val[flat.imag == 0] = val[flat.imag == 0].real
    if n < 0 and m % 2:
        val = -val
    val = val.reshape(zarr.shape)
    return complex(val) if scalar else val


def _i0_scaled_scalar(x):
    """``exp(-x) * I_0(x)`` summed outward from the largest series term."""
    if x == 0.0:
        return 1.0
    h = (x / 2.0) ** 2
    peak = max(0, int(round(x / 2.0)))
    log_peak = 2 * peak * math.log(x / 2.0) - 2 * math.lgamma(peak + 1) - x
    terms = [1.0]
    t = 1.0
    for k in range(peak + 1, peak + 100000):
        t *= h / (k * k)
        terms.append(t)
        if t < 1e-18:
            break
    t = 1.0
    for k in range(peak, 0, -1):
        t *= (k * k) / h
        terms.append(t)
        if t < 1e-18:
            break
    return math.exp(log_peak) * math.fsum(terms)


def bessel_i0(x, scaled=False):
    """Modified Bessel function of the first kind of order zero.

    Parameters
    ----------
    x : float or array_like
        Real arguments with ``0 <= x <= 1000``.
    scaled : bool
        Return ``exp(-x) * I_0(x)`` instead, which stays finite over the
        whole supported range.

    Raises
    ------
    DomainError
        For arguments outside ``[0, 1000]``, or when the unscaled value
        would overflow double precision (``x`` above about 713.9).
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > MAX_I0_ARG):
        raise DomainError(f"bessel_i0 requires 0 <= x <= {MAX_I0_ARG:g}")
    vals = np.array([_i0_scaled_scalar(float(v)) for v in arr.ravel()])
    if not scaled:
        with np.errstate(over="ignore"):
            vals = np.exp(arr.ravel() + np.log(vals))
        if not np.all(np.isfinite(vals)):
            raise DomainError("I0(x) overflows double precision; use scaled=True")
    vals = vals.reshape(arr.shape)
    return float(vals) if arr.ndim == 0 else vals


def airy_constant_c1():
    """Peak-height constant ``c1 = 2**(1/3) * Ai(-2**(1/3) * C0)`` (about 0.675)."""
    return _C1
