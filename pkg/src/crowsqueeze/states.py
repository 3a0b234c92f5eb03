"""Second moments of the initially excited cavity.

Every observable of the chain depends on the initial state only through the
three moments ``<a^dag a>``, ``<a a>`` and ``<a^dag a^dag>`` of the single
excited cavity ``c``; all other cavities start in vacuum.
"""

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class InitialStateMoments:
    """Moments of cavity ``excited_index`` at ``t = 0``.

    Attributes
    ----------
    n_avg : float
        Mean photon number ``<a^dag a>``.
    anom : complex
        Anomalous moment ``<a a>``.
    anom_conj : complex
        ``<a^dag a^dag>``, always the complex conjugate of ``anom``.
    excited_index : int
        Label of the excited cavity.
    """

    n_avg: float
    anom: complex
    anom_conj: complex
    excited_index: int = 0

    def __post_init__(self):
        n = float(self.n_avg)
        a = complex(self.anom)
        if not (math.isfinite(n) and math.isfinite(a.real) and math.isfinite(a.imag)):
            raise DomainError("state moments must be finite")
        if n < 0:
            raise DomainError(f"n_avg must be non-negative, got {n}")
        if complex(self.anom_conj) != a.conjugate():
            raise DomainError("anom_conj must equal the conjugate of anom")
        if abs(a) > math.sqrt(n * (n + 1)) + 1e-12 * max(1.0, n):
            raise DomainError("moments violate Gaussian-state positivity |<aa>|^2 <= n(n+1)")

    @classmethod
    def from_anom(cls, n_avg, anom, excited_index=0):
        anom = complex(anom)
        return cls(float(n_avg), anom, anom.conjugate(), int(excited_index))

    def with_index(self, excited_index):
        return InitialStateMoments(self.n_avg, self.anom, self.anom_conj, int(excited_index))


def svs_moments(u, phi=0.0, c=0):
    """Squeezed vacuum with amplitude ``u >= 0`` and phase ``phi``."""
    if u < 0:
        raise DomainError(f"squeezing amplitude must be >= 0, got {u}")
    n = math.sinh(u) ** 2
    anom = -complex(math.cos(phi), math.sin(phi)) * math.cosh(u) * math.sinh(u)
    return InitialStateMoments.from_anom(n, anom, c)


def sts_moments(u, phi=0.0, n_th=0.0, c=0):
    """Squeezed thermal state; ``n_th = 0`` reproduces :func:`svs_moments` exactly."""
    if u < 0 or n_th < 0:
        raise DomainError("squeezed thermal state needs u >= 0 and n_th >= 0")
    if n_th == 0:
        return svs_moments(u, phi, c)
    n = n_th * math.cosh(2 * u) + math.sinh(u) ** 2
    anom = -(n_th + 0.5) * complex(math.cos(phi), math.sin(phi)) * math.sinh(2 * u)
    return InitialStateMoments.from_anom(n, anom, c)


def coherent_moments(eta, c=0):
    """Coherent state with complex amplitude ``eta``.

    The moments are the raw ones, ``<a a> = eta**2``; downstream quadrature
    "variances" are therefore second moments about zero for this state.
    """
    eta = complex(eta)
    return InitialStateMoments.from_anom(abs(eta) ** 2, eta * eta, c)
