r"""Closed-form evolution for the two-cavity dimer and the NNTB CROW.

Dimer (modes :math:`\omega - i\gamma` and :math:`\omega - \Delta - i\gamma`,
left cavity excited)::

    n_L,R   = n/2 e^{-2 gamma t} (1 +- cos(Delta t))
    dX^2    = 1 + e^{-2 gamma t}(1 +- cos Delta t)(n +- <aa>/2 e^{-i theta} +- <a+a+>/2 e^{i theta})
    D^2_LR  = 4 + e^{-2 gamma t}(4n - <aa> e^{i Delta t}(e^{-i(2w+Delta)t} - e^{-i(2w-Delta)t}) - c.c.)

with :math:`\theta = (2\omega - \Delta)t`.  CROW (cavity offset
:math:`\delta p = p - c`, :math:`\tilde\zeta_1 = \tilde\Omega_0\tilde\beta_1`)::

    n_p     = n e^{-2 gamma t} |J_dp(zeta t)|^2
    dX_p^2  = 1 + 2 n_p + <aa> (-1)^dp J_dp(zeta t)^2 e^{-2i Omega0 t} + c.c.
    D^2_pp' = 4 + 4(n_p + n_p') - 4 <aa> e^{-2i Omega0 t} i^(dp+dp') J_dp J_dp' - c.c.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import DomainError, SpecError
from .evolve import ObservableSeries, check_mode, check_pairs, check_times, _real
from .modes import QuasimodeBasis
from .specfun import C0, MAX_ABS_ARG, airy_constant_c1, bessel_i0, bessel_j_orders
from .states import InitialStateMoments

# i**k for k mod 4, applied as exact phasors
_QUADRANT = (1 + 0j, 1j, -1 + 0j, -1j)


@dataclass(frozen=True)
class TwoCavityParams:
    """Dimer with ``omega_+ = omega``, ``omega_+ - omega_- = delta`` and common decay ``gamma``."""

    omega: float
    delta: float
    gamma: float = 0.0

    def __post_init__(self):
        if not self.delta > 0:
            raise SpecError("delta must be positive")
        if self.gamma < 0:
            raise SpecError("gamma must be non-negative")
        if not self.omega > self.delta:
            raise SpecError("omega must exceed delta")

    def basis(self):
        """Equivalent quasimode basis (symmetric mode first)."""
        r = 1 / math.sqrt(2)
        return QuasimodeBasis(
            [complex(self.omega, -self.gamma), complex(self.omega - self.delta, -self.gamma)],
            [[r, r], [r, -r]],
            (0, 1),
        )

    @classmethod
    def from_basis(cls, basis, rtol=1e-12):
        """Read ``omega``, ``delta`` and ``gamma`` back from a (+, -) basis."""
        wp, wm = basis.frequencies
        if abs(wp.imag - wm.imag) > rtol * abs(wp):
            raise SpecError("the closed form assumes equal decay of both modes")
        return cls(wp.real, wp.real - wm.real, -wp.imag)


@dataclass(frozen=True)
class CrowParams:
    """NNTB chain parameters for the Bessel closed forms."""

    omega0: complex
    zeta1: complex
    c_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "omega0", complex(self.omega0))
        object.__setattr__(self, "zeta1", complex(self.zeta1))
        if self.omega0.imag > 0:
            raise SpecError("omega0 must have non-positive imaginary part")
        if not self.zeta1.real > 0:
            raise SpecError("Re(zeta1) must be positive so that tau is defined")

    @property
    def gamma(self):
        return -self.omega0.imag

    @property
    def tau(self):
        """Single-period transit time ``1 / Re(zeta1)``."""
        return 1.0 / self.zeta1.real

    @classmethod
    def from_chain(cls, chain, c_index=0, lossless=False):
        if lossless:
            chain = chain.lossless()
        return cls(chain.omega0, chain.omega0 * chain.beta1, c_index)

    def lossless(self):
        w0 = complex(self.omega0.real, 0.0)
        beta = self.zeta1 / self.omega0
        return CrowParams(w0, w0 * complex(beta.real, 0.0), self.c_index)


def _two_cavity_left(state):
    if state.excited_index != 0:
        raise SpecError("the dimer closed form needs the left cavity (label 0) excited")


def two_cavity_series(params, state, times, mode="instantaneous"):
    """Photon numbers, quadrature variances and ``D^2_{L,R}`` of the dimer.

    Cavities are labelled ``0`` (left, excited) and ``1`` (right).
    """
    _two_cavity_left(state)
    t = check_times(times)
    mode = check_mode(mode)
    w, d, g = params.omega, params.delta, params.gamma
    n, a, ad = state.n_avg, state.anom, state.anom_conj
    decay = np.exp(-2 * g * t)
    cos = np.cos(d * t)
    weight = {0: 1 + cos, 1: 1 - cos}
    sign = {0: 1.0, 1: -1.0}

    photons = np.column_stack([0.5 * n * decay * weight[p] for p in (0, 1)])
    var_x, var_y = [], []
    if mode == "envelope":
        for p in (0, 1):
            var_x.append(1 + decay * weight[p] * (n - abs(a)))
            var_y.append(1 + decay * weight[p] * (n + abs(a)))
        corr = 4 + decay * (4 * n - 4 * abs(a) * np.abs(np.sin(d * t)))
    else:
        fast = np.exp(-1j * (2 * w - d) * t)
        anomalous = 0.5 * a * fast + 0.5 * ad * np.conj(fast)
        for p in (0, 1):
            var_x.append(_real(1 + decay * weight[p] * (n + sign[p] * anomalous), "X variance"))
            var_y.append(_real(1 + decay * weight[p] * (n - sign[p] * anomalous), "Y variance"))
        beat = np.exp(-1j * (2 * w + d) * t) - np.exp(-1j * (2 * w - d) * t)
        corr = _real(
            4 + decay * (4 * n - a * np.exp(1j * d * t) * beat
                         - ad * np.exp(-1j * d * t) * np.conj(beat)),
            "correlation variance",
        )
    return ObservableSeries(
        times=t,
        cavities=(0, 1),
        photon_number=photons,
        var_x=np.column_stack(var_x),
        var_y=np.column_stack(var_y),
        pairs=((0, 1),),
        corr_var=corr[:, None],
        mode=mode,
        time_scale=d,
        time_unit="delta_t",
    )


def _bessel_table(params, t, offsets):
    z = params.zeta1 * t
    if z.size and np.max(np.abs(z)) > MAX_ABS_ARG:
        raise DomainError(f"|zeta1 t| up to {np.max(np.abs(z)):.4g} exceeds Bessel range")
    nmax = max((abs(o) for o in offsets), default=0)
    table = bessel_j_orders(nmax, z)
    out = {}
    for o in offsets:
        j = table[abs(o)]
        out[o] = -j if (o < 0 and abs(o) % 2) else j
    return out


def crow_series(params, state, times, cavities=(0,), pairs=(), mode="instantaneous"):
    """Bessel closed forms for a CROW with cavity ``params.c_index`` excited.

    ``cavities`` and ``pairs`` use absolute cavity labels; the Bessel order
    is the offset ``p - c_index``.  Times are raw (radian) times.
    """
    if state.excited_index != params.c_index:
        raise SpecError("state.excited_index must match params.c_index")
    t = check_times(times)
    mode = check_mode(mode)
    cavities = tuple(int(p) for p in cavities)
    pairs = check_pairs(pairs, set(cavities) | {p for pair in pairs for p in pair})
    c = params.c_index
    offsets = sorted({p - c for p in cavities} | {p - c for pair in pairs for p in pair})
    jt = _bessel_table(params, t, offsets)

    n, a, ad = state.n_avg, state.anom, state.anom_conj
    decay = np.exp(-2 * params.gamma * t)
    fast = np.exp(-2j * params.omega0 * t)
    fast_conj = np.exp(2j * np.conj(params.omega0) * t)

    photons, var_x, var_y = [], [], []
    for p in cavities:
        j = jt[p - c]
        mag2 = np.abs(j) ** 2
        photons.append(n * decay * mag2)
        base = 1 + 2 * n * decay * mag2
        if mode == "envelope":
            spread = 2 * abs(a) * decay * mag2
            var_x.append(base - spread)
            var_y.append(base + spread)
        else:
            parity = _QUADRANT[(2 * (p - c)) % 4]
            anomalous = a * parity * j * j * fast + ad * parity * np.conj(j * j) * fast_conj
            var_x.append(_real(base + anomalous, "X variance"))
            var_y.append(_real(base - anomalous, "Y variance"))

    corr = []
    for p, q in pairs:
        jp, jq = jt[p - c], jt[q - c]
        normal = 4 + 4 * n * decay * (np.abs(jp) ** 2 + np.abs(jq) ** 2)
        if mode == "envelope":
            corr.append(normal - 8 * abs(a) * decay * np.abs(jp * jq))
        else:
            k = (p - c) + (q - c)
            anomalous = (4 * a * fast * _QUADRANT[k % 4] * jp * jq
                         + 4 * ad * fast_conj * _QUADRANT[(-k) % 4] * np.conj(jp * jq))
            corr.append(_real(normal - anomalous, "correlation variance"))

    def stack(cols):
        return np.column_stack(cols) if cols else np.empty((t.size, 0))

    return ObservableSeries(
        times=t,
        cavities=cavities,
        photon_number=stack(photons),
        var_x=stack(var_x),
        var_y=stack(var_y),
        pairs=pairs,
        corr_var=stack(corr) if pairs else None,
        mode=mode,
        time_scale=1.0 / params.tau,
        time_unit="t_over_tau",
    )


class TotalPhotons(NamedTuple):
    exact: np.ndarray
    approx: np.ndarray


def total_photons(params, state, times):
    """Total photon number in an infinite chain and its small-loss-dispersion expansion.

    ``exact = n e^{-2 gamma t} I0(2 |Im(zeta1 t)|)`` and
    ``approx = n e^{-2 gamma t} (1 + Im(zeta1 t)**2)``.
    """
    t = check_times(times)
    x = params.zeta1.imag * t
    decay = state.n_avg * np.exp(-2 * params.gamma * t)
    exact = decay * np.atleast_1d(bessel_i0(np.abs(2 * x)))
    return TotalPhotons(exact, decay * (1 + x * x))


def arrival_time_estimate(p):
    """First-maximum time of cavity ``p``, in units of ``tau``: ``p + C0 p**(1/3)``."""
    if p < 1:
        raise DomainError("arrival time estimate needs p >= 1")
    return p + C0 * p ** (1.0 / 3.0)


def velocity_estimate(p, period=None, tau=None):
    """Effective propagation velocity to cavity ``p``.

    Returns ``v_p / v_max = 1 - C0 p**(-2/3)``, or the absolute velocity
    ``(period / tau) * ratio`` when both ``period`` and ``tau`` are given.
    """
    if p < 1:
        raise DomainError("velocity estimate needs p >= 1")
    ratio = 1.0 - C0 * p ** (-2.0 / 3.0)
    if period is not None and tau is not None:
        return ratio * period / tau
    return ratio


class AsymptoticMaxima(NamedTuple):
    n_max: float
    var_x_min: float
    corr_var_min: float


def asymptotic_maxima(p, u):
    """Large-``p`` lossless extrema for a squeezed vacuum of amplitude ``u``."""
    if p < 1:
        raise DomainError("asymptotic maxima need p >= 1")
    c1sq = airy_constant_c1() ** 2
    scale = p ** (-2.0 / 3.0)
    squeeze = c1sq * (1 - math.exp(-2 * u)) * scale
    return AsymptoticMaxima(c1sq * math.sinh(u) ** 2 * scale, 1 - squeeze, 4 * (1 - squeeze))


class TwoCavityEvolver(BaseEstimator):
    """Estimator-style wrapper around :func:`two_cavity_series`."""

    def __init__(self, omega=1.0, delta=0.05, gamma=0.0, mode="instantaneous"):
        self.omega = omega
        self.delta = delta
        self.gamma = gamma
        self.mode = mode

    def fit(self, state, y=None):
        if not isinstance(state, InitialStateMoments):
            raise SpecError("fit expects InitialStateMoments")
        _two_cavity_left(state)
        check_mode(self.mode)
        self.params_ = TwoCavityParams(self.omega, self.delta, self.gamma)
        self.state_ = state
        return self

    def predict(self, times):
        check_is_fitted(self, "params_")
        return two_cavity_series(self.params_, self.state_, times, self.mode)


class CrowEvolver(BaseEstimator):
    """Estimator-style wrapper around :func:`crow_series`.

    ``omega0`` and ``beta1`` define the chain; the excited cavity is taken
    from the state passed to ``fit``.
    """

    def __init__(self, omega0=1.0, beta1=0.01, cavities=(0,), pairs=(),
                 mode="instantaneous", lossless=False):
        self.omega0 = omega0
        self.beta1 = beta1
        self.cavities = cavities
        self.pairs = pairs
        self.mode = mode
        self.lossless = lossless

    def fit(self, state, y=None):
        if not isinstance(state, InitialStateMoments):
            raise SpecError("fit expects InitialStateMoments")
        check_mode(self.mode)
        w0 = complex(self.omega0)
        params = CrowParams(w0, w0 * complex(self.beta1), state.excited_index)
        self.params_ = params.lossless() if self.lossless else params
        self.state_ = state
        return self

    def predict(self, times):
        check_is_fitted(self, "params_")
        return crow_series(self.params_, self.state_, times, self.cavities, self.pairs,
                           self.mode)

    def total_photons(self, times):
        check_is_fitted(self, "params_")
        return total_photons(self.params_, self.state_, times)
