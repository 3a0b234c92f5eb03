"""Mode-sum evolution of photon number, quadrature noise and correlations.

With only cavity ``c`` excited, the field operator of cavity ``p`` at time
``t`` is ``G_p(t) a_c`` plus vacuum contributions, where

.. math::
    G_p(t) = \\sum_m \\tilde v^*_{mc} \\tilde v_{mp} e^{-i\\tilde\\omega_m t}.

All observables follow from ``G_p`` and the three initial moments:

* ``n_p = <a^dag a> |G_p|^2``
* ``<dX_p^2> = 1 + 2<a^dag a>|G_p|^2 + <aa> G_p^2 + <a^dag a^dag> G_p^{*2}``
  (``<dY_p^2>`` flips the sign of the last two terms)
* ``D^2_{p,p'} = 4 + 4<a^dag a>(|G_p|^2 + |G_p'|^2)
  - 4<aa> G_p G_p' - 4<a^dag a^dag> G_p^* G_p'^*``

``mode="envelope"`` replaces the fast optical phase of the anomalous terms by
the unit phasor that extremises them: ``var_x`` then holds the lower
envelope, ``var_y`` the upper one, and ``corr_var`` the lower envelope.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import DimensionError, NonRealError, PairError, SpecError
from .modes import (
    CavityChainSpec,
    QuasimodeBasis,
    crow_bloch_modes,
    solve_generalized_modes,
    two_cavity_modes,
)
from .states import InitialStateMoments

logger = logging.getLogger(__name__)

MODES = ("instantaneous", "envelope")
IMAG_DISCARD = 1e-10
IMAG_FAIL = 1e-8
NEGATIVE_FLOOR = -1e-10
_CHUNK = 256


@dataclass
class ObservableSeries:
    """Time series of per-cavity and pairwise observables.

    ``photon_number``, ``var_x`` and ``var_y`` have shape ``(T, C)`` with
    columns ordered like ``cavities``; ``corr_var`` has shape ``(T, P)``
    ordered like ``pairs``.  Any of them may be ``None`` when not computed.
    ``time_scale`` converts raw radian-time to the plotting axis
    (``t_scaled = time_scale * t``) and is only used on output.
    """

    times: np.ndarray
    cavities: tuple = ()
    photon_number: np.ndarray = None
    var_x: np.ndarray = None
    var_y: np.ndarray = None
    pairs: tuple = ()
    corr_var: np.ndarray = None
    mode: str = "instantaneous"
    time_scale: float = 1.0
    time_unit: str = "t"
    meta: dict = field(default_factory=dict)

    @property
    def sd_x(self):
        return None if self.var_x is None else np.sqrt(np.clip(self.var_x, 0, None))

    @property
    def sd_y(self):
        return None if self.var_y is None else np.sqrt(np.clip(self.var_y, 0, None))

    @property
    def entangled(self):
        """Boolean ``(T, P)`` array, true where ``corr_var < 4``."""
        return None if self.corr_var is None else self.corr_var < 4.0

    @property
    def scaled_times(self):
        return self.times * self.time_scale

    def column(self, quantity, cavity):
        """One per-cavity column, e.g. ``column("var_x", 0)``."""
        data = getattr(self, quantity)
        return data[:, self.cavities.index(cavity)]

    def pair_column(self, pair):
        return self.corr_var[:, self.pairs.index(tuple(pair))]


def check_times(times):
    """Validate a time grid: finite, one-dimensional, ascending, ``t >= 0``."""
    t = check_array(np.atleast_1d(np.asarray(times, dtype=float)), ensure_2d=False,
                    dtype=float, input_name="times")
    if t.ndim != 1:
        raise DimensionError("times must be one-dimensional")
    if t.size and t[0] < 0:
        raise SpecError("times must be non-negative")
    if np.any(np.diff(t) < 0):
        raise SpecError("times must be ascending")
    return t


def check_mode(mode):
    if mode not in MODES:
        raise SpecError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def check_pairs(pairs, labels):
    out = []
    for pair in pairs:
        p, q = pair
        if p == q:
            raise PairError(f"pair ({p}, {q}) names the same cavity twice")
        for label in (p, q):
            if label not in labels:
                raise PairError(f"pair ({p}, {q}) refers to unknown cavity {label!r}")
        out.append((p, q))
    return tuple(out)


def _real(values, what):
    """Drop a negligible imaginary residue, failing loudly on a large one."""
    scale = np.maximum(1.0, np.abs(values.real))
    resid = np.max(np.abs(values.imag) / scale) if values.size else 0.0
    if resid > IMAG_FAIL:
        raise NonRealError(f"{what} has imaginary residue {resid:.3g}; basis is inconsistent")
    if resid > IMAG_DISCARD:
        logger.warning("%s: discarding imaginary residue %.3g", what, resid)
    return values.real.copy()


def propagators(basis, c, cavities, times):
    """``G_p(t)`` for each requested cavity, shape ``(T, len(cavities))``.

    Time points are evaluated independently (chunked) so that the result for
    a given ``t`` does not depend on the rest of the grid.
    """
    v = basis.coefficients
    ic = basis.index_of(c)
    cols = [basis.index_of(p) for p in cavities]
    weights = np.conj(v[:, ic])[:, None] * v[:, cols]  # (M, C)
    out = np.empty((times.size, len(cols)), dtype=complex)
    for start in range(0, times.size, _CHUNK):
        t = times[start:start + _CHUNK]
        phase = np.exp(-1j * np.multiply.outer(t, basis.frequencies))  # (T, M)
        out[start:start + _CHUNK] = (phase[:, :, None] * weights[None, :, :]).sum(axis=1)
    return out


def _check_dims(basis, state):
    if not isinstance(basis, QuasimodeBasis):
        raise DimensionError("basis must be a QuasimodeBasis")
    if not isinstance(state, InitialStateMoments):
        raise DimensionError("state must be InitialStateMoments")
    if basis.n_modes != basis.n_cavities:
        raise DimensionError("basis must have as many modes as cavities")
    if state.excited_index not in basis.labels:
        raise DimensionError(f"excited cavity {state.excited_index!r} is not in the basis")


def _photon(state, g):
    n = _real(state.n_avg * np.conj(g) * g, "photon number")
    if n.size and n.min() < NEGATIVE_FLOOR:
        raise NonRealError(f"photon number {n.min():.3g} below rounding floor")
    return n


def _quadratures(state, g, mode):
    normal = 2 * state.n_avg * np.conj(g) * g
    if mode == "envelope":
        spread = 2 * abs(state.anom) * np.abs(g) ** 2
        base = _real(1 + normal, "quadrature variance")
        return base - spread, base + spread
    anomalous = state.anom * g * g + state.anom_conj * np.conj(g) ** 2
    var_x = _real(1 + normal + anomalous, "X variance")
    var_y = _real(1 + normal - anomalous, "Y variance")
    return var_x, var_y


def _correlation(state, gp, gq, mode):
    normal = 4 * state.n_avg * (np.abs(gp) ** 2 + np.abs(gq) ** 2)
    if mode == "envelope":
        return 4 + normal - 8 * abs(state.anom) * np.abs(gp * gq)
    anomalous = 4 * state.anom * gp * gq + 4 * state.anom_conj * np.conj(gp * gq)
    return _real(4 + normal - anomalous, "correlation variance")


def evolve_series(basis, state, times, cavities=None, pairs=(), mode="instantaneous",
                  quantities=("photon_number", "quadratures", "correlation")):
    """Evaluate the requested observables on a time grid.

    ``cavities`` defaults to every cavity of the basis.  ``quantities``
    selects which fields are filled; the others stay ``None``.
    """
    _check_dims(basis, state)
    times = check_times(times)
    mode = check_mode(mode)
    cavities = tuple(basis.labels if cavities is None else cavities)
    for p in cavities:
        basis.index_of(p)
    pairs = check_pairs(pairs, basis.labels)
    c = state.excited_index

    series = ObservableSeries(times=times, cavities=cavities, pairs=pairs, mode=mode)
    g = propagators(basis, c, cavities, times)
    if "photon_number" in quantities:
        series.photon_number = _photon(state, g)
    if "quadratures" in quantities:
        series.var_x, series.var_y = _quadratures(state, g, mode)
    if "correlation" in quantities and pairs:
        needed = sorted({p for pair in pairs for p in pair}, key=basis.labels.index)
        gpair = propagators(basis, c, needed, times)
        col = {p: gpair[:, i] for i, p in enumerate(needed)}
        series.corr_var = np.column_stack(
            [_correlation(state, col[p], col[q], mode) for p, q in pairs]
        )
    return series


def photon_number_series(basis, state, times, cavities=None):
    """Mean photon number of each cavity."""
    return evolve_series(basis, state, times, cavities, quantities=("photon_number",))


def quadrature_series(basis, state, times, cavities=None, mode="instantaneous"):
    """X and Y quadrature variances of each cavity."""
    return evolve_series(basis, state, times, cavities, mode=mode, quantities=("quadratures",))


def correlation_series(basis, state, times, pairs, mode="instantaneous"):
    """Correlation variance of cavity pairs; ``< 4`` certifies inseparability."""
    if not pairs:
        raise PairError("at least one pair is required")
    return evolve_series(basis, state, times, cavities=(), pairs=pairs, mode=mode,
                         quantities=("correlation",))


_BASIS_BUILDERS = {
    "two_cavity": two_cavity_modes,
    "bloch": crow_bloch_modes,
    "generalized": solve_generalized_modes,
}


def build_basis(chain, method="auto"):
    """Quasimode basis of ``chain`` with the named constructor.

    ``"auto"`` picks the generalized solver when matrices are present, the
    two-cavity formula for dimers and Bloch modes otherwise.
    """
    if method == "auto":
        if chain.overlap_matrix is not None or chain.coupling_matrix is not None:
            method = "generalized"
        elif chain.n_cavities == 2:
            method = "two_cavity"
        else:
            method = "bloch"
    try:
        builder = _BASIS_BUILDERS[method]
    except KeyError:
        raise SpecError(f"unknown basis method {method!r}") from None
    return builder(chain)


class ModeSumEvolver(BaseEstimator):
    """Estimator-style front end to the mode-sum engine.

    ``fit`` takes the initial state and builds (or accepts) the quasimode
    basis; ``predict`` evaluates an :class:`ObservableSeries` on a time grid.

    Parameters
    ----------
    chain : CavityChainSpec, optional
        System to diagonalise.  Ignored when ``basis`` is a QuasimodeBasis.
    basis : {"auto", "two_cavity", "bloch", "generalized"} or QuasimodeBasis
        Basis constructor, or a ready-made basis.
    cavities : sequence of labels, optional
        Cavities to report; all by default.
    pairs : sequence of (label, label)
        Cavity pairs whose correlation variance is reported.
    mode : {"instantaneous", "envelope"}
    lossless : bool
        Drop the imaginary parts of ``omega0`` and ``beta1`` before building.

    Examples
    --------
    >>> from crowsqueeze import CavityChainSpec, ModeSumEvolver, svs_moments
    >>> est = ModeSumEvolver(CavityChainSpec(2, 1.0, 0.1), pairs=[(0, 1)])
    >>> series = est.fit(svs_moments(1.2)).predict([0.0, 1.0])
    >>> series.photon_number.shape
    (2, 2)
    """

    def __init__(self, chain=None, basis="auto", cavities=None, pairs=(),
                 mode="instantaneous", lossless=False):
        self.chain = chain
        self.basis = basis
        self.cavities = cavities
        self.pairs = pairs
        self.mode = mode
        self.lossless = lossless

    def fit(self, state, y=None):
        if not isinstance(state, InitialStateMoments):
            raise SpecError("fit expects InitialStateMoments")
        check_mode(self.mode)
        if isinstance(self.basis, QuasimodeBasis):
            basis = self.basis
        else:
            if not isinstance(self.chain, CavityChainSpec):
                raise SpecError("a CavityChainSpec is required unless a basis is given")
            chain = self.chain.lossless() if self.lossless else self.chain
            basis = build_basis(chain, self.basis)
        _check_dims(basis, state)
        self.basis_ = basis
        self.state_ = state
        self.cavities_ = tuple(basis.labels if self.cavities is None else self.cavities)
        self.pairs_ = check_pairs(self.pairs, basis.labels)
        return self

    def predict(self, times):
        check_is_fitted(self, "basis_")
        return evolve_series(self.basis_, self.state_, times, self.cavities_, self.pairs_,
                             self.mode)

    def fit_predict(self, state, times):
        return self.fit(state).predict(times)
