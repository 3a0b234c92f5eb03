"""Quasimode bases of coupled-cavity chains.

A basis holds the complex mode frequencies ``w_m = Re - i*decay`` and the
expansion coefficients ``v[m, q]`` of mode ``m`` on cavity ``q``.  Three
constructors are provided:

* :func:`two_cavity_modes` -- symmetric/antisymmetric pair of a dimer,
* :func:`crow_bloch_modes` -- Bloch modes of a periodic nearest-neighbour chain,
* :func:`solve_generalized_modes` -- any overlap/coupling matrices, solved
  numerically from ``A W v = w**2 (A + B) v`` with ``W = diag(Omega_q**2)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    SingularMatrixError,
    SpecError,
)

RESIDUAL_TOL = 1e-8
MAX_CONDITION = 1e10


@dataclass(frozen=True)
class CavityChainSpec:
    """Description of a chain of identical (or nearly identical) cavities.

    Attributes
    ----------
    n_cavities : int
        Number of cavities.
    omega0 : complex
        Single-cavity complex frequency ``Omega0 - i*Gamma0`` (``Gamma0 >= 0``).
    beta1 : complex
        Nearest-neighbour coupling coefficient.
    period : float
        Lattice period ``D``.
    overlap_matrix, coupling_matrix : ndarray, optional
        Square complex matrices ``A`` and ``B`` for the generalized problem.
    cavity_frequencies : ndarray, optional
        Per-cavity complex frequencies; defaults to ``omega0`` everywhere.
    alphas, betas : tuple of complex
        Overlap and coupling coefficients ``A_{0p}``, ``B_{0p}`` for
        ``p = 1, 2, ...`` used by :func:`full_dispersion`.  ``betas`` defaults
        to ``(beta1,)``.
    """

    n_cavities: int
    omega0: complex
    beta1: complex = 0j
    period: float = 1.0
    overlap_matrix: np.ndarray = None
    coupling_matrix: np.ndarray = None
    cavity_frequencies: np.ndarray = None
    alphas: tuple = ()
    betas: tuple = None

    def __post_init__(self):
        if int(self.n_cavities) != self.n_cavities or self.n_cavities < 1:
            raise SpecError(f"n_cavities must be a positive integer, got {self.n_cavities!r}")
        object.__setattr__(self, "n_cavities", int(self.n_cavities))
        object.__setattr__(self, "omega0", complex(self.omega0))
        object.__setattr__(self, "beta1", complex(self.beta1))
        if self.omega0.imag > 0:
            raise SpecError("omega0 must have non-positive imaginary part (Omega0 - i*Gamma0)")
        if not self.period > 0:
            raise SpecError("period must be positive")
        n = self.n_cavities
        for name in ("overlap_matrix", "coupling_matrix"):
            m = getattr(self, name)
            if m is None:
                continue
            m = np.array(m, dtype=complex)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DimensionError(f"{name} must be square, got shape {m.shape}")
            if m.shape[0] != n:
                raise DimensionError(f"{name} has dimension {m.shape[0]}, expected {n}")
            m.setflags(write=False)
            object.__setattr__(self, name, m)
        if self.overlap_matrix is not None:
            diag = np.diag(self.overlap_matrix)
            if np.any(np.abs(diag) < 1e-12):
                raise SpecError("overlap matrix has a vanishing diagonal entry")
            if not np.allclose(diag, 1.0, rtol=0, atol=1e-14):
                # rescaling each single-cavity mode to unit overlap leaves the
                # eigenvalues unchanged
                s = np.diag(1 / np.sqrt(diag))
                for name in ("overlap_matrix", "coupling_matrix"):
                    m = getattr(self, name)
                    if m is not None:
                        m = s @ m @ s
                        m.setflags(write=False)
                        object.__setattr__(self, name, m)
        if self.cavity_frequencies is not None:
            f = np.array(self.cavity_frequencies, dtype=complex).ravel()
            if f.shape != (n,):
                raise DimensionError(f"cavity_frequencies must have length {n}")
            f.setflags(write=False)
            object.__setattr__(self, "cavity_frequencies", f)
        object.__setattr__(self, "alphas", tuple(complex(a) for a in self.alphas))
        betas = (self.beta1,) if self.betas is None else tuple(complex(b) for b in self.betas)
        object.__setattr__(self, "betas", betas)

    @property
    def zeta1(self):
        """Complex hopping rate ``omega0 * beta1``."""
        return self.omega0 * self.beta1

    def lossless(self):
        """Copy with the imaginary parts of ``omega0`` and ``beta1`` removed."""
        return CavityChainSpec(
            self.n_cavities,
            complex(self.omega0.real, 0.0),
            complex(self.beta1.real, 0.0),
            self.period,
            self.overlap_matrix,
            self.coupling_matrix,
            self.cavity_frequencies,
            self.alphas,
            self.betas,
        )


@dataclass(frozen=True)
class QuasimodeBasis:
    """Mode frequencies and coefficients of a coupled system.

    ``coefficients[m, q]`` is the weight of cavity ``labels[q]`` in mode ``m``.
    """

    frequencies: np.ndarray
    coefficients: np.ndarray
    labels: tuple = field(default=None)

    def __post_init__(self):
        w = np.array(self.frequencies, dtype=complex).ravel()
        v = np.array(self.coefficients, dtype=complex)
        if v.ndim != 2 or v.shape[0] != w.size:
            raise DimensionError(
                f"coefficients shape {v.shape} inconsistent with {w.size} frequencies"
            )
        labels = tuple(range(v.shape[1])) if self.labels is None else tuple(self.labels)
        if len(labels) != v.shape[1] or len(set(labels)) != len(labels):
            raise DimensionError("labels must be unique and match the number of cavities")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "frequencies", w)
        object.__setattr__(self, "coefficients", v)
        object.__setattr__(self, "labels", labels)

    @property
    def n_modes(self):
        return self.frequencies.size

    @property
    def n_cavities(self):
        return self.coefficients.shape[1]

    def index_of(self, label):
        """Column index of a cavity label."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise DimensionError(f"cavity {label!r} is not part of this basis") from None


def centered_labels(n):
    """Cavity labels ``-(n-1)//2 ... n//2`` with the middle cavity at 0."""
    lo = -((n - 1) // 2)
    return tuple(range(lo, lo + n))


def two_cavity_modes(spec):
    """Symmetric (+) and antisymmetric (-) modes of two coupled cavities.

    Frequencies are ``omega0 * (1 +- beta1/2)`` in the order (+, -); the
    coefficient rows are ``(1, 1)/sqrt(2)`` and ``(1, -1)/sqrt(2)`` for
    cavities ``(L, R) = (0, 1)``.
    """
    if spec.n_cavities != 2:
        raise SpecError(f"two_cavity_modes needs 2 cavities, got {spec.n_cavities}")
    w0, b = spec.omega0, spec.beta1
    r = 1.0 / math.sqrt(2.0)
    return QuasimodeBasis(
        frequencies=[w0 * (1 + b / 2), w0 * (1 - b / 2)],
        coefficients=[[r, r], [r, -r]],
        labels=(0, 1),
    )


def nntb_dispersion(spec, k):
    """Nearest-neighbour band ``omega0 * (1 - beta1 * cos(k D))``."""
    return spec.omega0 * (1 - spec.beta1 * np.cos(np.asarray(k) * spec.period))


def crow_bloch_modes(spec):
    """Bloch modes of a ring of ``N`` cavities in the nearest-neighbour limit.

    Mode ``j`` has wavevector ``k_j = 2 pi j / (N D)`` and coefficients
    ``exp(i k_j p D) / sqrt(N)`` over centred cavity labels ``p``.
    """
    n = spec.n_cavities
    if n < 2:
        raise SpecError(f"a Bloch chain needs at least 2 cavities, got {n}")
    labels = centered_labels(n)
    j = np.arange(n)
    # k_j p D = 2 pi (j p mod N) / N keeps the phase argument small and exact
    phase = (np.outer(j, labels) % n) * (2 * np.pi / n)
    coeffs = np.exp(1j * phase) / math.sqrt(n)
    k = 2 * np.pi * j / (n * spec.period)
    return QuasimodeBasis(nntb_dispersion(spec, k), coeffs, labels)


def full_dispersion(spec, k):
    """Tight-binding band including all supplied overlap/coupling ranges.

    ``omega(k) = omega0 * sqrt(num / den)`` with
    ``num = 1 + 2 sum_p cos(k p D) alpha_p`` and
    ``den = 1 + 2 sum_p cos(k p D) (alpha_p + beta_p)``; principal square root.
    """
    kk = np.asarray(k, dtype=float)
    size = max(len(spec.alphas), len(spec.betas))
    alphas = np.zeros(size, dtype=complex)
    betas = np.zeros(size, dtype=complex)
    alphas[: len(spec.alphas)] = spec.alphas
    betas[: len(spec.betas)] = spec.betas
    p = np.arange(1, size + 1)
    cos = np.cos(np.multiply.outer(kk, p) * spec.period)
    num = 1 + 2 * (cos @ alphas)
    den = 1 + 2 * (cos @ (alphas + betas))
    if np.any(np.abs(den) < 1e-12):
        raise DomainError("dispersion denominator vanishes")
    out = spec.omega0 * np.sqrt(num / den)
    return complex(out) if kk.ndim == 0 else out


def _frequency_from_square(lam):
    w = np.sqrt(lam.astype(complex))
    return np.where(w.real < 0, -w, w)


def _is_circulant(m, tol=1e-12):
    first = m[0]
    scale = max(np.max(np.abs(m)), 1.0)
    return all(
        np.max(np.abs(np.roll(first, i) - m[i])) <= tol * scale for i in range(1, m.shape[0])
    )


def _clusters(values, rtol=1e-8):
    """Group indices of (sorted) values that coincide to ``rtol``."""
    scale = max(np.max(np.abs(values)), 1e-300)
    groups, current = [], [0]
    for i in range(1, values.size):
        if abs(values[i] - values[current[0]]) <= rtol * scale:
            current.append(i)
        else:
            groups.append(current)
            current = [i]
    groups.append(current)
    return groups


def _fix_phase(vec):
    mag = np.abs(vec)
    idx = int(np.argmax(mag >= mag.max() * (1 - 1e-9)))
    return vec * (abs(vec[idx]) / vec[idx])


def solve_generalized_modes(spec):
    """Modes of arbitrary coupling matrices.

    Solves ``M v = w**2 v`` with ``M = (A + B)^{-1} A diag(Omega_q**2)``.  The
    root with positive real part is returned, modes are sorted by ascending
    ``Re w``, each coefficient row has unit norm and its largest component is
    made real and positive.  Degenerate groups are orthonormalised; for
    circulant inputs they are additionally resolved into Bloch vectors.

    Raises
    ------
    SpecError
        If ``spec`` carries no overlap/coupling matrices.
    SingularMatrixError
        If ``A + B`` has condition number above ``1e10``.
    ConvergenceError
        If the eigensolver fails or a mode misses the residual tolerance.
    """
    if spec.overlap_matrix is None and spec.coupling_matrix is None:
        raise SpecError("solve_generalized_modes needs overlap and/or coupling matrices")
    n = spec.n_cavities
    a = np.eye(n, dtype=complex) if spec.overlap_matrix is None else np.array(spec.overlap_matrix)
    b = np.zeros((n, n), dtype=complex) if spec.coupling_matrix is None else np.array(spec.coupling_matrix)
    freqs = (
        np.full(n, spec.omega0) if spec.cavity_frequencies is None else np.array(spec.cavity_frequencies)
    )
    lhs = a @ np.diag(freqs**2)
    rhs = a + b
    cond = np.linalg.cond(rhs)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularMatrixError(f"A + B is numerically singular (condition {cond:.3g})")
    m = np.linalg.solve(rhs, lhs)
    try:
        lam, vecs = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc

    omega = _frequency_from_square(lam)
    order = np.lexsort((omega.imag, omega.real))
    omega, lam, vecs = omega[order], lam[order], vecs[:, order]

    shift = None
    if n > 1 and _is_circulant(a) and _is_circulant(b) and np.allclose(freqs, freqs[0]):
        shift = np.roll(np.eye(n), 1, axis=0)
    for group in _clusters(lam):
        if len(group) < 2:
            continue
        q, _ = np.linalg.qr(vecs[:, group])
        if shift is not None:
            # the cyclic shift commutes with M; its eigenvectors inside the
            # degenerate subspace are plane waves
            _, sub = np.linalg.eig(q.conj().T @ shift @ q)
            q, _ = np.linalg.qr(q @ sub)
        vecs[:, group] = q

    rows = []
    for i in range(n):
        v = vecs[:, i] / np.linalg.norm(vecs[:, i])
        rows.append(_fix_phase(v))
    coeffs = np.array(rows)

    scale = max(np.linalg.norm(lhs, 2), np.linalg.norm(rhs, 2) * np.max(np.abs(lam)), 1e-300)
    for i in range(n):
        res = np.linalg.norm(lhs @ coeffs[i] - lam[i] * (rhs @ coeffs[i]))
        if res > RESIDUAL_TOL * scale:
            raise ConvergenceError(f"mode {i} residual {res:.3g} exceeds tolerance")
    return QuasimodeBasis(omega, coeffs, tuple(range(n)))


def quality_factor(w):
    """``Re w / (2 |Im w|)`` of a complex frequency (``inf`` if lossless)."""
    w = complex(w)
    return math.inf if w.imag == 0 else w.real / (2 * abs(w.imag))


def bloch_q_ratio(spec):
    """Quality factor of the ``k = 0`` band edge over that of ``k = pi/D``."""
    w0 = nntb_dispersion(spec, 0.0)
    wpi = nntb_dispersion(spec, math.pi / spec.period)
    return quality_factor(w0) / quality_factor(wpi)


def group_velocity_max(spec):
    """Band-centre group velocity ``D * Re(omega0 * beta1)`` of the NNTB band."""
    return spec.period * spec.zeta1.real
