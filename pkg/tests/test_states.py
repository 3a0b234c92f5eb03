import math

import numpy as np
import pytest
from scipy.linalg import expm

from crowsqueeze import InitialStateMoments, coherent_moments, sts_moments, svs_moments
from crowsqueeze.errors import DomainError

DIM = 160


def _fock_moments(u, phi, n_th=0.0):
    """<a^dag a> and <a a> of S(xi) rho_th S(xi)^dag in a truncated Fock space."""
    a = np.diag(np.sqrt(np.arange(1, DIM)), 1).astype(complex)
    ad = a.conj().T
    xi = u * np.exp(1j * phi)
    s = expm(0.5 * (np.conj(xi) * a @ a - xi * ad @ ad))
    if n_th == 0:
        rho0 = np.zeros((DIM, DIM), dtype=complex)
        rho0[0, 0] = 1
    else:
        k = np.arange(DIM)
        p = n_th**k / (1 + n_th) ** (k + 1)
        rho0 = np.diag(p / p.sum()).astype(complex)
    rho = s @ rho0 @ s.conj().T
    return np.trace(rho @ ad @ a).real, np.trace(rho @ a @ a)


@pytest.mark.parametrize("u,phi", [(0.0, 0.0), (0.4, 0.0), (0.88, 1.1), (1.2, -2.5)])
def test_svs_against_fock_space(u, phi):
    n, aa = _fock_moments(u, phi)
    m = svs_moments(u, phi)
    assert m.n_avg == pytest.approx(n, abs=1e-10)
    assert abs(m.anom - aa) < 1e-10
    assert m.anom_conj == np.conj(m.anom)


@pytest.mark.parametrize("u,phi,n_th", [(0.3, 0.0, 0.2), (0.7, 0.9, 0.05)])
def test_sts_against_fock_space(u, phi, n_th):
    n, aa = _fock_moments(u, phi, n_th)
    m = sts_moments(u, phi, n_th)
    assert m.n_avg == pytest.approx(n, abs=1e-9)
    assert abs(m.anom - aa) < 1e-9


def test_sts_reduces_to_svs():
    assert sts_moments(0.88, 0.3, 0.0, c=4) == svs_moments(0.88, 0.3, c=4)


def test_svs_saturates_purity_bound():
    m = svs_moments(2.0)
    assert abs(m.anom) ** 2 == pytest.approx(m.n_avg * (m.n_avg + 1), rel=1e-14)
    assert m.n_avg == pytest.approx(math.sinh(2.0) ** 2)


def test_coherent_moments():
    m = coherent_moments(1.5 - 0.5j, c=3)
    assert m.n_avg == pytest.approx(2.5)
    assert m.anom == (1.5 - 0.5j) ** 2
    assert m.excited_index == 3


def test_validation():
    with pytest.raises(DomainError):
        svs_moments(-0.1)
    with pytest.raises(DomainError):
        sts_moments(0.1, n_th=-1)
    with pytest.raises(DomainError):
        InitialStateMoments(-1.0, 0j, 0j)
    with pytest.raises(DomainError):
        InitialStateMoments(1.0, 1j, 1j)
    with pytest.raises(DomainError):
        InitialStateMoments.from_anom(1.0, 2.0)
    with pytest.raises(DomainError):
        InitialStateMoments.from_anom(np.nan, 0.0)


def test_with_index_keeps_moments():
    m = svs_moments(0.5).with_index(7)
    assert m.excited_index == 7
    assert m.anom == svs_moments(0.5).anom
