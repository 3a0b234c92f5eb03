"""Dispatch an :class:`ExperimentConfig` to the matching engine."""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import clone

from .analytic import CrowEvolver, TwoCavityEvolver, TwoCavityParams
from .config import ExperimentConfig
from .errors import ConfigError, DimensionError
from .evolve import ModeSumEvolver
from .io import load_matrix_spec
from .modes import CavityChainSpec
from .states import coherent_moments, sts_moments, svs_moments


@dataclass
class RunResult:
    config: ExperimentConfig
    series: object
    lossless_series: object = None
    summary: dict = None


def build_state(cfg):
    s = cfg.state
    if s.kind == "svs":
        return svs_moments(s.u, s.phi, s.cavity)
    if s.kind == "sts":
        return sts_moments(s.u, s.phi, s.n_th, s.cavity)
    return coherent_moments(s.eta, s.cavity)


def _chain(cfg):
    if cfg.system == "general_matrix":
        omega0 = None if cfg.omega0 is None else cfg.omega0 * cfg.omega0_scale
        beta1 = 0j if cfg.beta1 is None else cfg.beta1
        try:
            return load_matrix_spec(cfg.matrix_file, omega0=omega0, beta1=beta1, period=cfg.period)
        except DimensionError as exc:
            # a malformed input file is a configuration problem, not an engine failure
            raise ConfigError(f"{cfg.matrix_file}: {exc}") from exc
    return CavityChainSpec(cfg.n_cavities, cfg.omega0 * cfg.omega0_scale, cfg.beta1, cfg.period)


def build_estimator(cfg, lossless=None):
    """Unfitted estimator for ``cfg``; ``lossless`` overrides ``cfg.lossless``."""
    lossless = cfg.lossless if lossless is None else lossless
    cavities = list(cfg.cavities)
    pairs = [tuple(p) for p in cfg.pairs]
    if cfg.system == "two_cavity":
        gamma = 0.0 if lossless else cfg.gamma
        if cfg.engine == "analytic":
            return TwoCavityEvolver(cfg.omega, cfg.delta, gamma, cfg.mode)
        basis = TwoCavityParams(cfg.omega, cfg.delta, gamma).basis()
        return ModeSumEvolver(basis=basis, cavities=cavities, pairs=pairs, mode=cfg.mode)
    chain = _chain(cfg)
    if cfg.system == "crow" and cfg.engine == "analytic":
        return CrowEvolver(chain.omega0, chain.beta1, cavities, pairs, cfg.mode, lossless)
    method = "bloch" if cfg.system == "crow" else "generalized"
    if cfg.system == "crow" and any(abs(p) > cfg.n_cavities // 2 for p in cavities):
        raise ConfigError("requested cavity lies outside the chain")
    return ModeSumEvolver(chain, method, cavities, pairs, cfg.mode, lossless)


def time_grid(cfg, chain=None):
    """Raw time grid and the factor converting it to the plotted axis.

    ``chain``, when given, supplies the (scaled) ``omega0``; matrix-file
    systems may leave it out of the config.
    """
    if cfg.system == "two_cavity":
        scale = cfg.delta
    elif cfg.beta1 is not None:
        if chain is not None:
            omega0 = chain.omega0
        elif cfg.omega0 is not None:
            omega0 = cfg.omega0 * cfg.omega0_scale
        else:
            raise ConfigError("omega0 is needed to define tau")
        zeta = omega0 * cfg.beta1
        if zeta.real <= 0:
            raise ConfigError("Re(omega0 * beta1) must be positive to define tau")
        scale = zeta.real
    else:
        scale = 1.0
    unit = {"two_cavity": "delta_t"}.get(cfg.system, "t_over_tau" if scale != 1.0 else "t")
    w = cfg.time
    grid = np.linspace(w.start, w.stop, w.points)
    if w.scaled:
        grid = grid / scale
    return grid, scale, unit


def _argext(values, times, fn):
    i = int(fn(values))
    return float(values[i]), float(times[i])


def summarize(series):
    """Per-cavity extrema and per-pair minimum correlation variance with their times."""
    t = series.scaled_times
    cav = []
    for i, p in enumerate(series.cavities):
        n_max, t_n = _argext(series.photon_number[:, i], t, np.argmax)
        vx_min, t_vx = _argext(series.var_x[:, i], t, np.argmin)
        cav.append({
            "cavity": p,
            "n_max": n_max,
            "t_n_max": t_n,
            "var_x_min": vx_min,
            "sd_x_min": math.sqrt(max(vx_min, 0.0)),
            "t_var_x_min": t_vx,
        })
    prs = []
    for j, pair in enumerate(series.pairs):
        c_min, t_c = _argext(series.corr_var[:, j], t, np.argmin)
        prs.append({"pair": list(pair), "corr_var_min": c_min, "t_corr_var_min": t_c,
                    "entangled": bool(c_min < 4.0)})
    return {"time_unit": series.time_unit, "cavities": cav, "pairs": prs}


def _predict(est, state, times, scale, unit):
    series = est.fit(state).predict(times)
    series.time_scale = scale
    series.time_unit = unit
    return series


def run(cfg):
    """Evaluate ``cfg`` and summarise the maxima of every reported quantity."""
    state = build_state(cfg)
    chain = _chain(cfg) if cfg.system == "general_matrix" else None
    times, scale, unit = time_grid(cfg, chain)
    series = _predict(build_estimator(cfg), state, times, scale, unit)
    if cfg.system == "two_cavity" and cfg.engine == "analytic":
        series = _select(series, cfg.cavities, cfg.pairs)
    summary = {"lossy" if not cfg.lossless else "lossless": summarize(series)}
    reference = None
    if cfg.compare_lossless and not cfg.lossless:
        ref_est = build_estimator(cfg, lossless=True)
        reference = _predict(ref_est, state, times, scale, unit)
        if cfg.system == "two_cavity" and cfg.engine == "analytic":
            reference = _select(reference, cfg.cavities, cfg.pairs)
        summary["lossless"] = summarize(reference)
    return RunResult(cfg, series, reference, summary)


def _select(series, cavities, pairs):
    """Restrict a two-cavity series to the requested cavities and pairs.

    The correlation variance is symmetric in its two cavities, so ``(1, 0)``
    reuses the ``(0, 1)`` column.
    """
    idx = [series.cavities.index(p) for p in cavities]
    pidx = []
    for p in pairs:
        if tuple(sorted(p)) != (0, 1):
            raise ConfigError(f"pair {tuple(p)} is not available for the two-cavity system")
        pidx.append(0)
    series.cavities = tuple(cavities)
    series.photon_number = series.photon_number[:, idx]
    series.var_x = series.var_x[:, idx]
    series.var_y = series.var_y[:, idx]
    if pairs:
        series.corr_var = series.corr_var[:, pidx]
        series.pairs = tuple(tuple(p) for p in pairs)
    else:
        series.corr_var = None
        series.pairs = ()
    return series


def sweep(estimator, param, values, state, times):
    """Clone ``estimator`` once per value of ``param`` and evaluate each copy."""
    out = []
    for v in values:
        est = clone(estimator).set_params(**{param: v})
        out.append((v, est.fit(state).predict(times)))
    return out
