"""Experiment configuration: schema, parsing and the built-in presets."""

import copy
import math
from dataclasses import asdict, dataclass, field

import yaml

from .errors import ConfigError

SYSTEMS = ("two_cavity", "crow", "general_matrix")
STATES = ("svs", "sts", "coherent")
ENGINES = ("analytic", "mode_sum")

# Reference CROW: Omega0 is quoted in units of 4 pi c / D, so with c = D = 1 the scale is 4 pi.
_CROW_SCALE = 4 * math.pi
_CROW_OMEGA0 = [0.305, -7.71e-5]
_CROW_BETA1 = [9.87e-3, -1.97e-5]


def parse_complex(value, name):
    """Accept a number, ``[re, im]`` or a Python complex literal string."""
    try:
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError
            out = complex(float(value[0]), float(value[1]))
        elif isinstance(value, str):
            out = complex(value.replace(" ", ""))
        elif isinstance(value, bool):
            raise ValueError
        else:
            out = complex(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot read {value!r} as a complex number") from None
    if not (math.isfinite(out.real) and math.isfinite(out.imag)):
        raise ConfigError(f"{name} must be finite")
    return out


def _float(value, name, minimum=None):
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be a number")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"{name} must be finite")
    if minimum is not None and out < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {out}")
    return out


def _int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    out = int(value)
    if minimum is not None and out < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {out}")
    return out


@dataclass
class StateConfig:
    kind: str = "svs"
    u: float = 0.0
    phi: float = 0.0
    n_th: float = 0.0
    eta: complex = 0j
    cavity: int = 0


@dataclass
class TimeWindow:
    """Time grid; ``scaled`` windows are in delta*t (dimer) or t/tau (CROW)."""

    start: float = 0.0
    stop: float = 1.0
    points: int = 2000
    scaled: bool = True


@dataclass
class ExperimentConfig:
    system: str
    state: StateConfig
    time: TimeWindow
    # two_cavity
    omega: float = None
    delta: float = None
    gamma: float = None
    # crow / general_matrix
    omega0: complex = None
    omega0_scale: float = 1.0
    beta1: complex = None
    n_cavities: int = 201
    period: float = 1.0
    matrix_file: str = None
    engine: str = "analytic"
    cavities: list = field(default_factory=list)
    pairs: list = field(default_factory=list)
    mode: str = "envelope"
    lossless: bool = False
    compare_lossless: bool = False
    name: str = None

    def to_dict(self):
        """Plain-data echo that :func:`config_from_dict` turns back into this config."""
        d = asdict(self)
        for key in ("omega0", "beta1"):
            if d[key] is not None:
                d[key] = [d[key].real, d[key].imag]
        eta = d["state"]["eta"]
        d["state"]["eta"] = [eta.real, eta.imag]
        d["pairs"] = [list(p) for p in d["pairs"]]
        return {k: v for k, v in d.items() if v is not None}


_TOP_KEYS = {f for f in ExperimentConfig.__dataclass_fields__}
_STATE_KEYS = {f for f in StateConfig.__dataclass_fields__}
_TIME_KEYS = {f for f in TimeWindow.__dataclass_fields__}


def _check_keys(section, allowed, where):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def config_from_dict(data):
    """Validate a nested mapping and build an :class:`ExperimentConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a mapping")
    _check_keys(data, _TOP_KEYS, "config")
    system = data.get("system")
    if system not in SYSTEMS:
        raise ConfigError(f"system must be one of {SYSTEMS}, got {system!r}")

    st = data.get("state", {})
    if not isinstance(st, dict):
        raise ConfigError("state must be a mapping")
    _check_keys(st, _STATE_KEYS, "state")
    kind = st.get("kind", "svs")
    if kind not in STATES:
        raise ConfigError(f"state.kind must be one of {STATES}, got {kind!r}")
    state = StateConfig(
        kind=kind,
        u=_float(st.get("u", 0.0), "state.u", 0.0),
        phi=_float(st.get("phi", 0.0), "state.phi"),
        n_th=_float(st.get("n_th", 0.0), "state.n_th", 0.0),
        eta=parse_complex(st.get("eta", 0.0), "state.eta"),
        cavity=_int(st.get("cavity", 0), "state.cavity"),
    )

    tw = data.get("time")
    if not isinstance(tw, dict):
        raise ConfigError("time window (mapping with start/stop/points) is required")
    _check_keys(tw, _TIME_KEYS, "time")
    window = TimeWindow(
        start=_float(tw.get("start", 0.0), "time.start", 0.0),
        stop=_float(tw.get("stop"), "time.stop"),
        points=_int(tw.get("points", 2000), "time.points", 2),
        scaled=bool(tw.get("scaled", True)),
    )
    if window.stop <= window.start:
        raise ConfigError("time.stop must exceed time.start")

    cfg = ExperimentConfig(system=system, state=state, time=window)
    cfg.name = data.get("name")
    cfg.mode = data.get("mode", "envelope")
    if cfg.mode not in ("envelope", "instantaneous"):
        raise ConfigError(f"mode must be envelope or instantaneous, got {cfg.mode!r}")
    cfg.engine = data.get("engine", "mode_sum" if system == "general_matrix" else "analytic")
    if cfg.engine not in ENGINES:
        raise ConfigError(f"engine must be one of {ENGINES}")
    if system == "general_matrix" and cfg.engine != "mode_sum":
        raise ConfigError("general_matrix systems only support the mode_sum engine")
    cfg.lossless = bool(data.get("lossless", False))
    cfg.compare_lossless = bool(data.get("compare_lossless", False))

    try:
        cfg.cavities = [_int(p, "cavities[]") for p in data.get("cavities", [])]
        cfg.pairs = [tuple(_int(p, "pairs[][]") for p in pair) for pair in data.get("pairs", [])]
    except TypeError:
        raise ConfigError("cavities must be a list of integers, pairs a list of pairs") from None
    if any(len(p) != 2 for p in cfg.pairs):
        raise ConfigError("each pair must have exactly two cavity labels")

    if system == "two_cavity":
        for key in ("omega", "delta", "gamma"):
            if key not in data:
                raise ConfigError(f"two_cavity systems need '{key}'")
        cfg.omega = _float(data["omega"], "omega")
        cfg.delta = _float(data["delta"], "delta")
        cfg.gamma = _float(data["gamma"], "gamma", 0.0)
        if not 0 < cfg.delta < cfg.omega:
            raise ConfigError("two_cavity requires 0 < delta < omega")
        if cfg.state.cavity != 0:
            raise ConfigError("two_cavity systems excite the left cavity (state.cavity = 0)")
        bad = [p for p in cfg.cavities if p not in (0, 1)]
        if bad:
            raise ConfigError(f"two_cavity cavities are 0 (left) and 1 (right), got {bad}")
    else:
        cfg.omega0_scale = _float(data.get("omega0_scale", 1.0), "omega0_scale")
        cfg.period = _float(data.get("period", 1.0), "period")
        if cfg.period <= 0:
            raise ConfigError("period must be positive")
        if "omega0" in data:
            cfg.omega0 = parse_complex(data["omega0"], "omega0")
        if "beta1" in data:
            cfg.beta1 = parse_complex(data["beta1"], "beta1")
        if system == "crow":
            if cfg.omega0 is None or cfg.beta1 is None:
                raise ConfigError("crow systems need omega0 and beta1")
            cfg.n_cavities = _int(data.get("n_cavities", 201), "n_cavities", 2)
        else:
            if "matrix_file" not in data:
                raise ConfigError("general_matrix systems need matrix_file")
            cfg.matrix_file = str(data["matrix_file"])
            if cfg.time.scaled and cfg.beta1 is None:
                raise ConfigError("a scaled time window for general_matrix needs beta1 to define tau")
    return cfg


def load_config(path, overrides=None):
    """Read a YAML configuration file; ``overrides`` are dotted keys, e.g. ``{"state.u": 1.0}``."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    if data is None:
        data = {}
    for key, value in (overrides or {}).items():
        set_dotted(data, key, value)
    return config_from_dict(data)


def set_dotted(data, key, value):
    """Set ``data["a"]["b"] = value`` for ``key = "a.b"``."""
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot set {key}: {part} is not a section")
    node[parts[-1]] = value


PRESETS = {
    "fig2": {
        "name": "fig2",
        "system": "two_cavity",
        "state": {"kind": "svs", "u": 1.2, "phi": 0.0, "cavity": 0},
        "omega": 1.0,
        "delta": 0.05,
        "gamma": 0.001,
        "time": {"start": 0.0, "stop": 4 * math.pi, "points": 2000, "scaled": True},
        "cavities": [0, 1],
        "pairs": [[0, 1]],
        "mode": "envelope",
    },
    "fig3": {
        "name": "fig3",
        "system": "crow",
        "state": {"kind": "svs", "u": 0.88, "phi": 0.0, "cavity": 0},
        "omega0": _CROW_OMEGA0,
        "omega0_scale": _CROW_SCALE,
        "beta1": _CROW_BETA1,
        "n_cavities": 201,
        "time": {"start": 0.0, "stop": 20.0, "points": 2000, "scaled": True},
        "cavities": [0, 2, 4, 6],
        "mode": "envelope",
        "compare_lossless": True,
    },
    "fig4": {
        "name": "fig4",
        "system": "crow",
        "state": {"kind": "svs", "u": 0.88, "phi": 0.0, "cavity": 0},
        "omega0": _CROW_OMEGA0,
        "omega0_scale": _CROW_SCALE,
        "beta1": _CROW_BETA1,
        "n_cavities": 201,
        "time": {"start": 0.0, "stop": 25.0, "points": 2000, "scaled": True},
        "cavities": list(range(11)),
        "pairs": [[p, -p] for p in range(1, 11)],
        "mode": "envelope",
        "compare_lossless": True,
    },
    "fig5": {
        "name": "fig5",
        "system": "crow",
        "state": {"kind": "svs", "u": 0.88, "phi": 0.0, "cavity": 0},
        "omega0": _CROW_OMEGA0,
        "omega0_scale": _CROW_SCALE,
        "beta1": _CROW_BETA1,
        "n_cavities": 201,
        "time": {"start": 0.0, "stop": 20.0, "points": 2000, "scaled": True},
        "cavities": [],
        "pairs": [[1, -1], [2, -2], [4, -4], [6, -6]],
        "mode": "envelope",
        "compare_lossless": True,
    },
}


def preset_dict(name):
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}") from None


def preset_config(name, overrides=None):
    data = preset_dict(name)
    for key, value in (overrides or {}).items():
        set_dotted(data, key, value)
    return config_from_dict(data)
