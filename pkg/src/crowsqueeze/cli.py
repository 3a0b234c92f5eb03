"""Command line interface.

Subcommands::

    crowsqueeze run CONFIG.yaml [options]
    crowsqueeze preset {fig2,fig3,fig4,fig5} [options]
    crowsqueeze sweep (--config CONFIG.yaml | --preset NAME) --param KEY
                      (--values V1,V2,... | --start A --stop B --num N) [options]

Exit status: 0 success, 1 configuration error, 2 engine error, 3 I/O error.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np
import yaml

from .config import PRESETS, config_from_dict, preset_dict, set_dotted
from .errors import ConfigError, CrowSqueezeError
from .io import metadata, serialize
from .runner import run

EXIT_OK, EXIT_CONFIG, EXIT_ENGINE, EXIT_IO = 0, 1, 2, 3

logger = logging.getLogger("crowsqueeze")


def _add_output_flags(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output file (sweep: directory); default derives from the name")
    p.add_argument("--lossless", action="store_true",
                   help="drop the imaginary parts of the frequencies and couplings")
    p.add_argument("--mode", choices=("envelope", "instantaneous"))
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the generation time so identical configs give identical files")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. --set state.u=1.0 (YAML value)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="crowsqueeze",
        description="Squeezed-state evolution and entanglement in lossy coupled cavities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a YAML config")
    p_run.add_argument("config")
    _add_output_flags(p_run)

    p_pre = sub.add_parser("preset", help="run a built-in figure preset")
    p_pre.add_argument("name", choices=sorted(PRESETS))
    _add_output_flags(p_pre)

    p_sw = sub.add_parser("sweep", help="vary one config entry, one output file per value")
    src = p_sw.add_mutually_exclusive_group(required=True)
    src.add_argument("--config")
    src.add_argument("--preset", choices=sorted(PRESETS))
    p_sw.add_argument("--param", required=True, help="dotted config key, e.g. state.u")
    p_sw.add_argument("--values", help="comma separated values")
    p_sw.add_argument("--start", type=float)
    p_sw.add_argument("--stop", type=float)
    p_sw.add_argument("--num", type=int)
    _add_output_flags(p_sw)
    return parser


def _overrides(args):
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = yaml.safe_load(value)
    if args.lossless:
        out["lossless"] = True
    if args.mode:
        out["mode"] = args.mode
    return out


def _base_dict(args):
    if getattr(args, "preset", None) or args.command == "preset":
        return preset_dict(args.preset if args.command == "sweep" else args.name)
    path = args.config
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    # matrix files are resolved relative to the config file
    if isinstance(data, dict) and "matrix_file" in data and not os.path.isabs(str(data["matrix_file"])):
        data["matrix_file"] = os.path.join(os.path.dirname(os.path.abspath(path)),
                                           str(data["matrix_file"]))
    return data


def _write(result, fmt, path, timestamp):
    cfg_echo = result.config.to_dict()
    meta = metadata(config=cfg_echo, series=result.series, timestamp=timestamp)
    extra = {}
    if result.lossless_series is not None:
        extra["lossless_series"] = result.lossless_series
    if fmt == "json":
        serialize(result.series, "json", path, meta, extra, result.summary)
        return [path]
    meta["summary"] = result.summary
    written = [serialize(result.series, "csv", path, meta)]
    if result.lossless_series is not None:
        stem, ext = os.path.splitext(path)
        ref_path = f"{stem}_lossless{ext}"
        ref_meta = metadata(config=cfg_echo, series=result.lossless_series, timestamp=timestamp,
                            extra={"variant": "lossless reference"})
        written.append(serialize(result.lossless_series, "csv", ref_path, ref_meta))
    return written


def _default_name(cfg, fallback):
    return cfg.name or fallback


def _sweep_values(args):
    if args.values is not None:
        return [yaml.safe_load(v) for v in args.values.split(",") if v.strip()]
    if None in (args.start, args.stop, args.num):
        raise ConfigError("sweep needs --values or all of --start, --stop, --num")
    if args.num < 1:
        raise ConfigError("--num must be positive")
    return [float(v) for v in np.linspace(args.start, args.stop, args.num)]


def _format_value(v):
    return format(v, ".6g") if isinstance(v, float) else str(v)


def _main(args):
    overrides = _overrides(args)
    timestamp = not args.no_timestamp
    if args.command in ("run", "preset"):
        data = _base_dict(args)
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        for key, value in overrides.items():
            set_dotted(data, key, value)
        cfg = config_from_dict(data)
        result = run(cfg)
        stem = _default_name(cfg, os.path.splitext(os.path.basename(getattr(args, "config", "") or "run"))[0])
        path = args.out or f"{stem}.{args.format}"
        for p in _write(result, args.format, path, timestamp):
            print(p)
        return EXIT_OK

    values = _sweep_values(args)
    base = _base_dict(args)
    if not isinstance(base, dict):
        raise ConfigError("configuration must be a mapping")
    outdir = args.out or "."
    os.makedirs(outdir, exist_ok=True)
    for value in values:
        data = json.loads(json.dumps(base))
        for key, v in overrides.items():
            set_dotted(data, key, v)
        set_dotted(data, args.param, value)
        cfg = config_from_dict(data)
        result = run(cfg)
        stem = _default_name(cfg, "sweep")
        path = os.path.join(outdir, f"{stem}_{args.param}={_format_value(value)}.{args.format}")
        for p in _write(result, args.format, path, timestamp):
            print(p)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _main(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CrowSqueezeError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
