"""Reading matrix files and writing observable series to CSV or JSON."""

import csv
import datetime
import io
import json
import re

import numpy as np

from . import __version__
from .errors import DimensionError, ParseError
from .evolve import ObservableSeries
from .modes import CavityChainSpec

UNITS = {
    "t_raw": "radian time, 1/omega units of the supplied frequencies",
    "delta_t": "t_scaled = delta * t (two-cavity splitting)",
    "t_over_tau": "t_scaled = t / tau with tau = 1 / Re(omega0 * beta1)",
    "t": "t_scaled = t",
    "var": "quadrature variance, vacuum = 1",
    "sd": "square root of the variance",
    "corrvar": "correlation variance, entangled when < 4",
}


def _fmt(x):
    return format(float(x), ".17g")


def _label(p):
    return str(p)


def csv_columns(series):
    """Column names in output order."""
    cols = ["t_raw", "t_scaled"]
    for p in series.cavities:
        lab = _label(p)
        cols += [f"n_{lab}", f"var_x_{lab}", f"var_y_{lab}", f"sd_x_{lab}", f"sd_y_{lab}"]
    for p, q in series.pairs:
        cols += [f"corrvar_{p}_{q}", f"entangled_{p}_{q}"]
    return cols


def _rows(series):
    t = series.times
    cols = [t, series.scaled_times]
    sd_x, sd_y = series.sd_x, series.sd_y
    for i, _ in enumerate(series.cavities):
        cols += [series.photon_number[:, i], series.var_x[:, i], series.var_y[:, i],
                 sd_x[:, i], sd_y[:, i]]
    for j, _ in enumerate(series.pairs):
        cols += [series.corr_var[:, j], series.entangled[:, j]]
    if not series.cavities and not series.pairs:
        return []
    out = []
    for k in range(t.size):
        row = []
        for c in cols:
            v = c[k]
            row.append(str(int(v)) if isinstance(v, (bool, np.bool_)) else _fmt(v))
        out.append(row)
    return out


def metadata(config=None, series=None, timestamp=True, extra=None):
    meta = {"package": "crowsqueeze", "version": __version__}
    if timestamp:
        meta["generated"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    if series is not None:
        meta["mode"] = series.mode
        meta["time_unit"] = series.time_unit
        meta["time_scale"] = series.time_scale
    meta["units"] = UNITS
    if config is not None:
        meta["config"] = config
    if extra:
        meta.update(extra)
    return meta


def series_to_csv(series, meta):
    buf = io.StringIO()
    for line in json.dumps(meta, sort_keys=True, indent=1).splitlines():
        buf.write("# " + line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_columns(series))
    writer.writerows(_rows(series))
    return buf.getvalue()


def series_to_dict(series):
    def mat(a):
        return None if a is None else a.tolist()

    return {
        "times": series.times.tolist(),
        "t_scaled": series.scaled_times.tolist(),
        "time_scale": series.time_scale,
        "time_unit": series.time_unit,
        "mode": series.mode,
        "cavities": list(series.cavities),
        "pairs": [list(p) for p in series.pairs],
        "photon_number": mat(series.photon_number),
        "var_x": mat(series.var_x),
        "var_y": mat(series.var_y),
        "sd_x": mat(series.sd_x),
        "sd_y": mat(series.sd_y),
        "corr_var": mat(series.corr_var),
        "entangled": None if series.corr_var is None else series.entangled.astype(int).tolist(),
    }


def series_from_dict(d):
    def arr(key, ncols):
        v = d.get(key)
        if v is None:
            return None
        a = np.array(v, dtype=float)
        return a.reshape(len(d["times"]), ncols)

    cavities = tuple(d["cavities"])
    pairs = tuple(tuple(p) for p in d["pairs"])
    return ObservableSeries(
        times=np.array(d["times"], dtype=float),
        cavities=cavities,
        photon_number=arr("photon_number", len(cavities)),
        var_x=arr("var_x", len(cavities)),
        var_y=arr("var_y", len(cavities)),
        pairs=pairs,
        corr_var=arr("corr_var", len(pairs)),
        mode=d["mode"],
        time_scale=d["time_scale"],
        time_unit=d["time_unit"],
    )


def serialize(series, fmt, path, meta=None, extra_series=None, summary=None):
    """Write ``series`` to ``path`` as ``"csv"`` or ``"json"``.

    JSON files hold ``metadata``, ``series`` and, when given, the additional
    named series and ``summary``; floats use the shortest repr that
    round-trips exactly.  CSV files carry the metadata as ``#`` comment
    lines followed by the column header.  Raises ``OSError`` on I/O failure.
    """
    meta = metadata(series=series) if meta is None else meta
    if fmt == "csv":
        text = series_to_csv(series, meta)
    elif fmt == "json":
        doc = {"metadata": meta, "series": series_to_dict(series)}
        for name, other in (extra_series or {}).items():
            doc[name] = series_to_dict(other)
        if summary is not None:
            doc["summary"] = summary
        text = json.dumps(doc, sort_keys=True, indent=1, allow_nan=False) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def read_json(path, key="series"):
    """Load a series written by :func:`serialize` in JSON format."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return series_from_dict(doc[key]), doc


_SECTION = re.compile(r"^\[(\w+)\]$")
_HEADER = re.compile(r"^(\w+)\s*=\s*(.*)$")
_SECTIONS = ("overlap", "coupling", "frequencies")


def _numbers(text, lineno):
    tokens = [tok for tok in re.split(r"[,\s]+", text.strip()) if tok]
    out = []
    for col, tok in enumerate(tokens, 1):
        try:
            out.append(float(tok))
        except ValueError:
            raise ParseError(f"not a number: {tok!r}", lineno, col) from None
        if not np.isfinite(out[-1]):
            raise ParseError(f"non-finite value {tok!r}", lineno, col)
    return out


def _complex_rows(rows, name):
    width = {len(r) for _, r in rows}
    n = len(rows)
    for lineno, r in rows:
        if len(r) % 2:
            raise ParseError(f"[{name}] rows need paired real/imag columns", lineno, len(r))
        if len(r) != 2 * n:
            raise DimensionError(
                f"[{name}] is not square: {n} rows but line {lineno} has {len(r) // 2} complex columns"
            )
    if len(width) > 1:
        raise DimensionError(f"[{name}] rows have differing lengths")
    a = np.array([r for _, r in rows], dtype=float)
    return a[:, 0::2] + 1j * a[:, 1::2]


def load_matrix_spec(path, omega0=None, beta1=0j, period=None):
    """Read overlap/coupling matrices for the generalized mode solver.

    The file is plain text.  Optional header lines ``omega0 = re im`` and
    ``period = D`` precede sections ``[overlap]``, ``[coupling]`` and
    ``[frequencies]``; each matrix row lists ``re im`` pairs separated by
    whitespace or commas, ``#`` starts a comment.  Arguments override the
    header values.

    Raises
    ------
    ParseError
        Malformed content, with 1-based line and column.
    DimensionError
        Non-square or mutually inconsistent matrices.
    """
    header, sections, current = {}, {}, None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            m = _SECTION.match(line)
            if m:
                current = m.group(1).lower()
                if current not in _SECTIONS:
                    raise ParseError(f"unknown section [{current}]", lineno, 1)
                if current in sections:
                    raise ParseError(f"duplicate section [{current}]", lineno, 1)
                sections[current] = []
                continue
            if current is None:
                h = _HEADER.match(line)
                if not h or h.group(1) not in ("omega0", "period"):
                    raise ParseError(f"expected 'omega0 = re im' or 'period = D', got {line!r}",
                                     lineno, 1)
                offset = raw.index("=") + 1
                vals = _numbers(raw[offset:].split("#", 1)[0], lineno)
                header[h.group(1)] = (vals, lineno)
                continue
            sections[current].append((lineno, _numbers(line, lineno)))

    if "overlap" not in sections and "coupling" not in sections:
        raise ParseError("file defines neither [overlap] nor [coupling]")
    mats = {k: _complex_rows(v, k) for k, v in sections.items() if k != "frequencies" and v}
    if not mats:
        raise ParseError("matrix sections are empty")
    sizes = {m.shape[0] for m in mats.values()}
    if len(sizes) != 1:
        raise DimensionError("overlap and coupling matrices have different dimensions")
    n = sizes.pop()

    freqs = None
    if sections.get("frequencies"):
        rows = sections["frequencies"]
        flat = [x for _, r in rows for x in r]
        if len(flat) != 2 * n:
            raise DimensionError(f"[frequencies] needs {n} complex values, got {len(flat) / 2:g}")
        freqs = np.array(flat[0::2]) + 1j * np.array(flat[1::2])

    if omega0 is None:
        if "omega0" in header:
            vals, lineno = header["omega0"]
            if len(vals) not in (1, 2):
                raise ParseError("omega0 needs 're' or 're im'", lineno)
            omega0 = complex(vals[0], vals[1] if len(vals) == 2 else 0.0)
        elif freqs is not None:
            omega0 = complex(freqs[0])
        else:
            raise ParseError("omega0 missing: give 'omega0 = re im' or a [frequencies] section")
    if period is None:
        period = header["period"][0][0] if "period" in header else 1.0

    return CavityChainSpec(
        n_cavities=n,
        omega0=omega0,
        beta1=beta1,
        period=period,
        overlap_matrix=mats.get("overlap"),
        coupling_matrix=mats.get("coupling"),
        cavity_frequencies=freqs,
    )


def write_matrix_spec(path, chain):
    """Inverse of :func:`load_matrix_spec` for specs carrying matrices."""
    lines = [f"omega0 = {_fmt(chain.omega0.real)} {_fmt(chain.omega0.imag)}",
             f"period = {_fmt(chain.period)}"]
    for name, m in (("overlap", chain.overlap_matrix), ("coupling", chain.coupling_matrix)):
        if m is None:
            continue
        lines.append(f"[{name}]")
        for row in m:
            lines.append(" ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in row))
    if chain.cavity_frequencies is not None:
        lines.append("[frequencies]")
        lines.append(" ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in chain.cavity_frequencies))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
